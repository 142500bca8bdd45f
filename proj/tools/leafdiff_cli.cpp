// Reproducible experiment driver: subcommands for every estimator, seeded
// deterministic execution, machine-readable outputs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "leafdiff/audit.hpp"
#include "leafdiff/config.hpp"
#include "leafdiff/entropy.hpp"
#include "leafdiff/errors.hpp"
#include "leafdiff/parallel.hpp"
#include "leafdiff/version.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace leafdiff;

namespace {

struct Ctx {
    ExperimentConfig cfg;
    std::string out_dir = "out";
    std::vector<std::pair<std::string, bool>> checks;
    mutable bool manifest_written = false;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    std::string tag(const std::string& cmd, const std::string& extra = "") const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "seed%llu_cfg%s",
                      static_cast<unsigned long long>(cfg.seed), cfg.hash_hex().c_str());
        std::string t = cmd;
        if (!extra.empty()) t += "_" + extra;
        return t + "_" + buf;
    }

    fs::path path(const std::string& name) const { return fs::path(out_dir) / name; }
};

json config_json(const ExperimentConfig& cfg) {
    json j;
    std::istringstream is(cfg.canonical());
    std::string line;
    while (std::getline(is, line)) {
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = line.substr(0, eq - 1);
        std::string v = line.substr(eq + 2);
        j[k] = v;
    }
    return j;
}

void write_manifest(const Ctx& ctx, const std::string& cmd, bool ok) {
    ctx.manifest_written = true;
    json m;
    m["command"] = cmd;
    m["code_version"] = version_string;
    m["config"] = config_json(ctx.cfg);
    m["config_hash"] = ctx.cfg.hash_hex();
    m["seed"] = ctx.cfg.seed;
    m["ok"] = ok;
    json checks = json::array();
    for (const auto& [name, pass] : ctx.checks) checks.push_back({{"name", name}, {"pass", pass}});
    m["checks"] = checks;
    m["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    std::ofstream out(ctx.path(ctx.tag(cmd) + ".manifest.json"));
    out << m.dump(2) << "\n";
}

std::string rho_tag(double rho) {
    if (rho == -HUGE_VAL) return "rho-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "rho%g", rho);
    return buf;
}

void write_cells_csv(const Ctx& ctx, const std::string& name, const Histogram3D& emp,
                     const Histogram3D& ref) {
    std::ofstream out(ctx.path(name));
    out << "ix,iy,iv,mass_emp,mass_ref\n";
    auto pe = emp.normalized();
    auto pr = ref.normalized();
    char buf[80];
    for (int j = 0; j < emp.grid.ny; ++j)
        for (int i = 0; i < emp.grid.nx; ++i)
            for (int k = 0; k < emp.grid.nv; ++k) {
                size_t idx = (size_t)(j * emp.grid.nx + i) * emp.grid.nv + k;
                std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g\n", i, j, k, pe[idx],
                              pr[idx]);
                out << buf;
            }
}

json grid_json(const Grid3D& g) { return json::array({g.nx, g.ny, g.nv}); }

// ---------- subcommands ----------

int cmd_check_geometry(Ctx& ctx) {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, ctx.cfg.metric_config());
    GeometryReport rep = check_geometry(M);
    ctx.checks = {{"group_relation", rep.relation_defect <= 1e-8},
                  {"octagon_angle_sum", rep.angle_sum_error <= 1e-9},
                  {"octagon_area", rep.area_error <= 1e-6},
                  {"harmonic_density_pde", rep.pde_residual <= 1e-5}};
    if (M.perturbed()) {
        ctx.checks.push_back({"negative_curvature", rep.curvature_max < -0.05});
        ctx.checks.push_back({"gauss_bonnet", rep.gauss_bonnet_error <= 1e-3});
        ctx.checks.push_back({"spray_consistency", rep.spray_consistency <= 1e-4});
    }

    json j;
    j["relation_defect"] = rep.relation_defect;
    j["angle_sum_error"] = rep.angle_sum_error;
    j["area_error"] = rep.area_error;
    j["pde_residual"] = rep.pde_residual;
    if (M.perturbed()) {
        j["curvature_min"] = rep.curvature_min;
        j["curvature_max"] = rep.curvature_max;
        j["gauss_bonnet_error"] = rep.gauss_bonnet_error;
        j["spray_consistency"] = rep.spray_consistency;
    }
    j["pass"] = rep.pass;
    if (!rep.pass) j["first_failure"] = rep.first_failure;
    j["seed"] = ctx.cfg.seed;
    std::ofstream(ctx.path(ctx.tag("check-geometry") + ".summary.json")) << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    write_manifest(ctx, "check-geometry", rep.pass);
    if (!rep.pass) throw AuditError("check-geometry failed: " + rep.first_failure);
    return 0;
}

int cmd_stationary(Ctx& ctx) {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, ctx.cfg.metric_config());
    FlowParams p = FlowParams::from_rho(ctx.cfg.effective_rho(), &M, ctx.cfg.step_factor);
    RunConfig rc = ctx.cfg.run_config();
    StationaryResult res = run_stationary(p, rc);
    Histogram3D ref = liouville_reference(M, rc.grid);
    double tv = tv_distance(res.hist, ref);
    ChiSquare cs = chi_square(res.hist, ref, res.n_eff);
    ctx.checks = {{"rho_below_V", true}, {"nonempty", res.n_retained > 0}};

    std::string t = ctx.tag("stationary", rho_tag(p.rho));
    write_cells_csv(ctx, t + ".cells.csv", res.hist, ref);
    json j;
    j["rho"] = p.rho;
    j["tv"] = tv;
    j["chi2"] = cs.statistic;
    j["dof"] = cs.dof;
    j["n_eff"] = res.n_eff;
    j["seed"] = ctx.cfg.seed;
    j["grid"] = grid_json(rc.grid);
    j["n_retained"] = res.n_retained;
    j["tau"] = res.tau;
    j["z_std"] = cs.z_std;
    std::ofstream(ctx.path(t + ".summary.json")) << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    write_manifest(ctx, "stationary", true);
    return 0;
}

int cmd_sweep(Ctx& ctx, const std::vector<double>& rhos) {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, ctx.cfg.metric_config());
    RunConfig rc = ctx.cfg.run_config();
    SweepReport rep = convergence_sweep(M, rhos, rc, ctx.cfg.step_factor);

    std::string t = ctx.tag("sweep");
    std::ofstream csv(ctx.path(t + ".rows.csv"));
    csv << "rho,n_samples,effective_samples,tv_to_liouville,chi_square,dof,noise_floor,z_std\n";
    char buf[220];
    json rows = json::array();
    for (const SweepRow& r : rep.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n", r.rho,
                      r.n_samples, r.effective_samples, r.tv_to_liouville, r.chi_square, r.dof,
                      r.noise_floor, r.z_std);
        csv << buf;
        rows.push_back({{"rho", r.rho},
                        {"n_samples", r.n_samples},
                        {"effective_samples", r.effective_samples},
                        {"tv_to_liouville", r.tv_to_liouville},
                        {"chi_square", r.chi_square},
                        {"dof", r.dof},
                        {"noise_floor", r.noise_floor},
                        {"z_std", r.z_std}});
    }
    json j;
    j["rows"] = rows;
    j["seed"] = ctx.cfg.seed;
    j["grid"] = grid_json(rc.grid);
    std::ofstream(ctx.path(t + ".summary.json")) << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    ctx.checks = {{"all_rho_below_V", true}};
    write_manifest(ctx, "sweep", true);
    return 0;
}

int cmd_entropy(Ctx& ctx) {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, ctx.cfg.metric_config());
    FlowParams p = FlowParams::from_rho(ctx.cfg.effective_rho(), &M, ctx.cfg.step_factor);
    double gate = M.volume_entropy_gate();
    if (p.rho >= gate) throw PreconditionError("entropy: rho >= volume entropy");
    BowenParams bp;
    bp.eta = ctx.cfg.eta;
    bp.n_units = ctx.cfg.bowen_n;
    bp.k_probes = ctx.cfg.k_probes;
    bp.n_centers = ctx.cfg.n_centers;
    EntropyReport rep =
        pesin_gap(p, bp, 4000, ctx.cfg.seed, resolve_workers(ctx.cfg.workers));

    json j;
    j["rho"] = rep.rho;
    j["chi1"] = rep.chi1;
    j["chi2"] = rep.chi2;
    j["pesin_integral"] = rep.pesin;
    j["bowen_entropy"] = rep.bowen;
    j["gap"] = rep.gap;
    j["params"] = {{"eta", bp.eta},
                   {"n", bp.n_units},
                   {"k_probes", bp.k_probes},
                   {"n_centers", bp.n_centers}};
    j["seed"] = ctx.cfg.seed;
    std::string t = ctx.tag("entropy", rho_tag(p.rho));
    std::ofstream(ctx.path(t + ".summary.json")) << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    ctx.checks = {{"rho_below_V", true}, {"no_starvation", true}};
    write_manifest(ctx, "entropy", true);
    return 0;
}

int cmd_lyapunov(Ctx& ctx, double T_total) {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, ctx.cfg.metric_config());
    FlowParams p = FlowParams::from_rho(ctx.cfg.effective_rho(), &M, ctx.cfg.step_factor);
    if (p.rho >= M.volume_entropy_gate())
        throw PreconditionError("lyapunov: rho >= volume entropy");
    LyapunovReport rep = lyapunov_spectrum(p, T_total, ctx.cfg.seed);

    json j;
    j["rho"] = p.rho;
    j["chi1"] = rep.chi1;
    j["chi2"] = rep.chi2;
    j["half_width1"] = rep.half_width1;
    j["half_width2"] = rep.half_width2;
    j["log_jacobian_rate"] = rep.log_jacobian_rate;
    j["T_total"] = rep.T_total;
    j["seed"] = ctx.cfg.seed;
    std::string t = ctx.tag("lyapunov", rho_tag(p.rho));
    std::ofstream(ctx.path(t + ".summary.json")) << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    ctx.checks = {{"sum_identity",
                   std::abs(rep.chi1 + rep.chi2 - rep.log_jacobian_rate) <=
                       0.02 * std::max(1.0, std::abs(rep.log_jacobian_rate))}};
    write_manifest(ctx, "lyapunov", true);
    return 0;
}

int cmd_converge_flow(Ctx& ctx, const std::vector<double>& eps_list) {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, ctx.cfg.metric_config());
    auto rows = converge_flow(M, eps_list, 256, ctx.cfg.seed, ctx.cfg.step_factor);

    std::string t = ctx.tag("converge-flow");
    std::ofstream csv(ctx.path(t + ".rows.csv"));
    csv << "eps,median_dist\n";
    char buf[80];
    json jr = json::array();
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.eps, r.median_dist);
        csv << buf;
        jr.push_back({{"eps", r.eps}, {"median_dist", r.median_dist}});
    }
    json j;
    j["rows"] = jr;
    j["seed"] = ctx.cfg.seed;
    std::ofstream(ctx.path(t + ".summary.json")) << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    write_manifest(ctx, "converge-flow", true);
    return 0;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "-inf")
            out.push_back(-HUGE_VAL);
        else
            out.push_back(std::stod(item));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"leafwise diffusion simulator and measurement suite"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", rho_list = "-1,-4,-16",
                eps_list = "0.5,0.25,0.125";
    long seed_flag = -1;
    int workers_flag = -1;
    double lyap_T = 500;

    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--seed", seed_flag, "override config seed");
    app.add_option("--workers", workers_flag, "override worker count (0 = auto)");
    app.add_option("--out", out_dir, "output directory");

    auto* c_defaults = app.add_subcommand("defaults", "print the default configuration");
    auto* c_geom = app.add_subcommand("check-geometry", "run all geometry invariants");
    auto* c_stat = app.add_subcommand("stationary", "occupation histogram at one rho");
    auto* c_sweep = app.add_subcommand("sweep", "TV-to-Liouville across a rho list");
    c_sweep->add_option("--rhos", rho_list, "comma-separated rho values");
    auto* c_entropy = app.add_subcommand("entropy", "pesin integral, bowen entropy, gap");
    auto* c_lyap = app.add_subcommand("lyapunov", "lyapunov exponents via QR");
    c_lyap->add_option("--T", lyap_T, "trajectory length in time units");
    auto* c_conv = app.add_subcommand("converge-flow", "eps -> 0 pathwise limit medians");
    c_conv->add_option("--eps-list", eps_list, "comma-separated epsilon values");

    // global flags are valid after the subcommand too
    for (CLI::App* s : {c_defaults, c_geom, c_stat, c_sweep, c_entropy, c_lyap, c_conv})
        s->fallthrough();

    CLI11_PARSE(app, argc, argv);

    Ctx ctx;
    try {
        if (!config_path.empty()) ctx.cfg = load_config(config_path);
        if (seed_flag >= 0) ctx.cfg.seed = static_cast<uint64_t>(seed_flag);
        if (workers_flag >= 0) ctx.cfg.workers = workers_flag;
        ctx.cfg.validate();
        ctx.out_dir = out_dir;

        if (c_defaults->parsed()) {
            std::cout << ctx.cfg.canonical();
            return 0;
        }
        fs::create_directories(out_dir);

        const char* active = c_geom->parsed()      ? "check-geometry"
                             : c_stat->parsed()    ? "stationary"
                             : c_sweep->parsed()   ? "sweep"
                             : c_entropy->parsed() ? "entropy"
                             : c_lyap->parsed()    ? "lyapunov"
                                                   : "converge-flow";
        try {
            if (c_geom->parsed()) return cmd_check_geometry(ctx);
            if (c_stat->parsed()) return cmd_stationary(ctx);
            if (c_sweep->parsed()) return cmd_sweep(ctx, parse_list(rho_list));
            if (c_entropy->parsed()) return cmd_entropy(ctx);
            if (c_lyap->parsed()) return cmd_lyapunov(ctx, lyap_T);
            if (c_conv->parsed()) return cmd_converge_flow(ctx, parse_list(eps_list));
        } catch (...) {
            // the manifest is emitted even on failure
            if (!ctx.manifest_written) {
                ctx.checks.push_back({"completed", false});
                write_manifest(ctx, active, false);
            }
            throw;
        }
    } catch (const AuditError& e) {
        std::cerr << "audit failure: " << e.what() << "\n";
        return AuditError::exit_code;
    } catch (const StarvationError& e) {
        std::cerr << "numerical starvation: " << e.what() << "\n";
        return StarvationError::exit_code;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition violation: " << e.what() << "\n";
        return PreconditionError::exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
