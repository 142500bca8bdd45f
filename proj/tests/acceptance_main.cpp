// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit 0 iff all pass.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "leafdiff/audit.hpp"
#include "leafdiff/config.hpp"
#include "leafdiff/entropy.hpp"
#include "leafdiff/errors.hpp"
#include "leafdiff/measure.hpp"
#include "leafdiff/parallel.hpp"

using namespace leafdiff;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int crit, bool ok, const std::string& detail, double secs) {
    std::printf("[%s] criterion %d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", crit, detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------- criterion 1: harmonic-density PDE ----------
void criterion_1() {
    Timer t;
    double worst = pde_residual_max(200, {0.0, -1.0, -4.0, -16.0});
    bool ok = worst < 1e-5 && t.seconds() < 1.0;
    report(1, ok, fmt("harmonic-density PDE residual %.2e < 1e-5 on 200-point grid", worst),
           t.seconds());
}

// ---------- criterion 2: Theorem 1 exact case ----------
void criterion_2(const MetricModel& M, int workers) {
    Timer t;
    Histogram3D ref = liouville_reference(M, Grid3D{16, 16, 8, 0.85});
    bool all_ok = true;
    std::ostringstream detail;
    detail << "constant curvature:";
    for (double rho : {-1.0, -4.0, -16.0}) {
        FlowParams p = FlowParams::from_rho(rho, &M, 1.0);
        RunConfig rc;
        rc.n_traj = 32;
        rc.burn_in = 25.0;
        rc.sample_every = 100; // one time unit between samples at h = 1e-2
        long per_traj = 31875;
        rc.n_steps = 2500 + rc.sample_every * per_traj;
        rc.grid = Grid3D{16, 16, 8, 0.85};
        rc.master_seed = 20250800 + static_cast<uint64_t>(-rho);
        rc.workers = workers;
        StationaryResult res = run_stationary(p, rc);
        double tv = tv_distance(res.hist, ref);
        ChiSquare cs = chi_square(res.hist, ref, res.n_eff);
        bool ok = res.n_retained >= 1e6 && tv < 0.05 && cs.z_std >= 0.8 && cs.z_std <= 1.3;
        all_ok = all_ok && ok;
        detail << fmt(" rho=%g: n=%.2g TV=%.4f z_std=%.2f", rho, res.n_retained, tv, cs.z_std);
    }
    report(2, all_ok, detail.str() + " (TV < 0.05, z_std in [0.8, 1.3])", t.seconds());
}

// ---------- criterion 3: Theorem 1 trend in variable curvature ----------
void criterion_3(int workers) {
    Timer t;
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, MetricConfig{MetricKind::perturbed, 0.1, 0.5, 3});
    auto audit = M.curvature_audit();
    if (!audit.pass) {
        report(3, false, fmt("curvature audit failed (max K = %.3f)", audit.kmax), t.seconds());
        return;
    }
    M.ensure_drift_table();

    RunConfig rc;
    rc.n_traj = 32;
    rc.burn_in = 25.0;
    rc.sample_every = 100;
    rc.n_steps = 2500 + 100 * 31250;
    rc.grid = Grid3D{10, 10, 8, 0.85};
    rc.master_seed = 77001;
    rc.workers = workers;
    SweepReport trend = convergence_sweep(M, {-1.0, -4.0, -16.0}, rc, 1.0);

    // the harmonic-measure row needs a floor well under its own TV, so it
    // gets a larger budget; its own two-run floor is the yardstick
    RunConfig rc0 = rc;
    rc0.burn_in = 40.0;
    rc0.n_steps = 4000 + 100L * 625000; // ~1e7 retained per half-run
    SweepReport harm = convergence_sweep(M, {0.0}, rc0, 1.0);

    double floor_trend = 0;
    for (const auto& r : trend.rows) floor_trend = std::max(floor_trend, r.noise_floor);
    const SweepRow& row0 = harm.rows[0];
    double tv0 = row0.tv_to_liouville;

    // trend across -1, -4, -16: one inversion within the trend floor
    int soft = 0;
    bool hard = false;
    for (size_t i = 1; i < trend.rows.size(); ++i) {
        double prev = trend.rows[i - 1].tv_to_liouville, cur = trend.rows[i].tv_to_liouville;
        if (cur > prev + floor_trend) hard = true;
        else if (cur > prev) ++soft;
    }
    bool ok = !hard && soft <= 1 && tv0 >= 3.0 * row0.noise_floor;
    std::ostringstream detail;
    detail << fmt("perturbed A=0.1: TV(0)=%.4f (floor %.4f);", tv0, row0.noise_floor);
    for (const auto& r : trend.rows) detail << fmt(" TV(%g)=%.4f", r.rho, r.tv_to_liouville);
    detail << fmt(" (trend floor %.4f)", floor_trend);
    report(3, ok, detail.str() + " (non-increasing, TV(0) >= 3x its floor)", t.seconds());
}

// ---------- criterion 4: stochastic-flow structure ----------
void criterion_4(const MetricModel& M) {
    Timer t;
    const FuchsianGroup& G = M.group();
    FlowParams p = FlowParams::from_rho(-4.0, &M, 0.1);

    // cocycle: bitwise under segment splitting
    bool cocycle_ok = true;
    {
        std::vector<LineElement> init = quasi_random_states(G, 16, 404);
        FlowSegment seg{424242, 0};
        std::vector<LineElement> direct = init, split = init;
        flow_map(p, seg, direct, 400);
        flow_map(p, seg, split, 150);
        flow_map(p, seg.shifted_steps(150), split, 250);
        for (size_t i = 0; i < init.size(); ++i) {
            cocycle_ok = cocycle_ok &&
                         std::memcmp(&direct[i].x.z, &split[i].x.z, sizeof(cplx)) == 0 &&
                         direct[i].xi.theta == split[i].xi.theta;
        }
    }

    // pathwise equivariance over 1000 random (gamma, v, seed) triples
    double worst = 0;
    NoiseStream u{515};
    for (uint64_t i = 0; i < 1000; ++i) {
        double d = 2.0 * u.uniform(5 * i);
        LineElement v{DiskPoint(std::polar(std::tanh(d / 2), two_pi * u.uniform(5 * i + 1))),
                      BoundaryPoint(two_pi * u.uniform(5 * i + 2))};
        v = reduce(G, v).element;
        int gi = static_cast<int>(8 * u.uniform(5 * i + 3)) % 8;
        LineElement gv{mobius_apply(G.gens[gi], v.x), mobius_boundary(G.gens[gi], v.xi)};
        FlowSegment seg{derive_seed(99, i), 0};
        LineElement a = v, b = gv;
        for (int k = 0; k < 40; ++k) {
            GaussianPair g = seg.standard_pair(static_cast<uint64_t>(k));
            a = step_sde(p, a, g, nullptr);
            b = step_sde(p, b, g, nullptr);
        }
        worst = std::max(worst, std::abs(a.x.z - b.x.z));
        worst = std::max(worst, std::abs(std::polar(1.0, a.xi.theta) -
                                          std::polar(1.0, b.xi.theta)));
    }
    bool ok = cocycle_ok && worst < 1e-9;
    report(4, ok,
           fmt("cocycle bitwise: %s; equivariance worst deviation %.2e < 1e-9 (1000 triples)",
               cocycle_ok ? "yes" : "NO", worst),
           t.seconds());
}

// ---------- criterion 5: eps -> 0 limit ----------
void criterion_5(const MetricModel& M) {
    Timer t;
    auto rows = converge_flow(M, {0.5, 0.25, 0.125}, 256, 99);
    double r1 = rows[0].median_dist / rows[1].median_dist;
    double r2 = rows[1].median_dist / rows[2].median_dist;
    bool ok = r1 >= 1.5 && r1 <= 2.5 && r2 >= 1.5 && r2 <= 2.5;
    report(5, ok,
           fmt("median dist halving ratios %.2f, %.2f in [1.5, 2.5] (eps = 0.5, 0.25, 0.125)",
               r1, r2),
           t.seconds());
}

// ---------- criterion 6: jacobian limit ----------
void criterion_6(const MetricModel& M, int workers) {
    Timer t;
    FlowParams p0 = FlowParams::from_rho(-HUGE_VAL, &M, 1.0);
    PesinResult pe0 = pesin_integral(p0, 1000, 606, workers);

    FlowParams p16 = FlowParams::from_rho(-16.0, &M, 1.0);
    PesinResult pe16 = pesin_integral(p16, 20000, 616, workers);
    LyapunovReport ly = lyapunov_spectrum(p16, 2500.0, 616, workers);
    double sum = ly.chi1 + ly.chi2;

    bool ok = std::abs(pe0.value - 1.0) <= 0.005 && std::abs(pe16.value - 1.0) <= 0.1 &&
              std::abs(pe16.value - sum) <= 0.02 * std::abs(sum);
    report(6, ok,
           fmt("pesin(eps=0) = %.4f (1 +- 0.005); pesin(-16) = %.3f (1 +- 0.1); "
               "lyapunov sum %.3f within 2%%",
               pe0.value, pe16.value, sum),
           t.seconds());
}

// ---------- criterion 7: entropy inequality ----------
void criterion_7(const MetricModel& M, int workers) {
    Timer t;
    std::ostringstream detail;
    bool ok = true;

    FlowParams p0 = FlowParams::from_rho(-HUGE_VAL, &M, 1.0);
    BowenParams bp0;
    bp0.eta = 0.05;
    bp0.n_units = 8;
    bp0.k_probes = 400000;
    bp0.n_centers = 8;
    BowenResult b0 = bowen_entropy(p0, bp0, 707, workers);
    PesinResult pe0 = pesin_integral(p0, 1000, 707, workers);
    double gap0 = b0.value - pe0.value;
    ok = ok && b0.value >= 0.8 && b0.value <= 1.2 && gap0 >= -0.15;
    detail << fmt("eps=0: bowen=%.3f in [0.8,1.2], gap=%.3f;", b0.value, gap0);

    struct Cfg {
        double rho;
        int n;
        long K;
    };
    for (Cfg c : {Cfg{-4.0, 5, 500000}, Cfg{-16.0, 6, 400000}}) {
        FlowParams p = FlowParams::from_rho(c.rho, &M, 1.0);
        BowenParams bp;
        bp.eta = 0.05;
        bp.n_units = c.n;
        bp.k_probes = c.K;
        bp.n_centers = 12;
        BowenResult b = bowen_entropy(p, bp, 717, workers);
        PesinResult pe = pesin_integral(p, 6000, 717, workers);
        double gap = b.value - pe.value;
        ok = ok && gap >= -0.15;
        detail << fmt(" rho=%g: bowen=%.3f pesin=%.3f gap=%.3f;", c.rho, b.value, pe.value, gap);
    }
    report(7, ok, detail.str() + " (gaps >= -0.15)", t.seconds());
}

// ---------- criterion 8: volume entropy gate ----------
void criterion_8(const MetricModel& M) {
    Timer t;
    double v = M.volume_entropy_estimate(808);
    bool band = std::abs(v - 1.0) <= 0.05;

    bool rejected = false;
    int code = 0;
    try {
        FlowParams p = FlowParams::from_rho(2.0, &M, 1.0);
        RunConfig rc;
        rc.n_traj = 1;
        rc.n_steps = 5000;
        rc.burn_in = 20.0;
        run_stationary(p, rc);
    } catch (const PreconditionError&) {
        rejected = true;
        code = PreconditionError::exit_code;
    }
    bool ok = band && rejected && code == 3;
    report(8, ok,
           fmt("volume entropy %.3f = 1 +- 0.05; rho = 2 >= V rejected with exit class %d", v,
               code),
           t.seconds());
}

// ---------- criterion 9: determinism ----------
void criterion_9(const MetricModel& M) {
    Timer t;
    auto run_to_bytes = [&](int workers) {
        FlowParams p = FlowParams::from_rho(-4.0, &M, 1.0);
        RunConfig rc;
        rc.n_traj = 8;
        rc.burn_in = 20.0;
        rc.sample_every = 50;
        rc.n_steps = 2000 + 50 * 2000;
        rc.master_seed = 909;
        rc.workers = workers;
        StationaryResult res = run_stationary(p, rc);
        Histogram3D ref = liouville_reference(M, rc.grid);
        std::ostringstream csv;
        char buf[96];
        auto pe = res.hist.normalized();
        auto pr = ref.normalized();
        for (size_t i = 0; i < pe.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, pe[i], pr[i]);
            csv << buf;
        }
        std::snprintf(buf, sizeof buf, "tv=%.17g,tau=%.17g,neff=%.17g\n",
                      tv_distance(res.hist, ref), res.tau, res.n_eff);
        csv << buf;
        return csv.str();
    };
    std::string w1 = run_to_bytes(1);
    std::string w4 = run_to_bytes(4);
    std::string w1b = run_to_bytes(1);
    bool ok = (w1 == w4) && (w1 == w1b);
    report(9, ok, fmt("outputs byte-identical across worker counts 1/4 and reruns: %s",
                      ok ? "yes" : "NO"),
           t.seconds());
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> which;
    for (int i = 1; i < argc; ++i) which.insert(std::atoi(argv[i]));
    auto enabled = [&](int k) { return which.empty() || which.count(k) > 0; };

    int workers = resolve_workers(0);
    FuchsianGroup G = build_octagon_group();
    MetricModel Mc(G, MetricConfig{});

    if (enabled(1)) criterion_1();
    if (enabled(2)) criterion_2(Mc, workers);
    if (enabled(3)) criterion_3(workers);
    if (enabled(4)) criterion_4(Mc);
    if (enabled(5)) criterion_5(Mc);
    if (enabled(6)) criterion_6(Mc, workers);
    if (enabled(7)) criterion_7(Mc, workers);
    if (enabled(8)) criterion_8(Mc);
    if (enabled(9)) criterion_9(Mc);

    std::printf("%s: %d criteria failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
