#include "leafdiff/measure.hpp"

#include <algorithm>
#include <cmath>

#include "leafdiff/errors.hpp"
#include "leafdiff/parallel.hpp"

namespace leafdiff {

namespace {

// fixed test observable for the autocorrelation time: indicator of the
// xy-cell containing z = 0.25 (interior for every sane grid)
int observable_cell(const Grid3D& g) { return g.xy_index(0.25, 0.0); }

double integrated_autocorrelation(const std::vector<std::vector<uint8_t>>& series) {
    double n_total = 0, sum = 0;
    for (const auto& s : series) {
        n_total += static_cast<double>(s.size());
        for (uint8_t b : s) sum += b;
    }
    if (n_total < 16) return 1.0;
    double mean = sum / n_total;
    double c0 = 0;
    for (const auto& s : series)
        for (uint8_t b : s) c0 += (b - mean) * (b - mean);
    c0 /= n_total;
    if (c0 <= 0) return 1.0;
    double tau = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double ck = 0, cnt = 0;
        for (const auto& s : series) {
            if (static_cast<int>(s.size()) <= k) continue;
            for (size_t t = 0; t + k < s.size(); ++t)
                ck += (s[t] - mean) * (s[t + k] - mean);
            cnt += static_cast<double>(s.size() - k);
        }
        if (cnt == 0) break;
        double rk = (ck / cnt) / c0;
        if (rk < 0.05) break; // noise cutoff
        tau += 2.0 * rk;
    }
    return std::clamp(tau, 1.0, 100.0);
}

} // namespace

std::vector<LineElement> quasi_random_states(const FuchsianGroup& G, int n, uint64_t seed) {
    std::vector<LineElement> out;
    out.reserve(n);
    double box = std::tanh(G.octagon_vertex_radius / 2);
    NoiseStream angles{derive_seed(seed, 0xa11)};
    for (uint64_t i = 0; static_cast<int>(out.size()) < n && i < static_cast<uint64_t>(n) * 64; ++i) {
        double u, v;
        r2_point(i, u, v);
        cplx z((2 * u - 1) * box, (2 * v - 1) * box);
        if (!in_fundamental_domain(G, DiskPoint(z))) continue;
        double dir = two_pi * angles.uniform(i);
        out.push_back({DiskPoint(z), visual_boundary(DiskPoint(z), dir)});
    }
    if (static_cast<int>(out.size()) < n)
        throw PreconditionError("quasi_random_states: rejection failed");
    return out;
}

StationaryResult run_stationary(const FlowParams& p, const RunConfig& rc) {
    const MetricModel& M = *p.metric;
    double gate = M.perturbed() ? M.volume_entropy_gate() : 1.0;
    if (p.rho >= gate)
        throw PreconditionError("run_stationary: rho >= volume entropy (weak coercivity fails)");

    long burn_steps = static_cast<long>(std::lround(rc.burn_in / p.step));
    if (rc.n_steps <= burn_steps)
        throw PreconditionError("run_stationary: empty histogram (n_steps <= burn_in)");
    if (M.perturbed()) M.ensure_drift_table();

    std::vector<LineElement> inits = quasi_random_states(M.group(), rc.n_traj, rc.master_seed);
    Histogram3D ref = liouville_reference(M, rc.grid);
    int obs_cell = observable_cell(rc.grid);

    std::vector<Histogram3D> partials(rc.n_traj, Histogram3D(rc.grid));
    std::vector<std::vector<uint8_t>> obs(rc.n_traj), obs_dir(rc.n_traj);

    parallel_for(rc.n_traj, rc.workers, [&](int t) {
        Histogram3D& h = partials[t];
        apply_mask_from(h, ref);
        FlowSegment seg{derive_seed(rc.master_seed, static_cast<uint64_t>(t) + 1), 0};
        LineElement v = inits[t];
        long retained = (rc.n_steps - burn_steps) / rc.sample_every;
        obs[t].reserve(retained);
        obs_dir[t].reserve(retained);
        for (long k = 0; k < rc.n_steps; ++k) {
            v = step_sde(p, v, seg.standard_pair(static_cast<uint64_t>(k)), nullptr);
            if (k >= burn_steps && (k - burn_steps) % rc.sample_every == rc.sample_every - 1) {
                double ang = M.spray_angle(v.x.z, v.xi.theta);
                h.add(v.x.re(), v.x.im(), ang);
                obs[t].push_back(rc.grid.xy_index(v.x.re(), v.x.im()) == obs_cell ? 1 : 0);
                obs_dir[t].push_back(rc.grid.v_index(ang) == 0 ? 1 : 0);
            }
        }
    });

    StationaryResult out{Histogram3D(rc.grid)};
    apply_mask_from(out.hist, ref);
    for (const auto& h : partials) out.hist.merge(h);
    out.n_retained = out.hist.total;
    out.tau = integrated_autocorrelation(obs);
    out.tau_dir = integrated_autocorrelation(obs_dir);
    out.n_eff = out.n_retained / out.tau;
    out.n_eff_dir = out.n_retained / out.tau_dir;
    return out;
}

SweepReport convergence_sweep(const MetricModel& M, const std::vector<double>& rho_list,
                              const RunConfig& rc, double step_factor) {
    std::vector<double> rhos = rho_list;
    std::sort(rhos.begin(), rhos.end(), std::greater<double>());
    Histogram3D ref = liouville_reference(M, rc.grid);

    SweepReport rep;
    for (double rho : rhos) {
        FlowParams p = FlowParams::from_rho(rho, &M, step_factor);
        RunConfig half = rc;
        half.n_traj = std::max(2, rc.n_traj / 2);
        half.master_seed = derive_seed(rc.master_seed, 0x5a5a0001);
        StationaryResult a = run_stationary(p, half);
        half.master_seed = derive_seed(rc.master_seed, 0x5a5a0002);
        StationaryResult b = run_stationary(p, half);

        SweepRow row;
        row.rho = rho;
        row.noise_floor = tv_distance(a.hist, b.hist);
        Histogram3D merged = a.hist;
        merged.merge(b.hist);
        row.n_samples = merged.total;
        row.effective_samples = a.n_eff + b.n_eff;
        row.tv_to_liouville = tv_distance(merged, ref);
        ChiSquare cs = chi_square(merged, ref, row.effective_samples);
        row.chi_square = cs.statistic;
        row.dof = cs.dof;
        row.z_std = cs.z_std;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace leafdiff
