#pragma once

// Empirical stationary measures by occupation histograms and the
// convergence sweep toward the Liouville reference.

#include <vector>

#include "leafdiff/flow.hpp"
#include "leafdiff/histogram.hpp"

namespace leafdiff {

struct RunConfig {
    int n_traj = 64;
    long n_steps = 200000; // per trajectory, including burn-in
    double burn_in = 25.0; // time units
    int sample_every = 10; // steps between retained samples
    Grid3D grid;
    uint64_t master_seed = 1;
    int workers = 1;
};

struct StationaryResult {
    Histogram3D hist;
    double n_retained = 0;
    double tau = 1;     // integrated autocorrelation of the spatial cell
                        // indicator, in retained-sample units, capped at 100
    double tau_dir = 1; // same for a direction-bin indicator
    double n_eff = 0;   // n_retained / tau
    double n_eff_dir = 0;
};

StationaryResult run_stationary(const FlowParams& p, const RunConfig& rc);

// quasi-random initial states inside the fundamental domain
std::vector<LineElement> quasi_random_states(const FuchsianGroup& G, int n, uint64_t seed);

struct SweepRow {
    double rho = 0;
    double n_samples = 0;
    double effective_samples = 0;
    double tv_to_liouville = 0;
    double chi_square = 0;
    int dof = 0;
    double noise_floor = 0; // TV between the two half-seed runs
    double z_std = 0;
};

struct SweepReport {
    std::vector<SweepRow> rows; // sorted by rho descending toward -inf
};

SweepReport convergence_sweep(const MetricModel& M, const std::vector<double>& rho_list,
                              const RunConfig& rc, double step_factor);

} // namespace leafdiff
