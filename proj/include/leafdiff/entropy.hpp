#pragma once

// Lyapunov exponents of the random leafwise flow, the Jacobian integral
// over time-1 noise realizations, and a coupled-trajectory Bowen-ball
// entropy estimator.

#include <vector>

#include "leafdiff/flow.hpp"

namespace leafdiff {

struct LyapunovReport {
    double chi1 = 0, chi2 = 0;
    double half_width1 = 0, half_width2 = 0; // batch-means confidence
    double T_total = 0;
    double log_jacobian_rate = 0;
};

LyapunovReport lyapunov_spectrum(const FlowParams& p, double T_total, uint64_t master_seed,
                                 int workers = 1);

struct PesinResult {
    double value = 0;
    double std_error = 0;
    int n_samples = 0;
};

PesinResult pesin_integral(const FlowParams& p, int n_samples, uint64_t master_seed,
                           int workers = 1);

struct BowenParams {
    double eta = 0.05;
    int n_units = 8;
    long k_probes = 10000; // effective probes in the eta-ball
    int n_centers = 16;
    bool quotient_flow_direction = false;
};

struct BowenResult {
    double value = 0;     // averaged -(1/n) log f_n
    double std_error = 0; // over (center, noise) realizations
    long min_survivors = 0;
};

BowenResult bowen_entropy(const FlowParams& p, const BowenParams& bp, uint64_t master_seed,
                          int workers = 1);

struct EntropyReport {
    double rho = 0;
    double chi1 = 0, chi2 = 0;
    double pesin = 0, pesin_se = 0;
    double bowen = 0, bowen_se = 0;
    double gap = 0; // bowen - pesin
};

EntropyReport pesin_gap(const FlowParams& p, const BowenParams& bp, int pesin_samples,
                        uint64_t master_seed, int workers = 1);

// stationary initial states harvested from one burned-in trajectory
std::vector<LineElement> stationary_states(const FlowParams& p, int n, uint64_t seed);

} // namespace leafdiff
