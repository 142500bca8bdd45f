#pragma once

// Flat dotted-key experiment configuration, parseable from a small text file
// and printable back in canonical form (the `defaults` subcommand).

#include <cstdint>
#include <string>
#include <vector>

#include "leafdiff/histogram.hpp"
#include "leafdiff/measure.hpp"
#include "leafdiff/metric.hpp"

namespace leafdiff {

struct ExperimentConfig {
    // [metric]
    std::string metric_kind = "constant"; // constant | perturbed
    double amplitude = 0.1;
    double width = 0.5;
    int cutoff = 3;
    // [flow] exactly one of rho/epsilon may be set explicitly
    double rho = -4.0;
    bool rho_set = false;
    double epsilon = 0;
    bool epsilon_set = false;
    double step_factor = 0.1;
    // [run]
    int n_traj = 64;
    long n_steps = 200000;
    double burn_in = 25.0;
    int sample_every = 10;
    int grid_nx = 16, grid_ny = 16, grid_nv = 8;
    // [entropy]
    double eta = 0.05;
    int bowen_n = 8;
    long k_probes = 10000;
    int n_centers = 16;
    // general
    uint64_t seed = 1;
    int workers = 0; // 0 = auto

    void apply_line(const std::string& key, const std::string& value);
    void validate() const;

    std::string canonical() const; // stable key=value serialization
    uint64_t hash() const;
    std::string hash_hex() const;

    MetricConfig metric_config() const;
    double effective_rho() const; // from rho or epsilon
    Grid3D grid() const { return Grid3D{grid_nx, grid_ny, grid_nv, 0.85}; }
    RunConfig run_config() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

} // namespace leafdiff
