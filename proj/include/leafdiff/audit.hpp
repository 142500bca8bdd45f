#pragma once

// Geometry and consistency audits bundled for check-geometry and the
// acceptance suite.

#include <functional>
#include <string>
#include <vector>

#include "leafdiff/flow.hpp"
#include "leafdiff/metric.hpp"

namespace leafdiff {

// ∫_F f(z) dx dy (euclidean measure) by fan triangulation of the octagon
// and tensor Gauss-Legendre; the integrand is smooth, no indicator involved
double octagon_integral(const FuchsianGroup& G, const std::function<double(cplx)>& f,
                        int order = 32);

// max relative finite-difference residual of Δk - rho Div(k X̄) with
// k = Poisson kernel, central differences at euclidean spacing 1e-4,
// over n_points quasi-random (z, xi) pairs and all given rho values
double pde_residual_max(int n_points, const std::vector<double>& rhos, uint64_t seed = 12345);

struct GeometryReport {
    double relation_defect = 0;   // ||g1 g2 g1^-1 g2^-1 g3 g4 g3^-1 g4^-1 -+ I||
    double angle_sum_error = 0;   // |8 * interior angle - 2 pi|
    double area_error = 0;        // |hyperbolic area - 4 pi|
    double pde_residual = 0;      // constant-curvature density PDE
    double curvature_min = -1, curvature_max = -1;
    double gauss_bonnet_error = 0; // |∫ K dA_g + 4 pi| (perturbed only)
    double spray_consistency = 0;  // shooting vs closed form / re-shoot residual
    bool pass = false;
    std::string first_failure;
};

GeometryReport check_geometry(const MetricModel& M);

struct ConvergeFlowRow {
    double eps = 0;
    double median_dist = 0;
};

// median distance of the time-1 common-noise flow to the eps = 0 limit
std::vector<ConvergeFlowRow> converge_flow(const MetricModel& M,
                                           const std::vector<double>& eps_list, int n_states,
                                           uint64_t seed, double step_factor = 0.1);

} // namespace leafdiff
