#pragma once

// Riemannian metric on the surface: the exact constant-curvature metric and
// a Gamma-invariant conformal perturbation g = e^{2 phi} g_hyp with verified
// negative curvature. phi is a truncated orbit sum of a compactly supported
// C^2 radial bump (support radius 3*width), so distinct orbit bumps do not
// overlap at the default parameters and the truncated sum is exactly
// invariant on the reduction-relevant region.

#include <memory>
#include <string>
#include <vector>

#include "leafdiff/disk.hpp"
#include "leafdiff/surface_group.hpp"

namespace leafdiff {

enum class MetricKind { constant, perturbed };

struct MetricConfig {
    MetricKind kind = MetricKind::constant;
    double amplitude = 0.1; // A
    double width = 0.5;     // w, hyperbolic; bump support = 3w
    int cutoff = 3;         // orbit word-length L
};

struct ShootingResult {
    TangentVector direction; // g-unit
    double residual = 0;     // boundary-angle error
    int iterations = 0;
};

struct SprayTable; // offset table for the perturbed drift (internal)

class MetricModel {
public:
    MetricModel(FuchsianGroup group, MetricConfig cfg);

    const FuchsianGroup& group() const { return group_; }
    const MetricConfig& config() const { return cfg_; }
    bool perturbed() const { return cfg_.kind == MetricKind::perturbed; }
    double support() const { return support_; }

    double phi(cplx z) const;
    cplx grad_phi(cplx z) const;      // euclidean gradient
    double lap_hyp_phi(cplx z) const; // hyperbolic laplacian
    double curvature(cplx z) const;   // e^{-2phi}(-1 - lap_hyp phi)
    double liouville_weight(cplx z) const { return conformal_lambda(z) * conformal_lambda(z) * std::exp(2 * phi(z)); }
    double conformal_mu(cplx z) const { return conformal_lambda(z) * std::exp(phi(z)); }

    // direction angle of the g-spray at (z, xi); closed form in the constant
    // case, interpolated offset table in the perturbed case (reduces the
    // query internally, so it is usable anywhere in the disk and exactly
    // Gamma-equivariant)
    double spray_angle(cplx z, double theta_xi) const;
    cplx spray_vec(cplx z, double theta_xi) const; // g-unit, euclidean components

    // exact shooting solve for the g-spray (bisection on the initial angle)
    ShootingResult metric_spray(DiskPoint z, BoundaryPoint xi) const;

    // boundary angle reached by the g-geodesic from z with direction v;
    // RK4 of the conformal geodesic ODE inside bump supports, exact
    // hyperbolic continuation outside
    double shoot_boundary_angle(cplx z, double v, double rk_step = 1e-3) const;

    void ensure_drift_table() const; // no-op for the constant metric
    bool drift_table_ready() const;

    struct CurvatureAudit {
        double kmin = 0, kmax = 0;
        bool pass = false;
    };
    CurvatureAudit curvature_audit(int n_points = 4096) const;

    double volume_entropy_estimate(uint64_t seed, int n_samples = 400000) const;

    // memoized gate value for the rho < V precondition (exactly 1 in the
    // constant case)
    double volume_entropy_gate() const;

    const std::vector<cplx>& orbit_centers() const { return centers_; }

private:
    // sum of bump contributions; returns phi and optionally derivatives
    void bump_eval(cplx z, double* phi_out, cplx* grad_out, double* lap_out) const;

    FuchsianGroup group_;
    MetricConfig cfg_;
    double support_ = 0;
    std::vector<cplx> centers_;
    mutable std::shared_ptr<const SprayTable> table_;
    mutable double gate_ = 0; // 0: not yet computed
};

} // namespace leafdiff
