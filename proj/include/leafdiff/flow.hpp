#pragma once

// The leafwise diffusion -X̄ + eps^2 Δ^s (and Δ^s + rho X̄ for 0 <= rho < V)
// as a common-noise stochastic flow on line elements. One step moves the
// state along the hyperbolic exponential of the frame displacement
// u = (drift h + eps dW1, eps dW2) taken in the (spray, spray-perp)
// g-orthonormal frame; the scheme's weak generator is drift·X̄ + eps^2 Δ_g,
// it is exactly Gamma-equivariant pathwise, and at eps = 0 each step is the
// exact reversed geodesic flow.

#include <cstdint>
#include <vector>

#include "leafdiff/mat2.hpp"
#include "leafdiff/metric.hpp"
#include "leafdiff/rng.hpp"

namespace leafdiff {

struct FlowParams {
    double rho = -4.0; // -HUGE_VAL encodes the deterministic flow
    double epsilon = 0.5;
    double drift_scale = -1.0; // coefficient on the spray
    double diff_scale = 0.5;   // coefficient on the noise
    double step = 1e-4;        // h
    double step_factor = 0.1;
    const MetricModel* metric = nullptr;

    // rho < 0: simulate -X̄ + eps^2 Δ^s with eps = 1/sqrt(-rho);
    // 0 <= rho: simulate Δ^s + rho X̄ directly (same stationary measure family)
    static FlowParams from_rho(double rho, const MetricModel* m, double step_factor = 0.1);
    static FlowParams from_epsilon(double eps, const MetricModel* m, double step_factor = 0.1);

    int steps_per_unit() const { return static_cast<int>(std::lround(1.0 / step)); }
};

// Seeded common-noise window; increments are a pure function of
// (seed, absolute step index), so shifted windows replay bitwise.
struct FlowSegment {
    uint64_t seed = 0;
    uint64_t base_index = 0;

    GaussianPair standard_pair(uint64_t k) const {
        return NoiseStream{seed}.gaussians(base_index + k);
    }

    FlowSegment shifted_steps(uint64_t steps) const { return {seed, base_index + steps}; }
};

struct TangentAccum {
    Mat2 M = Mat2::identity();
    double log_det = 0;
    double log_r0 = 0, log_r1 = 0; // QR-accumulated growth (Benettin)
    int qr_cadence = 0;            // 0: never re-orthonormalize
    int since_qr = 0;

    void push(const Mat2& step, double step_log_det) {
        M = step * M;
        log_det += step_log_det;
        if (qr_cadence > 0 && ++since_qr >= qr_cadence) {
            double r0, r1;
            M = M.qr(r0, r1);
            log_r0 += std::log(r0);
            log_r1 += std::log(r1);
            since_qr = 0;
        }
    }

    void final_qr() {
        double r0, r1;
        M = M.qr(r0, r1);
        log_r0 += std::log(r0);
        log_r1 += std::log(r1);
        since_qr = 0;
    }
};

struct LeafTangent {
    Mat2 matrix;
    double log_det = 0;
};

// One SDE step; reduces the result. tan (optional) receives the exact step
// tangent in conformal orthonormal frames.
LineElement step_sde(const FlowParams& p, LineElement v, GaussianPair g, TangentAccum* tan);

// Same step on the universal cover (no reduction); used for coupled clouds.
LineElement step_sde_cover(const FlowParams& p, LineElement v, GaussianPair g);

// Advance every state with the same increments (the discrete stochastic flow).
void flow_map(const FlowParams& p, const FlowSegment& seg, std::vector<LineElement>& states,
              int n_steps, bool reduce_states = true);

LeafTangent tangent_flow(const FlowParams& p, const FlowSegment& seg, LineElement v,
                         double T);

double log_jacobian(const FlowParams& p, const FlowSegment& seg, LineElement v, double T);

} // namespace leafdiff
