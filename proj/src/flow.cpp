#include "leafdiff/flow.hpp"

#include <cmath>

#include "leafdiff/errors.hpp"

namespace leafdiff {

FlowParams FlowParams::from_rho(double rho, const MetricModel* m, double step_factor) {
    FlowParams p;
    p.rho = rho;
    p.metric = m;
    p.step_factor = step_factor;
    if (rho == -HUGE_VAL) {
        p.epsilon = 0;
        p.drift_scale = -1;
        p.diff_scale = 0;
        p.step = 1e-2 * step_factor;
    } else if (rho < 0) {
        p.epsilon = 1.0 / std::sqrt(-rho);
        p.drift_scale = -1;
        p.diff_scale = p.epsilon;
        p.step = std::min(1e-2, p.epsilon * p.epsilon) * step_factor;
    } else {
        // 0 <= rho < V: simulate L_rho = Δ^s + rho X̄ directly
        p.epsilon = 1.0;
        p.drift_scale = rho;
        p.diff_scale = 1.0;
        p.step = 1e-2 * step_factor;
    }
    return p;
}

FlowParams FlowParams::from_epsilon(double eps, const MetricModel* m, double step_factor) {
    if (eps == 0) return from_rho(-HUGE_VAL, m, step_factor);
    return from_rho(-1.0 / (eps * eps), m, step_factor);
}

namespace {

// frame displacement for one step: u in the (spray, perp) g-frame
inline cplx frame_u(const FlowParams& p, GaussianPair g) {
    double sc = std::sqrt(2.0 * p.step) * p.diff_scale;
    return {p.drift_scale * p.step + sc * g.g1, sc * g.g2};
}

struct StepCore {
    cplx x_new;
    cplx kappa;     // argument passed to leaf_translate
    double mu_old;  // conformal factor at x
};

inline StepCore raw_step(const FlowParams& p, cplx x, double theta_xi, cplx u) {
    StepCore c;
    const MetricModel& M = *p.metric;
    if (!M.perturbed()) {
        c.kappa = frame_kappa(u);
        c.mu_old = conformal_lambda(x);
    } else {
        double ph = M.phi(x);
        double offset = M.spray_angle(x, theta_xi) -
                        visual_angle(x, std::polar(1.0, theta_xi));
        double len = std::abs(u) * std::exp(-ph);
        double ang = offset + std::atan2(u.imag(), u.real());
        c.kappa = len == 0 ? cplx(0, 0) : std::polar(std::tanh(len / 2), ang);
        c.mu_old = conformal_lambda(x) * std::exp(ph);
    }
    c.x_new = leaf_translate(x, std::polar(1.0, theta_xi), c.kappa);
    return c;
}

// exact tangent of the raw step in conformal orthonormal frames
inline void step_tangent(const FlowParams& p, cplx x, double theta_xi, cplx u,
                         const StepCore& c, Mat2& Mstep, double& logdet) {
    const MetricModel& M = *p.metric;
    cplx xiu = std::polar(1.0, theta_xi);
    if (!M.perturbed()) {
        cplx Sz, Szb;
        leaf_translate_deriv(x, xiu, c.kappa, Sz, Szb);
        double scale = conformal_lambda(c.x_new) / c.mu_old;
        Mstep = jacobian_from_wirtinger(Sz, Szb) * scale;
        logdet = std::log(std::norm(Sz) - std::norm(Szb)) + 2.0 * std::log(scale);
    } else {
        // central differences of the full step map, euclidean spacing 1e-6
        const double d = 1e-6;
        cplx cols[2];
        const cplx dirs[2] = {cplx(d, 0), cplx(0, d)};
        for (int j = 0; j < 2; ++j) {
            cplx xp = raw_step(p, x + dirs[j], theta_xi, u).x_new;
            cplx xm = raw_step(p, x - dirs[j], theta_xi, u).x_new;
            cols[j] = (xp - xm) / (2 * d);
        }
        double scale = M.conformal_mu(c.x_new) / c.mu_old;
        Mstep = Mat2{cols[0].real(), cols[1].real(), cols[0].imag(), cols[1].imag()} * scale;
        logdet = std::log(Mstep.det());
    }
}

inline void apply_reduction_tangent(const MetricModel& M, const MobiusMap& applied, cplx x_pre,
                                    cplx x_post, TangentAccum* tan) {
    if (!tan) return;
    cplx d = applied.deriv(x_pre);
    double scale = M.conformal_mu(x_post) / M.conformal_mu(x_pre) * std::abs(d);
    cplx e = d / std::abs(d);
    Mat2 rot{e.real() * scale, -e.imag() * scale, e.imag() * scale, e.real() * scale};
    tan->push(rot, 2.0 * std::log(scale));
}

} // namespace

LineElement step_sde(const FlowParams& p, LineElement v, GaussianPair g, TangentAccum* tan) {
    cplx u = frame_u(p, g);
    StepCore c = raw_step(p, v.x.z, v.xi.theta, u);
    if (tan) {
        Mat2 Ms;
        double ld;
        step_tangent(p, v.x.z, v.xi.theta, u, c, Ms, ld);
        tan->push(Ms, ld);
    }
    LineElement moved{DiskPoint(c.x_new), v.xi};
    ReducedState red = reduce(p.metric->group(), moved);
    if (red.word_length > 0)
        apply_reduction_tangent(*p.metric, red.applied, c.x_new, red.element.x.z, tan);
    return red.element;
}

LineElement step_sde_cover(const FlowParams& p, LineElement v, GaussianPair g) {
    cplx u = frame_u(p, g);
    StepCore c = raw_step(p, v.x.z, v.xi.theta, u);
    return {DiskPoint(c.x_new), v.xi};
}

void flow_map(const FlowParams& p, const FlowSegment& seg, std::vector<LineElement>& states,
              int n_steps, bool reduce_states) {
    const bool constant = !p.metric->perturbed();
    for (int k = 0; k < n_steps; ++k) {
        GaussianPair g = seg.standard_pair(static_cast<uint64_t>(k));
        cplx u = frame_u(p, g);
        cplx kappa_shared = constant ? frame_kappa(u) : cplx(0, 0);
        for (LineElement& v : states) {
            if (constant) {
                v.x = DiskPoint(leaf_translate(v.x.z, v.xi.unit(), kappa_shared));
            } else {
                v.x = DiskPoint(raw_step(p, v.x.z, v.xi.theta, u).x_new);
            }
            if (reduce_states) v = reduce(p.metric->group(), v).element;
        }
    }
}

LeafTangent tangent_flow(const FlowParams& p, const FlowSegment& seg, LineElement v, double T) {
    TangentAccum tan;
    tan.qr_cadence = 0; // keep the exact matrix; T is short here
    int n = static_cast<int>(std::lround(T / p.step));
    for (int k = 0; k < n; ++k) v = step_sde(p, v, seg.standard_pair(k), &tan);
    return {tan.M, tan.log_det};
}

double log_jacobian(const FlowParams& p, const FlowSegment& seg, LineElement v, double T) {
    TangentAccum tan;
    tan.qr_cadence = 16; // bounded condition number over long windows
    int n = static_cast<int>(std::lround(T / p.step));
    for (int k = 0; k < n; ++k) v = step_sde(p, v, seg.standard_pair(k), &tan);
    return tan.log_det;
}

} // namespace leafdiff
