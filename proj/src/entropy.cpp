#include "leafdiff/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "leafdiff/errors.hpp"
#include "leafdiff/parallel.hpp"

namespace leafdiff {

std::vector<LineElement> stationary_states(const FlowParams& p, int n, uint64_t seed) {
    std::vector<LineElement> out;
    out.reserve(n);
    FlowSegment seg{derive_seed(seed, 0x57a7), 0};
    LineElement v{DiskPoint(0.2, 0.1), BoundaryPoint(0.7)};
    long burn = static_cast<long>(std::lround(25.0 / p.step));
    long gap = static_cast<long>(std::lround(2.0 / p.step)); // ~decorrelated
    uint64_t k = 0;
    for (long s = 0; s < burn; ++s) v = step_sde(p, v, seg.standard_pair(k++), nullptr);
    for (int i = 0; i < n; ++i) {
        for (long s = 0; s < gap; ++s) v = step_sde(p, v, seg.standard_pair(k++), nullptr);
        out.push_back(v);
    }
    return out;
}

LyapunovReport lyapunov_spectrum(const FlowParams& p, double T_total, uint64_t master_seed,
                                 int workers) {
    (void)workers; // one long trajectory; batch means give the error bars
    if (T_total < 1.0) throw PreconditionError("lyapunov_spectrum: T_total too small");
    LineElement v = stationary_states(p, 1, master_seed)[0];
    FlowSegment seg{derive_seed(master_seed, 0x17a), 0};

    const int n_batches = 16;
    long steps_total = static_cast<long>(std::lround(T_total / p.step));
    long per_batch = steps_total / n_batches;
    steps_total = per_batch * n_batches;
    double Tb = per_batch * p.step;

    std::vector<double> b1(n_batches), b2(n_batches);
    TangentAccum tan;
    tan.qr_cadence = 16;

    // align Q before accumulating; the Benettin transient is O(1/T) otherwise
    long warm = static_cast<long>(std::lround(16.0 / p.step));
    uint64_t k = 0;
    for (long s = 0; s < warm; ++s) v = step_sde(p, v, seg.standard_pair(k++), &tan);
    tan.final_qr();
    tan.log_r0 = tan.log_r1 = 0;
    tan.log_det = 0;

    double last_r0 = 0, last_r1 = 0, last_ld = 0;
    double total_ld = 0;
    for (int b = 0; b < n_batches; ++b) {
        for (long s = 0; s < per_batch; ++s) v = step_sde(p, v, seg.standard_pair(k++), &tan);
        tan.final_qr();
        b1[b] = (tan.log_r0 - last_r0) / Tb;
        b2[b] = (tan.log_r1 - last_r1) / Tb;
        last_r0 = tan.log_r0;
        last_r1 = tan.log_r1;
        total_ld = tan.log_det;
        (void)last_ld;
    }

    LyapunovReport rep;
    rep.T_total = steps_total * p.step;
    double m1 = 0, m2 = 0;
    for (int b = 0; b < n_batches; ++b) {
        m1 += b1[b];
        m2 += b2[b];
    }
    m1 /= n_batches;
    m2 /= n_batches;
    double v1 = 0, v2 = 0;
    for (int b = 0; b < n_batches; ++b) {
        v1 += (b1[b] - m1) * (b1[b] - m1);
        v2 += (b2[b] - m2) * (b2[b] - m2);
    }
    rep.chi1 = std::max(m1, m2); // QR orders by construction, but be safe
    rep.chi2 = std::min(m1, m2);
    rep.half_width1 = 2.0 * std::sqrt(v1 / (n_batches * (n_batches - 1)));
    rep.half_width2 = 2.0 * std::sqrt(v2 / (n_batches * (n_batches - 1)));
    rep.log_jacobian_rate = total_ld / rep.T_total;
    return rep;
}

PesinResult pesin_integral(const FlowParams& p, int n_samples, uint64_t master_seed,
                           int workers) {
    std::vector<LineElement> inits = stationary_states(p, n_samples, master_seed);
    std::vector<double> vals(n_samples);
    parallel_for(n_samples, workers, [&](int i) {
        FlowSegment seg{derive_seed(master_seed, 0xbe5700 + static_cast<uint64_t>(i)), 0};
        vals[i] = log_jacobian(p, seg, inits[i], 1.0);
    });
    PesinResult r;
    r.n_samples = n_samples;
    double s = 0;
    for (double x : vals) s += x;
    r.value = s / n_samples;
    double q = 0;
    for (double x : vals) q += (x - r.value) * (x - r.value);
    r.std_error = std::sqrt(q / n_samples / std::max(1, n_samples - 1));
    return r;
}

namespace {

// conditional survival product for one (center, noise) realization
double bowen_one(const FlowParams& p, const BowenParams& bp, LineElement center,
                 uint64_t noise_seed, uint64_t probe_seed, long& survivors_out) {
    const MetricModel& M = *p.metric;
    const double eta = bp.eta;

    // probes in the eta-ball of the leaf around the center, weighted by the
    // conditional stationary leaf density (Poisson kernel in the constant
    // case; uniform leaf-Lebesgue otherwise, flagged approximate)
    long K = bp.k_probes;
    std::vector<cplx> w(K);
    std::vector<double> wt(K);
    NoiseStream u{derive_seed(probe_seed, 0x9b0be)};
    cplx cz = center.x.z;
    cplx xiu = center.xi.unit();
    double pc = poisson(cz, center.xi.theta);
    double W0 = 0;
    for (long i = 0; i < K; ++i) {
        double r = eta * std::sqrt(u.uniform(2 * i));
        double a = two_pi * u.uniform(2 * i + 1);
        cplx disp = frame_kappa(std::polar(r, a));
        w[i] = (disp + cz) / (1.0 + std::conj(cz) * disp);
        wt[i] = M.perturbed() ? 1.0 : poisson(w[i], center.xi.theta) / pc;
        W0 += wt[i];
    }

    FlowSegment seg{noise_seed, 0};
    LineElement c = center;
    int spu = p.steps_per_unit();
    double logf = 0;
    const bool constant = !M.perturbed();
    uint64_t k = 0;
    for (int unit = 0; unit < bp.n_units; ++unit) {
        for (int s = 0; s < spu; ++s) {
            GaussianPair g = seg.standard_pair(k++);
            // advance center and probe cloud with common noise, on the cover
            double sc = std::sqrt(2.0 * p.step) * p.diff_scale;
            cplx uu(p.drift_scale * p.step + sc * g.g1, sc * g.g2);
            if (constant) {
                cplx kap = frame_kappa(uu);
                c.x = DiskPoint(leaf_translate(c.x.z, xiu, kap));
                for (size_t i = 0; i < w.size(); ++i) w[i] = leaf_translate(w[i], xiu, kap);
            } else {
                c = step_sde_cover(p, c, g);
                LineElement probe;
                probe.xi = c.xi;
                for (size_t i = 0; i < w.size(); ++i) {
                    probe.x = DiskPoint(w[i]);
                    w[i] = step_sde_cover(p, probe, g).x.z;
                }
            }
        }
        // survival at the integer time
        size_t alive = 0;
        double Wk = 0, Wprev = 0;
        for (double x : wt) Wprev += x;
        for (size_t i = 0; i < w.size(); ++i) {
            double d;
            if (bp.quotient_flow_direction) {
                // distance transverse to the flow direction only
                double vv = visual_angle(w[i], xiu) - visual_angle(c.x.z, xiu);
                double dd = hyp_dist(w[i], c.x.z);
                d = std::abs(dd * std::sin(vv)); // crude transverse component
            } else {
                d = hyp_dist(w[i], c.x.z);
            }
            if (d < eta) {
                w[alive] = w[i];
                wt[alive] = wt[i];
                Wk += wt[i];
                ++alive;
            }
        }
        w.resize(alive);
        wt.resize(alive);
        logf += std::log(std::max(Wk / Wprev, 1e-300));
        if (alive < 50)
            throw StarvationError("bowen_entropy: surviving probes below 50");
    }
    survivors_out = static_cast<long>(w.size());
    return -logf / bp.n_units;
}

} // namespace

BowenResult bowen_entropy(const FlowParams& p, const BowenParams& bp, uint64_t master_seed,
                          int workers) {
    if (p.metric->perturbed()) p.metric->ensure_drift_table();
    std::vector<LineElement> centers = stationary_states(p, bp.n_centers, master_seed);
    std::vector<double> vals(bp.n_centers);
    std::vector<long> survivors(bp.n_centers);
    std::exception_ptr err;
    parallel_for(bp.n_centers, workers, [&](int i) {
        try {
            vals[i] = bowen_one(p, bp, centers[i],
                                derive_seed(master_seed, 0xb01 + static_cast<uint64_t>(i)),
                                derive_seed(master_seed, 0xf00 + static_cast<uint64_t>(i)),
                                survivors[i]);
        } catch (...) {
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);

    BowenResult r;
    double s = 0;
    for (double x : vals) s += x;
    r.value = s / bp.n_centers;
    double q = 0;
    for (double x : vals) q += (x - r.value) * (x - r.value);
    r.std_error = std::sqrt(q / bp.n_centers / std::max(1, bp.n_centers - 1));
    r.min_survivors = *std::min_element(survivors.begin(), survivors.end());
    return r;
}

EntropyReport pesin_gap(const FlowParams& p, const BowenParams& bp, int pesin_samples,
                        uint64_t master_seed, int workers) {
    EntropyReport rep;
    rep.rho = p.rho;
    PesinResult pe = pesin_integral(p, pesin_samples, master_seed, workers);
    BowenResult bo = bowen_entropy(p, bp, master_seed, workers);
    LyapunovReport ly = lyapunov_spectrum(p, 500.0, master_seed, workers);
    rep.chi1 = ly.chi1;
    rep.chi2 = ly.chi2;
    rep.pesin = pe.value;
    rep.pesin_se = pe.std_error;
    rep.bowen = bo.value;
    rep.bowen_se = bo.std_error;
    rep.gap = bo.value - pe.value;
    return rep;
}

} // namespace leafdiff
