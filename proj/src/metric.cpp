#include "leafdiff/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "leafdiff/errors.hpp"
#include "leafdiff/rng.hpp"

namespace leafdiff {

namespace {

constexpr double pi = 3.14159265358979323846264338328;

// wrap into (-pi, pi]
double wrap_diff(double d) {
    d = std::fmod(d, two_pi);
    if (d > pi) d -= two_pi;
    if (d <= -pi) d += two_pi;
    return d;
}

// monotone lift of the hyperbolic visual-boundary map v -> theta;
// |theta - v| < pi strictly for |z| < 1
double visual_boundary_lift(cplx z, double v) {
    cplx e = std::polar(1.0, v);
    cplx xi = (e + z) / (1.0 + std::conj(z) * e);
    double th = std::atan2(xi.imag(), xi.real());
    return v + wrap_diff(th - v);
}

struct BucketGrid {
    // coarse euclidean buckets over [-1,1]^2 holding candidate bump centers
    static constexpr int n = 24;
    std::vector<int> idx[n * n];

    static int cell_of(double x) {
        int i = static_cast<int>((x + 1.0) * (n / 2.0));
        return std::clamp(i, 0, n - 1);
    }

    void insert_disk(int center_index, cplx ec, double er) {
        int i0 = cell_of(ec.real() - er), i1 = cell_of(ec.real() + er);
        int j0 = cell_of(ec.imag() - er), j1 = cell_of(ec.imag() + er);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) idx[j * n + i].push_back(center_index);
    }

    const std::vector<int>& candidates(cplx z) const {
        return idx[cell_of(z.imag()) * n + cell_of(z.real())];
    }
};

} // namespace

// -------------------- spray offset table --------------------

struct SprayTable {
    int nx = 48, ny = 48, nv = 128;
    double x0 = -0.92, dx = 0;
    std::vector<double> off; // [j*nx*nv + i*nv + k], offset at node (x_i, y_j, theta_k)

    double node_x(int i) const { return x0 + i * dx; }

    static double cr1(double p0, double p1, double p2, double p3, double t) {
        return 0.5 * ((2 * p1) + (-p0 + p2) * t + (2 * p0 - 5 * p1 + 4 * p2 - p3) * (t * t) +
                      (-p0 + 3 * p1 - 3 * p2 + p3) * (t * t * t));
    }

    double at(double x, double y, double theta) const {
        double fx = (x - x0) / dx, fy = (y - x0) / dx;
        int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
        i = std::clamp(i, 1, nx - 3);
        j = std::clamp(j, 1, ny - 3);
        double tx = fx - i, ty = fy - j;
        double ft = wrap_angle(theta) / (two_pi / nv);
        int k = static_cast<int>(std::floor(ft)) % nv;
        double tt = ft - std::floor(ft);
        double vy[4];
        for (int dj = -1; dj <= 2; ++dj) {
            double vx[4];
            for (int di = -1; di <= 2; ++di) {
                const double* col = &off[(size_t)(j + dj) * nx * nv + (size_t)(i + di) * nv];
                double pv[4];
                for (int dk = -1; dk <= 2; ++dk) pv[dk + 1] = col[(k + dk + nv) % nv];
                vx[di + 1] = cr1(pv[0], pv[1], pv[2], pv[3], tt);
            }
            vy[dj + 1] = cr1(vx[0], vx[1], vx[2], vx[3], tx);
        }
        return cr1(vy[0], vy[1], vy[2], vy[3], ty);
    }
};

// -------------------- construction --------------------

MetricModel::MetricModel(FuchsianGroup group, MetricConfig cfg)
    : group_(std::move(group)), cfg_(cfg) {
    if (cfg_.kind == MetricKind::perturbed) {
        support_ = 3.0 * cfg_.width;
        for (const MobiusMap& w : enumerate_words(group_, cfg_.cutoff))
            centers_.push_back(w.apply(cplx(0, 0)));
    }
}

// bucket grid is built on demand; immutable per model
static const BucketGrid& bucket_grid_for(const MetricModel& M, const std::vector<cplx>& centers,
                                         double support) {
    static thread_local const MetricModel* cached_model = nullptr;
    static thread_local BucketGrid grid;
    if (cached_model == &M) return grid;
    grid = BucketGrid{};
    double t = std::tanh(support / 2);
    for (size_t i = 0; i < centers.size(); ++i) {
        cplx c = centers[i];
        double nc = std::norm(c);
        double den = 1.0 - t * t * nc;
        cplx ec = c * ((1.0 - t * t) / den);
        double er = t * (1.0 - nc) / den;
        grid.insert_disk(static_cast<int>(i), ec, er);
    }
    cached_model = &M;
    return grid;
}

void MetricModel::bump_eval(cplx z, double* phi_out, cplx* grad_out, double* lap_out) const {
    if (phi_out) *phi_out = 0;
    if (grad_out) *grad_out = cplx(0, 0);
    if (lap_out) *lap_out = 0;
    if (cfg_.kind != MetricKind::perturbed) return;

    const BucketGrid& grid = bucket_grid_for(*this, centers_, support_);
    const double A = cfg_.amplitude, s = support_;
    const double cosh_s_m1 = std::cosh(s) - 1.0;
    double one_mz = 1.0 - std::norm(z);

    for (int ci : grid.candidates(z)) {
        cplx c = centers_[ci];
        double one_mc = 1.0 - std::norm(c);
        double N = std::norm(z - c);
        double D = one_mz * one_mc;
        if (2.0 * N >= cosh_s_m1 * D) continue; // r >= s
        double arg = 1.0 + 2.0 * N / D;
        double r = std::acosh(arg);
        double u = (r * r) / (s * s);
        double omu = 1.0 - u;
        if (phi_out) *phi_out += A * omu * omu * omu;
        double fp_over_r = -6.0 * A / (s * s) * omu * omu; // f'(r)/r
        if (grad_out) {
            // grad r = grad(arg)/sinh(r); contribution f'(r) grad r
            cplx grad_arg =
                4.0 * one_mc / (D * D) * ((z - c) * one_mz + N * z);
            double sinh_r = std::sinh(r);
            double r_over_sinh = (r < 1e-8) ? 1.0 - r * r / 6.0 : r / sinh_r;
            *grad_out += (fp_over_r * r_over_sinh) * grad_arg;
        }
        if (lap_out) {
            double fpp = 6.0 * A / (s * s) * omu * (5.0 * u - 1.0);
            double r_coth = (r < 1e-8) ? 1.0 + r * r / 3.0 : r * std::cosh(r) / std::sinh(r);
            *lap_out += fpp + fp_over_r * r_coth;
        }
    }
}

double MetricModel::phi(cplx z) const {
    double p;
    bump_eval(z, &p, nullptr, nullptr);
    return p;
}

cplx MetricModel::grad_phi(cplx z) const {
    cplx g;
    bump_eval(z, nullptr, &g, nullptr);
    return g;
}

double MetricModel::lap_hyp_phi(cplx z) const {
    double l;
    bump_eval(z, nullptr, nullptr, &l);
    return l;
}

double MetricModel::curvature(cplx z) const {
    if (cfg_.kind != MetricKind::perturbed) return -1.0;
    double p, l;
    bump_eval(z, &p, nullptr, &l);
    return std::exp(-2.0 * p) * (-1.0 - l);
}

// -------------------- geodesic shooting --------------------

namespace {

struct OdeState {
    cplx pos;
    cplx dir; // euclidean velocity, unit ĝ-speed
};

} // namespace

double MetricModel::shoot_boundary_angle(cplx z, double v, double rk_step) const {
    if (cfg_.kind != MetricKind::perturbed)
        return visual_boundary(DiskPoint(z), v).theta;

    const BucketGrid& grid = bucket_grid_for(*this, centers_, support_);
    const double s = support_;
    const double cosh_s_m1 = std::cosh(s) - 1.0;

    auto inside_any = [&](cplx p) {
        double one_mp = 1.0 - std::norm(p);
        for (int ci : grid.candidates(p)) {
            cplx c = centers_[ci];
            double D = one_mp * (1.0 - std::norm(c));
            if (2.0 * std::norm(p - c) < cosh_s_m1 * D) return true;
        }
        return false;
    };

    // conformal geodesic ODE: pos' = dir, dir' = -2<grad s, dir> dir + |dir|^2 grad s,
    // s = log(lambda) + phi, ĝ-arclength parametrization
    auto accel = [&](cplx p, cplx d) {
        cplx gs = 2.0 * p / (1.0 - std::norm(p)) + grad_phi(p);
        double dot = gs.real() * d.real() + gs.imag() * d.imag();
        return -2.0 * dot * d + std::norm(d) * gs;
    };

    cplx pos = z;
    double angle = v;
    double total = 0;
    const double total_cap = 200.0;

    while (total < total_cap) {
        if (!inside_any(pos)) {
            // exact hyperbolic ray toward xi0; find the first support entry
            double theta0 = visual_boundary(DiskPoint(pos), angle).theta;
            cplx xiu = std::polar(1.0, theta0);
            double Th = visual_angle(pos, xiu);
            cplx rot = std::polar(1.0, -Th);
            double best_p = 2.0;
            for (const cplx& c : centers_) {
                cplx cp = rot * ((c - pos) / (1.0 - std::conj(pos) * c));
                double k = cosh_s_m1 * (1.0 - std::norm(cp)) / 2.0;
                double a = cp.real(), b = cp.imag();
                double disc = a * a - (1.0 + k) * (a * a + b * b - k);
                if (disc < 0) continue;
                double root = (a - std::sqrt(disc)) / (1.0 + k);
                if (root > 1e-12 && root < best_p) best_p = root;
            }
            if (best_p >= 1.0) return theta0; // escapes to the boundary untouched
            cplx e = std::polar(best_p, Th);
            pos = (e + pos) / (1.0 + std::conj(pos) * e);
            angle = visual_angle(pos, xiu);
            total += 2.0 * std::atanh(best_p);
        }
        // at least one RK4 step, then continue while inside a support
        cplx dir = std::polar(1.0 / conformal_mu(pos), angle);
        do {
            double h = rk_step;
            cplx k1p = dir, k1d = accel(pos, dir);
            cplx k2p = dir + 0.5 * h * k1d, k2d = accel(pos + 0.5 * h * k1p, dir + 0.5 * h * k1d);
            cplx k3p = dir + 0.5 * h * k2d, k3d = accel(pos + 0.5 * h * k2p, dir + 0.5 * h * k2d);
            cplx k4p = dir + h * k3d, k4d = accel(pos + h * k3p, dir + h * k3d);
            pos += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            dir += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            dir /= std::abs(dir) * conformal_mu(pos); // renormalize ĝ-speed
            total += h;
        } while (inside_any(pos) && total < total_cap);
        angle = std::atan2(dir.imag(), dir.real());
    }
    throw AuditError("shoot_boundary_angle: arclength cap exceeded");
}

ShootingResult MetricModel::metric_spray(DiskPoint z, BoundaryPoint xi) const {
    if (cfg_.kind != MetricKind::perturbed) {
        TangentVector t = spray(z, xi);
        return {t, 0.0, 0};
    }
    double target = xi.theta;
    double v0 = visual_angle(z, xi);
    // expand a bracket around the constant-curvature guess (boundary map is
    // monotone in v)
    auto err = [&](double v) { return wrap_diff(shoot_boundary_angle(z.z, v) - target); };
    double d = 0.02;
    double lo = v0 - d, hi = v0 + d;
    double flo = err(lo), fhi = err(hi);
    int expansions = 0;
    while (flo * fhi > 0 && expansions < 8) {
        d *= 2;
        lo = v0 - d;
        hi = v0 + d;
        flo = err(lo);
        fhi = err(hi);
        ++expansions;
    }
    if (flo * fhi > 0) throw PreconditionError("metric_spray: shooting_failed (no bracket)");
    int iter = 0;
    double fmid = 1;
    double mid = v0;
    for (; iter < 60; ++iter) {
        mid = (lo + hi) / 2;
        fmid = err(mid);
        if (flo * fmid <= 0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
        if (std::abs(fmid) < 1e-9) break;
    }
    if (std::abs(fmid) >= 1e-6)
        throw PreconditionError("metric_spray: shooting_failed (residual)");
    double len = 1.0 / conformal_mu(z.z);
    TangentVector t{z, len * std::cos(mid), len * std::sin(mid)};
    return {t, std::abs(fmid), iter};
}

// -------------------- drift table --------------------

static uint64_t table_hash(const MetricConfig& c, const SprayTable& t) {
    auto mix = [](uint64_t h, uint64_t v) { return mix64(h ^ v); };
    uint64_t h = 0x1eafd1ff00000003ULL;
    auto dbl = [](double x) {
        uint64_t u;
        std::memcpy(&u, &x, 8);
        return u;
    };
    h = mix(h, dbl(c.amplitude));
    h = mix(h, dbl(c.width));
    h = mix(h, static_cast<uint64_t>(c.cutoff));
    h = mix(h, static_cast<uint64_t>(t.nx));
    h = mix(h, static_cast<uint64_t>(t.nv));
    return h;
}

void MetricModel::ensure_drift_table() const {
    if (cfg_.kind != MetricKind::perturbed || table_) return;

    auto tab = std::make_shared<SprayTable>();
    tab->dx = 2.0 * (-tab->x0) / (tab->nx - 1);
    tab->off.assign((size_t)tab->nx * tab->ny * tab->nv, 0.0);

    namespace fs = std::filesystem;
    char name[64];
    std::snprintf(name, sizeof name, "leafdiff_spray_%016llx.bin",
                  static_cast<unsigned long long>(table_hash(cfg_, *tab)));
    fs::path cache = fs::temp_directory_path() / name;
    if (fs::exists(cache)) {
        std::ifstream in(cache, std::ios::binary);
        in.read(reinterpret_cast<char*>(tab->off.data()), tab->off.size() * sizeof(double));
        if (in.gcount() == static_cast<std::streamsize>(tab->off.size() * sizeof(double))) {
            table_ = tab;
            return;
        }
        tab->off.assign(tab->off.size(), 0.0);
    }

    const int nv = tab->nv;
    const double dv = two_pi / nv;
    std::vector<double> fwd(nv); // forward offsets at one node
    for (int j = 0; j < tab->ny; ++j) {
        for (int i = 0; i < tab->nx; ++i) {
            cplx z(tab->node_x(i), tab->node_x(j));
            if (std::abs(z) > 0.96) continue; // never reached by in-domain stencils
            for (int k = 0; k < nv; ++k) {
                double v = k * dv;
                fwd[k] = wrap_diff(shoot_boundary_angle(z, v, 4e-3) -
                                   visual_boundary(DiskPoint(z), v).theta);
            }
            // lifted forward map F(v) = visual_lift(v) + fwd_cr(v); invert at
            // each theta node by bisection inside the bracketing v-cell
            auto fwd_cr = [&](double v) {
                double ft = wrap_angle(v) / dv;
                int k = static_cast<int>(std::floor(ft)) % nv;
                double t = ft - std::floor(ft);
                return SprayTable::cr1(fwd[(k - 1 + nv) % nv], fwd[k], fwd[(k + 1) % nv],
                                       fwd[(k + 2) % nv], t);
            };
            auto F = [&](double v) { return visual_boundary_lift(z, v) + fwd_cr(v); };
            std::vector<double> Fn(nv + 1);
            for (int k = 0; k < nv; ++k) Fn[k] = F(k * dv);
            Fn[nv] = Fn[0] + two_pi;
            for (int m = 0; m < nv; ++m) {
                double target = m * dv;
                while (target < Fn[0]) target += two_pi;
                while (target >= Fn[nv]) target -= two_pi;
                int k = 0;
                while (k < nv - 1 && Fn[k + 1] < target) ++k;
                double lo = k * dv, hi = (k + 1) * dv;
                double Flo = Fn[k];
                for (int it = 0; it < 52; ++it) {
                    double mid = (lo + hi) / 2;
                    double fm = F(mid);
                    // F is continuous on [lo, hi]; compare on the same lift
                    while (fm < Flo - pi) fm += two_pi;
                    while (fm > Flo + two_pi + pi) fm -= two_pi;
                    if (fm < target) {
                        lo = mid;
                        Flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                double vstar = (lo + hi) / 2;
                double vhyp = visual_angle(z, std::polar(1.0, target));
                tab->off[(size_t)j * tab->nx * nv + (size_t)i * nv + m] =
                    wrap_diff(vstar - vhyp);
            }
        }
    }

    fs::path tmp = cache;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(tab->off.data()), tab->off.size() * sizeof(double));
    out.close();
    std::error_code ec;
    fs::rename(tmp, cache, ec); // best effort
    table_ = tab;
}

bool MetricModel::drift_table_ready() const {
    return cfg_.kind != MetricKind::perturbed || static_cast<bool>(table_);
}

double MetricModel::spray_angle(cplx z, double theta_xi) const {
    if (cfg_.kind != MetricKind::perturbed) return visual_angle(z, std::polar(1.0, theta_xi));
    if (!in_fundamental_domain(group_, DiskPoint(z))) {
        // reduce the query and transport the direction back
        ReducedState st = reduce(group_, LineElement{DiskPoint(z), BoundaryPoint(theta_xi)});
        double a = spray_angle(st.element.x.z, st.element.xi.theta);
        MobiusMap back = st.applied.inverse();
        cplx d = back.deriv(st.element.x.z);
        return wrap_angle(a + std::atan2(d.imag(), d.real()));
    }
    ensure_drift_table();
    double vhyp = visual_angle(z, std::polar(1.0, theta_xi));
    return wrap_angle(vhyp + table_->at(z.real(), z.imag(), theta_xi));
}

cplx MetricModel::spray_vec(cplx z, double theta_xi) const {
    double a = spray_angle(z, theta_xi);
    return std::polar(1.0 / conformal_mu(z), a);
}

// -------------------- audits --------------------

MetricModel::CurvatureAudit MetricModel::curvature_audit(int n_points) const {
    CurvatureAudit audit;
    audit.kmin = 1e300;
    audit.kmax = -1e300;
    double box = std::tanh(group_.octagon_vertex_radius / 2);
    int found = 0;
    for (uint64_t i = 0; found < n_points && i < static_cast<uint64_t>(n_points) * 8; ++i) {
        double u, v;
        r2_point(i, u, v);
        cplx z((2 * u - 1) * box, (2 * v - 1) * box);
        if (!in_fundamental_domain(group_, DiskPoint(z))) continue;
        ++found;
        double K = curvature(z);
        audit.kmin = std::min(audit.kmin, K);
        audit.kmax = std::max(audit.kmax, K);
    }
    audit.pass = audit.kmax < -0.05;
    return audit;
}

double MetricModel::volume_entropy_gate() const {
    if (cfg_.kind != MetricKind::perturbed) return 1.0;
    if (gate_ == 0) gate_ = volume_entropy_estimate(0x9a7e5eedULL, 200000);
    return gate_;
}

double MetricModel::volume_entropy_estimate(uint64_t seed, int n_samples) const {
    const double R = 9.0;
    const double coshR_m1 = std::cosh(R) - 1.0;
    const double total_area = two_pi * coshR_m1;
    const int nr = 9;
    double radii[nr];
    for (int k = 0; k < nr; ++k) radii[k] = 4.0 + 4.0 * k / (nr - 1);

    NoiseStream u{derive_seed(seed, 77)};
    std::vector<double> vol(nr, 0.0);
    for (int i = 0; i < n_samples; ++i) {
        double r = std::acosh(1.0 + u.uniform(2 * i) * coshR_m1);
        double a = two_pi * u.uniform(2 * i + 1);
        double dg = r, weight = 1.0;
        if (cfg_.kind == MetricKind::perturbed) {
            // coarse g-distance: length of the hyperbolic geodesic in g
            cplx dirz = std::polar(1.0, a);
            int nseg = std::max(8, static_cast<int>(r / 0.25));
            double acc = 0;
            for (int q = 0; q < nseg; ++q) {
                double t = r * (q + 0.5) / nseg;
                acc += std::exp(phi(std::tanh(t / 2) * dirz)) * (r / nseg);
            }
            dg = acc;
            weight = std::exp(2.0 * phi(std::tanh(r / 2) * dirz));
        }
        for (int k = 0; k < nr; ++k)
            if (dg <= radii[k]) vol[k] += weight;
    }
    // least-squares slope of log(vol) against r
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < nr; ++k) {
        double y = std::log(std::max(1e-300, vol[k] * total_area / n_samples));
        sx += radii[k];
        sy += y;
        sxx += radii[k] * radii[k];
        sxy += radii[k] * y;
    }
    return (nr * sxy - sx * sy) / (nr * sxx - sx * sx);
}

} // namespace leafdiff
