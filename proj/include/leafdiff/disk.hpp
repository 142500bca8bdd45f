#pragma once

// Exact geometry of the Poincaré disk model: isometries, distances,
// Busemann/Poisson functions, the geodesic spray, and the leafwise
// geodesic flow with its tangent map.
//
// Conventions: curvature -1, conformal factor lambda(z) = 2/(1-|z|^2),
// boundary points stored as angles, spray points toward xi, the reversed
// flow is t < 0.

#include <cmath>
#include <complex>

#include "leafdiff/mat2.hpp"

namespace leafdiff {

using cplx = std::complex<double>;

constexpr double two_pi = 6.283185307179586476925286766559;

inline double wrap_angle(double t) {
    t = std::fmod(t, two_pi);
    return t < 0 ? t + two_pi : t;
}

struct DiskPoint {
    cplx z{0.0, 0.0};
    DiskPoint() = default;
    DiskPoint(double re, double im) : z(re, im) {}
    explicit DiskPoint(cplx w) : z(w) {}
    double re() const { return z.real(); }
    double im() const { return z.imag(); }
};

struct BoundaryPoint {
    double theta = 0.0;
    BoundaryPoint() = default;
    explicit BoundaryPoint(double t) : theta(wrap_angle(t)) {}
    cplx unit() const { return {std::cos(theta), std::sin(theta)}; }
};

struct LineElement {
    DiskPoint x;
    BoundaryPoint xi;
};

struct TangentVector {
    DiskPoint at;
    double vx = 0, vy = 0;
    cplx vec() const { return {vx, vy}; }
};

// [[a, b], [conj b, conj a]] with |a|^2 - |b|^2 = 1
struct MobiusMap {
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};

    static MobiusMap identity() { return {}; }

    static MobiusMap translation(double t) { // 0 -> tanh(t/2) along real axis
        return {std::cosh(t / 2), std::sinh(t / 2)};
    }

    static MobiusMap rotation(double alpha) {
        return {std::polar(1.0, alpha / 2), cplx(0.0, 0.0)};
    }

    // z -> 0, with positive real derivative at z
    static MobiusMap to_origin(cplx z) {
        double s = std::sqrt(1.0 - std::norm(z));
        return {cplx(1.0 / s, 0.0), -z / s};
    }

    cplx apply(cplx z) const { return (a * z + b) / (std::conj(b) * z + std::conj(a)); }

    // complex derivative; |a|^2-|b|^2 = 1 so numerator is 1
    cplx deriv(cplx z) const {
        cplx d = std::conj(b) * z + std::conj(a);
        return 1.0 / (d * d);
    }

    MobiusMap inverse() const { return {std::conj(a), -b}; }

    MobiusMap compose(const MobiusMap& o) const { // this after o
        return {a * o.a + b * std::conj(o.b), a * o.b + b * std::conj(o.a)};
    }

    double det_defect() const { return std::abs((std::norm(a) - std::norm(b)) - 1.0); }

    MobiusMap normalized() const {
        double s = std::sqrt(std::norm(a) - std::norm(b));
        return {a / s, b / s};
    }
};

inline DiskPoint mobius_apply(const MobiusMap& m, DiskPoint z) {
    return DiskPoint(m.apply(z.z));
}

inline BoundaryPoint mobius_boundary(const MobiusMap& m, BoundaryPoint xi) {
    cplx w = m.apply(xi.unit());
    return BoundaryPoint(std::atan2(w.imag(), w.real()));
}

inline double conformal_lambda(cplx z) { return 2.0 / (1.0 - std::norm(z)); }

inline double hyp_dist(cplx z, cplx w) {
    double num = 2.0 * std::norm(z - w);
    double den = (1.0 - std::norm(z)) * (1.0 - std::norm(w));
    return std::acosh(1.0 + num / den);
}

inline double hyp_dist(DiskPoint z, DiskPoint w) { return hyp_dist(z.z, w.z); }

// |xi - z|^2 as (1-|z|)^2 + 4|z| sin^2(dtheta/2): sum of nonnegative terms,
// stable as z approaches the boundary point
inline double boundary_gap_sq(cplx z, double theta_xi) {
    double r = std::abs(z);
    if (r == 0.0) return 1.0;
    double arg = std::atan2(z.imag(), z.real());
    double s = std::sin((theta_xi - arg) / 2);
    double d = 1.0 - r;
    return d * d + 4.0 * r * s * s;
}

// Busemann function normalized so B(0, xi) = 0
inline double busemann(cplx z, double theta_xi) {
    return std::log(boundary_gap_sq(z, theta_xi) / (1.0 - std::norm(z)));
}

inline double busemann(DiskPoint z, BoundaryPoint xi) { return busemann(z.z, xi.theta); }

// Poisson kernel P = e^{-B} = (1-|z|^2)/|xi-z|^2
inline double poisson(cplx z, double theta_xi) {
    return (1.0 - std::norm(z)) / boundary_gap_sq(z, theta_xi);
}

inline double poisson(DiskPoint z, BoundaryPoint xi) { return poisson(z.z, xi.theta); }

// unit-modulus direction factor q = (xi - z)/(1 - conj(z) xi); its angle is
// the Euclidean angle of the spray at z, and q is exactly e^{i visual_angle}
inline cplx boundary_direction(cplx z, cplx xi_unit) {
    return (xi_unit - z) / (1.0 - std::conj(z) * xi_unit);
}

// g-unit tangent toward xi; Euclidean length (1-|z|^2)/2
inline cplx spray_complex(cplx z, cplx xi_unit) {
    return 0.5 * (1.0 - std::norm(z)) * boundary_direction(z, xi_unit);
}

inline TangentVector spray(DiskPoint z, BoundaryPoint xi) {
    cplx v = spray_complex(z.z, xi.unit());
    return {z, v.real(), v.imag()};
}

inline double visual_angle(cplx z, cplx xi_unit) {
    cplx q = boundary_direction(z, xi_unit);
    return wrap_angle(std::atan2(q.imag(), q.real()));
}

inline double visual_angle(DiskPoint z, BoundaryPoint xi) {
    return visual_angle(z.z, xi.unit());
}

// inverse of visual_angle: boundary point hit by the geodesic from z with
// initial direction angle v
inline BoundaryPoint visual_boundary(DiskPoint z, double v) {
    cplx e = std::polar(1.0, v);
    cplx xi = (e + z.z) / (1.0 + std::conj(z.z) * e);
    return BoundaryPoint(std::atan2(xi.imag(), xi.real()));
}

// One leafwise translation step: move hyperbolic length |u| from z in the
// direction (angle of u) measured in the (spray, spray-perp) frame, along
// the hyperbolic geodesic. kappa = tanh(|u|/2) * u/|u|. With kappa real
// this is the geodesic flow toward xi by t = 2 artanh(kappa).
inline cplx leaf_translate(cplx z, cplx xi_unit, cplx kappa) {
    cplx e = boundary_direction(z, xi_unit) * kappa;
    return (e + z) / (1.0 + std::conj(z) * e);
}

inline cplx frame_kappa(cplx u) {
    double au = std::abs(u);
    if (au == 0.0) return {0.0, 0.0};
    return std::tanh(au / 2) * (u / au);
}

// Wirtinger derivatives of leaf_translate in z (fixed kappa, fixed xi)
inline void leaf_translate_deriv(cplx z, cplx xi_unit, cplx kappa, cplx& Sz, cplx& Szb) {
    cplx d = 1.0 - std::conj(z) * xi_unit;
    cplx q = (xi_unit - z) / d;
    cplx qz = -1.0 / d;
    cplx qzb = q * xi_unit / d;
    cplx N = q * kappa + z;
    cplx D = 1.0 + std::conj(z) * q * kappa;
    cplx Nz = kappa * qz + 1.0;
    cplx Dz = std::conj(z) * kappa * qz;
    cplx Nzb = kappa * qzb;
    cplx Dzb = kappa * (q + std::conj(z) * qzb);
    Sz = (Nz * D - N * Dz) / (D * D);
    Szb = (Nzb * D - N * Dzb) / (D * D);
}

inline Mat2 jacobian_from_wirtinger(cplx Sz, cplx Szb) {
    cplx sum = Sz + Szb, dif = Sz - Szb;
    return {sum.real(), -dif.imag(), sum.imag(), dif.real()};
}

inline DiskPoint geodesic_flow_leaf(DiskPoint z, BoundaryPoint xi, double t) {
    cplx kappa(std::tanh(t / 2), 0.0);
    return DiskPoint(leaf_translate(z.z, xi.unit(), kappa));
}

// tangent map of the time-t leaf flow at z, in conformal g-orthonormal
// frames at both ends; singular values {1, e^{-t}}, log det = -t
inline Mat2 leaf_jacobian_exact(DiskPoint z, BoundaryPoint xi, double t) {
    cplx xiu = xi.unit();
    cplx kappa(std::tanh(t / 2), 0.0);
    cplx Sz, Szb;
    leaf_translate_deriv(z.z, xiu, kappa, Sz, Szb);
    cplx S = leaf_translate(z.z, xiu, kappa);
    double scale = conformal_lambda(S) / conformal_lambda(z.z);
    return jacobian_from_wirtinger(Sz, Szb) * scale;
}

} // namespace leafdiff
