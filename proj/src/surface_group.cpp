#include "leafdiff/surface_group.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "leafdiff/errors.hpp"

namespace leafdiff {

namespace {

constexpr double pi = 3.14159265358979323846264338328;

// direction angle at z of the geodesic from z to w
double direction_to(cplx z, cplx w) {
    cplx q = (w - z) / (1.0 - std::conj(z) * w);
    return std::atan2(q.imag(), q.real());
}

// interior angle at vertex v0 between geodesics to its two neighbours
double vertex_angle(cplx v0, cplx vprev, cplx vnext) {
    double a1 = direction_to(v0, vprev);
    double a2 = direction_to(v0, vnext);
    double d = wrap_angle(a1 - a2);
    return std::min(d, two_pi - d);
}

double interior_angle_for_radius(double rv) {
    double re = std::tanh(rv / 2);
    cplx v0 = std::polar(re, pi / 8);
    cplx vn = std::polar(re, pi / 8 + pi / 4);
    cplx vp = std::polar(re, pi / 8 - pi / 4);
    return vertex_angle(v0, vp, vn);
}

// 2x2 complex matrix just for generator construction
struct C22 {
    cplx m00, m01, m10, m11;
    C22 operator*(const C22& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    C22 conj_entries() const {
        return {std::conj(m00), std::conj(m01), std::conj(m10), std::conj(m11)};
    }
};

C22 rot22(double t) {
    return {std::polar(1.0, t / 2), 0.0, 0.0, std::polar(1.0, -t / 2)};
}

// side pairing carrying side j_from onto side k_to (sides at directions
// k*pi/4), as the composition sigma_side(k_to) o sigma_diameter applied to
// conj(z); the product of the two anti-maps is holomorphic
MobiusMap pairing_map(int j_from, int k_to, double side_r0) {
    double C = (side_r0 + 1.0 / side_r0) / 2;
    double alpha = k_to * pi / 4;
    double beta = (j_from + k_to) * pi / 8;
    C22 K{C, -1.0, 1.0, -C};
    C22 P = rot22(alpha) * K * rot22(alpha) * rot22(2 * beta).conj_entries();
    // bring s*P to the form [[a, b], [conj b, conj a]], det 1
    cplx ratio = std::conj(P.m00) / P.m11;
    cplx s = std::polar(1.0, std::arg(ratio) / 2);
    cplx a = s * P.m00, b = s * P.m01;
    double sc = std::sqrt(std::abs(std::norm(a) - std::norm(b)));
    return MobiusMap{a / sc, b / sc};
}

} // namespace

FuchsianGroup build_octagon_group() {
    // vertex radius: bisect interior angle to pi/4
    double lo = 1.0, hi = 4.0;
    if (!(interior_angle_for_radius(lo) > pi / 4 && interior_angle_for_radius(hi) < pi / 4))
        throw AuditError("octagon root-find: bracket failed");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double mid = (lo + hi) / 2;
        (interior_angle_for_radius(mid) > pi / 4 ? lo : hi) = mid;
    }
    double rv = (lo + hi) / 2;

    FuchsianGroup G;
    G.octagon_vertex_radius = rv;
    // right triangle (center, side midpoint, vertex): tanh(p) = tanh(rv) cos(pi/8)
    G.side_distance = std::atanh(std::tanh(rv) * std::cos(pi / 8));
    double r0 = std::tanh(G.side_distance / 2);

    // canonical pairing: relation g1 g2 g1^-1 g2^-1 g3 g4 g3^-1 g4^-1 = +I
    MobiusMap g1 = pairing_map(2, 0, r0);
    MobiusMap g2 = pairing_map(3, 1, r0).inverse();
    MobiusMap g3 = pairing_map(6, 4, r0);
    MobiusMap g4 = pairing_map(7, 5, r0).inverse();
    G.gens = {g1, g2, g3, g4, g1.inverse(), g2.inverse(), g3.inverse(), g4.inverse()};
    for (int i = 0; i < 8; ++i) G.mirror[i] = G.gens[i].apply(cplx(0, 0));
    return G;
}

MobiusMap FuchsianGroup::relation_product() const {
    const MobiusMap &g1 = gens[0], &g2 = gens[1], &g3 = gens[2], &g4 = gens[3];
    MobiusMap w = g1;
    for (const MobiusMap& m : {g2, g1.inverse(), g2.inverse(), g3, g4, g3.inverse(), g4.inverse()})
        w = w.compose(m).normalized();
    return w;
}

std::array<cplx, 8> FuchsianGroup::vertices() const {
    std::array<cplx, 8> v;
    double re = std::tanh(octagon_vertex_radius / 2);
    for (int k = 0; k < 8; ++k) v[k] = std::polar(re, pi / 8 + k * pi / 4);
    return v;
}

bool in_fundamental_domain(const FuchsianGroup& G, DiskPoint z, double tol) {
    if (!(std::norm(z.z) < 1.0)) return false; // also rejects NaN
    double d0 = hyp_dist(z.z, cplx(0, 0));
    for (int i = 0; i < 8; ++i) {
        if (d0 > hyp_dist(z.z, G.mirror[i]) + tol) return false;
    }
    return true;
}

ReducedState reduce(const FuchsianGroup& G, const LineElement& v) {
    if (!(std::norm(v.x.z) < 1.0))
        throw PreconditionError("reduce: point outside the disk");
    ReducedState st{v, MobiusMap::identity(), 0};
    while (!in_fundamental_domain(G, st.element.x)) {
        double best = hyp_dist(st.element.x.z, cplx(0, 0));
        int pick = -1;
        for (int i = 0; i < 8; ++i) {
            double d = hyp_dist(G.gens[i].apply(st.element.x.z), cplx(0, 0));
            if (d < best - 1e-14) { // ties go to the lowest index
                best = d;
                pick = i;
            }
        }
        if (pick < 0)
            throw BudgetExceeded("reduce: no generator decreases distance (boundary tie)");
        st.element.x = mobius_apply(G.gens[pick], st.element.x);
        st.element.xi = mobius_boundary(G.gens[pick], st.element.xi);
        st.applied = G.gens[pick].compose(st.applied).normalized();
        if (++st.word_length > G.max_word_budget)
            throw BudgetExceeded("reduce: word budget exceeded");
    }
    return st;
}

double octagon_interior_angle(const FuchsianGroup& G) {
    auto v = G.vertices();
    return vertex_angle(v[0], v[7], v[1]);
}

std::vector<MobiusMap> enumerate_words(const FuchsianGroup& G, int L) {
    std::vector<MobiusMap> all{MobiusMap::identity()};
    std::vector<MobiusMap> frontier = all;
    auto seen = [&all](const MobiusMap& m) {
        cplx z = m.apply(cplx(0, 0));
        for (const MobiusMap& o : all) {
            if (std::abs(o.apply(cplx(0, 0)) - z) < 1e-9 &&
                std::abs(o.deriv(cplx(0, 0)) - m.deriv(cplx(0, 0))) < 1e-9)
                return true;
        }
        return false;
    };
    for (int l = 0; l < L; ++l) {
        std::vector<MobiusMap> next;
        for (const MobiusMap& w : frontier) {
            for (const MobiusMap& g : G.gens) {
                MobiusMap m = g.compose(w).normalized();
                if (!seen(m)) {
                    all.push_back(m);
                    next.push_back(m);
                }
            }
        }
        frontier = std::move(next);
    }
    return all;
}

} // namespace leafdiff
