#include <doctest.h>

#include <cmath>

#include "leafdiff/audit.hpp"
#include "leafdiff/metric.hpp"
#include "leafdiff/rng.hpp"

using namespace leafdiff;

namespace {
constexpr double pi = 3.14159265358979323846264338328;

MetricConfig perturbed_cfg(double A = 0.1, double w = 0.5, int L = 3) {
    return MetricConfig{MetricKind::perturbed, A, w, L};
}
} // namespace

TEST_CASE("curvature") {
    FuchsianGroup G = build_octagon_group();
    MetricModel Mc(G, MetricConfig{});
    CHECK(Mc.curvature(cplx(0.3, 0.2)) == -1.0);

    MetricModel M0(G, perturbed_cfg(0.0));
    CHECK(std::abs(M0.curvature(cplx(0.2, -0.4)) + 1.0) < 1e-12);

    MetricModel M(G, perturbed_cfg());
    auto audit = M.curvature_audit();
    CHECK(audit.pass);
    CHECK(audit.kmax < -0.05);
    CHECK(audit.kmin > -3.0);

    // a large perturbation destroys negativity
    MetricModel Mbig(G, perturbed_cfg(5.0));
    auto bad = Mbig.curvature_audit();
    CHECK_FALSE(bad.pass);
    CHECK(bad.kmax >= 0.0);

    // Gauss-Bonnet for the perturbed metric: ∫ K dA_g = -4 pi
    double gb = octagon_integral(G, [&](cplx z) {
        double l = conformal_lambda(z);
        return M.curvature(z) * l * l * std::exp(2 * M.phi(z));
    }, 64);
    CHECK(std::abs(gb + 4 * pi) < 1e-3);
}

TEST_CASE("phi invariance and derivatives") {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, perturbed_cfg());

    NoiseStream u{5};
    for (uint64_t i = 0; i < 20; ++i) {
        cplx z = std::polar(0.8 * u.uniform(3 * i), two_pi * u.uniform(3 * i + 1));
        if (!in_fundamental_domain(G, DiskPoint(z))) continue;
        int gi = static_cast<int>(8 * u.uniform(3 * i + 2)) % 8;
        cplx gz = G.gens[gi].apply(z);
        CHECK(std::abs(M.phi(z) - M.phi(gz)) < 1e-6);
        // curvature invariance too
        CHECK(std::abs(M.curvature(z) - M.curvature(gz)) < 1e-6);
    }

    // analytic gradient and laplacian vs finite differences
    cplx z(0.21, -0.13);
    double h = 1e-6;
    cplx g = M.grad_phi(z);
    double gx = (M.phi(z + h) - M.phi(z - h)) / (2 * h);
    double gy = (M.phi(z + cplx(0, h)) - M.phi(z - cplx(0, h))) / (2 * h);
    CHECK(std::abs(g.real() - gx) < 1e-7);
    CHECK(std::abs(g.imag() - gy) < 1e-7);

    double lap_e = (M.phi(z + h) + M.phi(z - h) + M.phi(z + cplx(0, h)) + M.phi(z - cplx(0, h)) -
                    4 * M.phi(z)) /
                   (h * h);
    double lam = conformal_lambda(z);
    CHECK(std::abs(M.lap_hyp_phi(z) - lap_e / (lam * lam)) < 2e-3);
}

TEST_CASE("liouville_weight") {
    FuchsianGroup G = build_octagon_group();
    MetricModel Mc(G, MetricConfig{});
    CHECK(std::abs(Mc.liouville_weight(cplx(0, 0)) - 4.0) < 1e-14);
    CHECK(std::abs(Mc.liouville_weight(cplx(0.5, 0)) - (2.0 / 0.75) * (2.0 / 0.75)) < 1e-12);

    MetricModel M0(G, perturbed_cfg(0.0));
    CHECK(std::abs(M0.liouville_weight(cplx(0.3, 0.3)) - Mc.liouville_weight(cplx(0.3, 0.3))) <
          1e-12);
}

TEST_CASE("metric_spray shooting") {
    FuchsianGroup G = build_octagon_group();

    // A = 0 agrees with the closed form
    MetricModel M0(G, perturbed_cfg(0.0));
    DiskPoint z(0.25, 0.1);
    BoundaryPoint xi(1.2);
    auto sr = M0.metric_spray(z, xi);
    TangentVector exact = spray(z, xi);
    CHECK(std::abs(sr.direction.vx - exact.vx) < 1e-5);
    CHECK(std::abs(sr.direction.vy - exact.vy) < 1e-5);
    CHECK(sr.residual < 1e-6);

    // constant model delegates exactly
    MetricModel Mc(G, MetricConfig{});
    auto sc = Mc.metric_spray(z, xi);
    CHECK(sc.direction.vx == exact.vx);
    CHECK(sc.direction.vy == exact.vy);

    // perturbed: residual small, re-shooting the returned direction lands on xi
    MetricModel M(G, perturbed_cfg());
    auto sp = M.metric_spray(z, xi);
    CHECK(sp.residual < 1e-6);
    double v = std::atan2(sp.direction.vy, sp.direction.vx);
    double back = M.shoot_boundary_angle(z.z, v);
    CHECK(std::abs(std::remainder(back - xi.theta, two_pi)) < 1e-4);

    // g-unit length: euclidean norm = 1/(lambda e^phi)
    double len = std::hypot(sp.direction.vx, sp.direction.vy);
    CHECK(std::abs(len * M.conformal_mu(z.z) - 1.0) < 1e-12);
}

TEST_CASE("spray continuity in xi") {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, perturbed_cfg());
    DiskPoint z(0.3, -0.2);
    double dth = 1e-3;
    for (double th : {0.5, 2.0, 4.4}) {
        auto a = M.metric_spray(z, BoundaryPoint(th));
        auto b = M.metric_spray(z, BoundaryPoint(th + dth));
        double da = std::atan2(a.direction.vy, a.direction.vx);
        double db = std::atan2(b.direction.vy, b.direction.vx);
        double lip = std::abs(std::remainder(db - da, two_pi)) / dth;
        CHECK(lip < 50.0); // empirical Lipschitz bound, audited at bring-up
    }
}

TEST_CASE("drift table vs exact shooting") {
    FuchsianGroup G = build_octagon_group();
    MetricModel M(G, perturbed_cfg());
    M.ensure_drift_table();
    CHECK(M.drift_table_ready());

    NoiseStream u{31};
    double worst = 0;
    for (uint64_t i = 0; i < 12; ++i) {
        cplx z = std::polar(0.7 * u.uniform(3 * i), two_pi * u.uniform(3 * i + 1));
        if (!in_fundamental_domain(G, DiskPoint(z))) continue;
        double th = two_pi * u.uniform(3 * i + 2);
        double fast = M.spray_angle(z, th);
        auto exact = M.metric_spray(DiskPoint(z), BoundaryPoint(th));
        double ve = std::atan2(exact.direction.vy, exact.direction.vx);
        worst = std::max(worst, std::abs(std::remainder(fast - ve, two_pi)));
    }
    CHECK(worst < 3e-3);

    // equivariance of the table-backed evaluator (reduces internally)
    cplx z(0.2, 0.1);
    double th = 0.7;
    cplx gz = G.gens[2].apply(z);
    double gth = mobius_boundary(G.gens[2], BoundaryPoint(th)).theta;
    cplx v1 = M.spray_vec(z, th);
    cplx v2 = M.spray_vec(gz, gth);
    cplx dv1 = G.gens[2].deriv(z) * v1;
    CHECK(std::abs(dv1 - v2) < 1e-9);
}

TEST_CASE("volume entropy") {
    FuchsianGroup G = build_octagon_group();
    MetricModel Mc(G, MetricConfig{});
    double v = Mc.volume_entropy_estimate(1234);
    CHECK(v == doctest::Approx(1.0).epsilon(0.05));

    MetricModel M(G, perturbed_cfg());
    double vp = M.volume_entropy_estimate(1234, 200000);
    CHECK(vp > 0.8);
    CHECK(vp < 1.3);
    CHECK(Mc.volume_entropy_gate() == 1.0);
}
