#include <doctest.h>

#include <cmath>

#include "leafdiff/errors.hpp"
#include "leafdiff/measure.hpp"

using namespace leafdiff;

namespace {

struct Fixture {
    FuchsianGroup G = build_octagon_group();
    MetricModel M{G, MetricConfig{}};
};

} // namespace

TEST_CASE("liouville_reference") {
    Fixture F;
    Grid3D g{16, 16, 8, 0.85};
    Histogram3D ref = liouville_reference(F.M, g);

    double total = 0;
    for (double m : ref.normalized()) total += m;
    CHECK(std::abs(total - 1.0) < 1e-12);

    // v-marginal exactly uniform
    std::vector<double> marg(g.nv, 0.0);
    auto p = ref.normalized();
    for (size_t i = 0; i < p.size(); ++i) marg[i % g.nv] += p[i];
    for (int k = 0; k < g.nv; ++k) CHECK(std::abs(marg[k] - 1.0 / g.nv) < 1e-12);

    // masked-cell area should approximate the octagon area when weighted by
    // 1/lambda^2... instead check total mass against the analytic Liouville
    // normalization: sum over cells of ∫ lambda^2 = 4 pi
    CHECK(std::abs(ref.total - 4 * 3.14159265358979323846) < 0.02);
}

TEST_CASE("quadrature refinement stability on interior cells") {
    Fixture F;
    Grid3D g{16, 16, 8, 0.85};
    double w = 2 * g.box / g.nx;

    // midpoint quadrature of an interior cell at two subsampling levels
    auto cell_mass = [&](int i, int j, int sub) {
        double m = 0;
        for (int b = 0; b < sub; ++b)
            for (int a = 0; a < sub; ++a) {
                cplx z(-g.box + (i + (a + 0.5) / sub) * w, -g.box + (j + (b + 0.5) / sub) * w);
                m += F.M.liouville_weight(z);
            }
        return m * (w * w) / (sub * sub);
    };
    // cells well inside the octagon
    for (auto [i, j] : {std::pair{8, 8}, {7, 9}, {9, 6}, {5, 8}}) {
        double m4 = cell_mass(i, j, 4), m8 = cell_mass(i, j, 8);
        // composite-midpoint limit at this cell size; measured ~2.4e-4
        CHECK(std::abs(m8 - m4) / m4 < 5e-4);
    }
}

TEST_CASE("histogram merge and distances") {
    Grid3D g{4, 4, 4, 0.85};
    Histogram3D a(g), b(g);
    for (auto& m : a.xy_mask) m = 1;
    for (auto& m : b.xy_mask) m = 1;
    a.add(0.1, 0.1, 0.3);
    a.add(-0.2, 0.4, 2.0);
    b.add(0.1, 0.1, 0.3);
    b.add(0.3, -0.3, 5.0);

    Histogram3D ab = a;
    ab.merge(b);
    Histogram3D ba = b;
    ba.merge(a);
    for (size_t i = 0; i < ab.mass.size(); ++i) CHECK(ab.mass[i] == ba.mass[i]);
    CHECK(ab.total == ba.total);

    CHECK(tv_distance(a, a) == 0.0);

    Histogram3D c(g), d(g);
    for (auto& m : c.xy_mask) m = 1;
    for (auto& m : d.xy_mask) m = 1;
    c.add(0.1, 0.1, 0.3);
    d.add(-0.4, -0.4, 3.0);
    CHECK(tv_distance(c, d) == 1.0);

    Grid3D g2{5, 4, 4, 0.85};
    Histogram3D e(g2);
    CHECK_THROWS_AS(tv_distance(a, e), PreconditionError);
}

TEST_CASE("quasi random states") {
    Fixture F;
    auto states = quasi_random_states(F.G, 64, 11);
    CHECK(states.size() == 64);
    for (const auto& s : states) CHECK(in_fundamental_domain(F.G, s.x));
}

TEST_CASE("run_stationary preconditions") {
    Fixture F;
    RunConfig rc;
    rc.n_traj = 2;
    rc.n_steps = 100;
    rc.burn_in = 25.0;

    FlowParams bad = FlowParams::from_rho(2.0, &F.M); // above V = 1
    CHECK_THROWS_AS(run_stationary(bad, rc), PreconditionError);

    FlowParams ok = FlowParams::from_rho(-4.0, &F.M); // burn-in longer than run
    CHECK_THROWS_AS(run_stationary(ok, rc), PreconditionError);

    // rho = 0.5 < V = 1 is accepted
    FlowParams half = FlowParams::from_rho(0.5, &F.M, 1.0);
    RunConfig rc2;
    rc2.n_traj = 2;
    rc2.burn_in = 20.0;
    rc2.n_steps = 2200;
    rc2.sample_every = 10;
    rc2.master_seed = 3;
    StationaryResult r = run_stationary(half, rc2);
    CHECK(r.n_retained > 0);
}

TEST_CASE("stationary histogram close to Liouville") {
    Fixture F;
    FlowParams p = FlowParams::from_rho(-4.0, &F.M, 1.0); // h = 1e-2
    RunConfig rc;
    rc.n_traj = 16;
    rc.burn_in = 25.0;
    rc.sample_every = 100; // one time unit between retained samples
    rc.n_steps = 2500 + 100 * 12000;
    rc.master_seed = 123;
    rc.grid = Grid3D{16, 16, 8, 0.85};
    StationaryResult res = run_stationary(p, rc);
    CHECK(res.n_retained > 16 * 12000 * 0.98); // mask slivers drop a few samples
    CHECK(res.n_retained <= 16 * 12000.0);
    CHECK(res.tau >= 1.0);
    CHECK(res.tau <= 100.0);

    Histogram3D ref = liouville_reference(F.M, rc.grid);
    double tv = tv_distance(res.hist, ref);
    CHECK(tv < 0.12); // ~1.9e5 retained samples: noise floor ~0.04

    ChiSquare cs = chi_square(res.hist, ref, res.n_eff);
    CHECK(cs.z_std > 0.6);
    CHECK(cs.z_std < 1.6);

    // direction marginal uniform: chi-square within the 99% quantile
    ChiSquare dir = chi_square_direction(res.hist, res.n_eff_dir);
    CHECK(dir.dof == 7);
    CHECK(dir.statistic < 18.48);

    // merge order independence across trajectory partials is already exact
    // (integer counts); check determinism of the whole run instead
    StationaryResult res2 = run_stationary(p, rc);
    CHECK(tv_distance(res.hist, res2.hist) == 0.0);
}

TEST_CASE("doubling burn-in changes TV by less than the run-to-run floor") {
    Fixture F;
    FlowParams p = FlowParams::from_rho(-4.0, &F.M, 1.0);
    Histogram3D ref = liouville_reference(F.M, Grid3D{16, 16, 8, 0.85});

    RunConfig rc;
    rc.n_traj = 8;
    rc.sample_every = 100;
    rc.grid = Grid3D{16, 16, 8, 0.85};

    auto tv_with = [&](double burn_in, uint64_t seed) {
        RunConfig c = rc;
        c.burn_in = burn_in;
        c.n_steps = static_cast<long>(burn_in / p.step) + 100 * 4000;
        c.master_seed = seed;
        return tv_distance(run_stationary(p, c).hist, ref);
    };
    double tv_a = tv_with(25.0, 41);
    double tv_b = tv_with(50.0, 41);
    double floor_run = std::abs(tv_with(25.0, 42) - tv_a) + 0.01;
    CHECK(std::abs(tv_b - tv_a) < floor_run + 0.02);
}
