#include <doctest.h>

#include "leafdiff/config.hpp"
#include "leafdiff/errors.hpp"

using namespace leafdiff;

TEST_CASE("config parse and canonical round trip") {
    ExperimentConfig cfg = parse_config_text(
        "# comment\n"
        "metric.kind = perturbed\n"
        "metric.amplitude = 0.2\n"
        "flow.rho = -8\n"
        "run.n_traj = 32\n"
        "seed = 42\n");
    CHECK(cfg.metric_kind == "perturbed");
    CHECK(cfg.amplitude == 0.2);
    CHECK(cfg.rho == -8.0);
    CHECK(cfg.n_traj == 32);
    CHECK(cfg.seed == 42);

    ExperimentConfig back = parse_config_text(cfg.canonical());
    CHECK(back.canonical() == cfg.canonical());
    CHECK(back.hash() == cfg.hash());
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_config_text("flow.rho = -4\nflow.epsilon = 0.5\n"), PreconditionError);
    CHECK_THROWS_AS(parse_config_text("run.n_traj = 0\n"), PreconditionError);
    CHECK_THROWS_AS(parse_config_text("run.grid_nx = 1\n"), PreconditionError);
    CHECK_THROWS_AS(parse_config_text("bogus.key = 1\n"), PreconditionError);
    CHECK_THROWS_AS(parse_config_text("flow.rho = abc\n"), PreconditionError);
}

TEST_CASE("epsilon parametrization") {
    ExperimentConfig cfg = parse_config_text("flow.epsilon = 0.5\n");
    CHECK(cfg.effective_rho() == -4.0);
    ExperimentConfig cfg0 = parse_config_text("flow.epsilon = 0\n");
    CHECK(cfg0.effective_rho() == -HUGE_VAL);
    ExperimentConfig cfgr = parse_config_text("flow.rho = -inf\n");
    CHECK(cfgr.effective_rho() == -HUGE_VAL);
}

TEST_CASE("config hash distinguishes settings") {
    ExperimentConfig a = parse_config_text("seed = 1\n");
    ExperimentConfig b = parse_config_text("seed = 2\n");
    CHECK(a.hash() != b.hash());
}
