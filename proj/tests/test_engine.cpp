#include <doctest.h>

#include <cmath>

#include "kmc/engine.hpp"
#include "kmc/oracles.hpp"

using namespace kmc;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.model = Model::sine_martingale(0.1, 0.1, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    cfg.test_function = cfg.model.default_test_function();
    cfg.quantity = Quantity::value;
    cfg.sampler = JumpLaw::beta_one(0.5, 1.0);
    cfg.samples = 20000;
    cfg.seed = 404;
    cfg.workers = 2;
    return cfg;
}

} // namespace

TEST_CASE("same seed gives identical reports") {
    const RunConfig cfg = small_config();
    const EstimateReport a = run(cfg);
    const EstimateReport b = run(cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.sample_variance == b.sample_variance);
}

TEST_CASE("worker layout does not change the report") {
    RunConfig cfg = small_config();
    cfg.samples = 30000;
    EstimateReport base;
    bool first = true;
    for (int workers : {1, 2, 3, 8}) {
        cfg.workers = workers;
        const EstimateReport r = run(cfg);
        if (first) {
            base = r;
            first = false;
        } else {
            CHECK(r.mean == base.mean);
            CHECK(r.sample_variance == base.sample_variance);
        }
    }
}

TEST_CASE("welford merge is exact for any chunking") {
    Rng rng(99, 0);
    std::vector<double> xs(5000);
    for (auto& x : xs) x = rng.normal() * 3.0 + 1.0;
    Welford whole;
    for (double x : xs) whole.add(x);
    for (std::size_t cut1 : {1u, 17u, 2500u, 4999u}) {
        for (std::size_t cut2 : {2501u, 3000u, 4999u}) {
            if (cut2 <= cut1) continue;
            Welford a, b, c;
            for (std::size_t i = 0; i < cut1; ++i) a.add(xs[i]);
            for (std::size_t i = cut1; i < cut2; ++i) b.add(xs[i]);
            for (std::size_t i = cut2; i < xs.size(); ++i) c.add(xs[i]);
            Welford m = a;
            m.merge(b);
            m.merge(c);
            CHECK(m.count == whole.count);
            CHECK(m.mean == doctest::Approx(whole.mean).epsilon(1e-13));
            CHECK(m.variance() == doctest::Approx(whole.variance()).epsilon(1e-12));
        }
    }
}

TEST_CASE("estimates match the constant-model oracle") {
    RunConfig cfg;
    cfg.model = Model::constant(1.0, 0.0, 1.0, 1.0);
    cfg.test_function = TestFunction::quadratic_above(0.0);
    cfg.quantity = Quantity::value;
    cfg.sampler = JumpLaw::exponential(2.0);
    cfg.samples = 100000;
    cfg.seed = 11;
    cfg.workers = 4;
    const EstimateReport rep = run(cfg);
    const oracles::KilledBmOracle oracle{1.0, 0.0, 1.0, 1.0};
    CHECK(std::abs(rep.mean - oracle.value(cfg.test_function.value)) <= 4.0 * rep.std_error);
}

TEST_CASE("pilot selects a finite-variance minimizer; empty pilot keeps grid order") {
    RunConfig cfg = small_config();
    cfg.samples = 2000;
    const std::vector<JumpLaw> grid = {JumpLaw::exponential(0.5), JumpLaw::exponential(1.0),
                                       JumpLaw::exponential(2.0)};
    const PilotResult pr = pilot_tune(cfg, grid, 5000);
    CHECK(pr.variances.size() == 3);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [spec, var] : pr.variances) {
        CHECK(std::isfinite(var));
        best = std::min(best, var);
    }
    bool chosen_is_best = false;
    for (const auto& [spec, var] : pr.variances)
        if (spec == pr.chosen.spec() && var == best) chosen_is_best = true;
    CHECK(chosen_is_best);

    const PilotResult none = pilot_tune(cfg, grid, 0);
    CHECK(none.chosen.spec() == grid.front().spec());
    CHECK(!none.note.empty());
}

TEST_CASE("beta sampling at the variance-taming exponent beats exponential sampling") {
    RunConfig cfg;
    cfg.model = Model::sine_martingale(0.3, 0.3, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    cfg.test_function = cfg.model.default_test_function();
    cfg.quantity = Quantity::ibp;
    cfg.samples = 40000;
    cfg.seed = 7;
    cfg.workers = 4;
    cfg.sampler = JumpLaw::beta_one(0.5, 1.0);
    const double beta_var = run(cfg).sample_variance;
    cfg.sampler = JumpLaw::exponential(2.0);
    const double exp_var = run(cfg).sample_variance;
    CHECK(beta_var < exp_var);
}

TEST_CASE("benchmark cell under variance-taming beta sampling") {
    RunConfig cfg;
    cfg.model = Model::sine_martingale(0.1, 0.1, 0.0, 1.0, 1.0, 0.0, 0.5, 1.0);
    cfg.test_function = cfg.model.default_test_function();
    cfg.quantity = Quantity::value;
    cfg.sampler = JumpLaw::beta_one(0.5, 1.5);
    cfg.samples = 100000;
    cfg.seed = 2026;
    cfg.workers = 4;
    const EstimateReport rep = run(cfg);
    CHECK(std::abs(rep.mean - 2.0) <= rep.ci95_halfwidth);
    CHECK(rep.sample_variance >= 7.5);
    CHECK(rep.sample_variance <= 22.5);
}

TEST_CASE("mean absolute deviation second pass") {
    RunConfig cfg = small_config();
    cfg.samples = 5000;
    cfg.collect_mean_abs_dev = true;
    const EstimateReport rep = run(cfg);
    CHECK(std::isfinite(rep.mean_abs_dev));
    CHECK(rep.mean_abs_dev >= 0.0);
    CHECK(rep.mean_abs_dev <= std::sqrt(rep.sample_variance) * 1.5);
}

TEST_CASE("invalid engine configuration is rejected") {
    RunConfig cfg = small_config();
    cfg.samples = 0;
    CHECK_THROWS_AS(run(cfg), contract_violation);
    cfg.samples = 10;
    cfg.workers = 0;
    CHECK_THROWS_AS(run(cfg), contract_violation);
}
