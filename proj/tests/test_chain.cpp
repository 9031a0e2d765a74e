#include <doctest.h>

#include <cmath>

#include "kmc/chain.hpp"
#include "kmc/rng.hpp"

using namespace kmc;

namespace {

Path fixed_path(double T, std::vector<double> times, std::vector<double> gaussians,
                std::vector<int> rhos) {
    Path p;
    p.T = T;
    p.times = std::move(times);
    p.n_jumps = static_cast<int>(p.times.size());
    p.gaussians = std::move(gaussians);
    p.bernoullis = std::move(rhos);
    return p;
}

} // namespace

TEST_CASE("one reflected and one plain step") {
    const Model m = Model::constant(1.0, 0.0, 1.0, 1.0);
    // dt = 1 so the stored standard normal is the raw increment
    const Path down = fixed_path(1.0, {}, {0.3}, {0});
    const ChainState cd = propagate(m, down);
    CHECK(cd.states[1] == doctest::Approx(-0.7));
    CHECK(!cd.alive[1]);
    CHECK(cd.first_death == 1);

    const Path up = fixed_path(1.0, {}, {0.3}, {1});
    const ChainState cu = propagate(m, up);
    CHECK(cu.states[1] == doctest::Approx(1.3));
    CHECK(cu.alive[1]);
    CHECK(cu.first_death == -1);
}

TEST_CASE("increment reconstruction from the states") {
    const Model m = Model::sine_martingale(0.2, 0.2, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0);
    Rng rng(21, 3);
    const JumpLaw law = JumpLaw::exponential(2.0);
    for (int rep = 0; rep < 50; ++rep) {
        Rng r(21, static_cast<std::uint64_t>(rep));
        const Path p = sample_path(law, 1.0, r);
        const ChainState c = propagate(m, p);
        for (int i = 1; i <= p.n_jumps + 1; ++i) {
            const Step s = make_step(m, p, c, i);
            const double reflected = s.rho ? s.x_prev : 2.0 * m.L - s.x_prev;
            const double z = (s.x_next - reflected) / s.sigma_prev;
            CHECK(z == doctest::Approx(s.z).epsilon(1e-13));
        }
    }
    (void)rng;
}

TEST_CASE("flipping the Bernoulli sign reflects the next state") {
    const Model m = Model::sine_martingale(0.3, 0.3, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0);
    const double x = 0.8, z = -0.41;
    const double sp = m.sigma(x).value();
    const double up = step_state(x, 1, m.L, sp, z);
    const double dn = step_state(x, 0, m.L, sp, z);
    CHECK(dn == doctest::Approx(2.0 * m.L - up + 2.0 * sp * z).epsilon(1e-14));
    // with the same increment removed, the reflection is exact
    CHECK(step_state(x, 0, m.L, sp, 0.0) == doctest::Approx(2.0 * m.L - x));
}

TEST_CASE("all-up path with constant sigma reproduces x + sigma W") {
    const Model m = Model::constant(0.7, 0.0, 2.0, 1.5);
    const Path p = fixed_path(2.0, {0.5, 1.2}, {0.3, -0.8, 1.1}, {1, 1, 1});
    const ChainState c = propagate(m, p);
    double w = 0.0;
    for (int i = 1; i <= 3; ++i) {
        w += std::sqrt(p.dt(i)) * p.gaussians[static_cast<std::size_t>(i - 1)];
        CHECK(c.states[static_cast<std::size_t>(i)] == doctest::Approx(1.5 + 0.7 * w));
    }
}

TEST_CASE("flow derivatives: trivial and finite-difference checks") {
    const Model mc = Model::constant(1.0, 0.0, 1.0, 1.0);
    const Path p = fixed_path(1.0, {}, {0.5}, {1});
    const ChainState c = propagate(mc, p);
    const Step s = make_step(mc, p, c, 1);
    const FlowDerivatives fd = flow_derivatives(mc, s);
    CHECK(fd.first == doctest::Approx(1.0));
    CHECK(fd.second == doctest::Approx(0.0));

    const Model ms = Model::sine_martingale(0.2, 0.2, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0);
    for (int rho = 0; rho <= 1; ++rho) {
        const double x = 0.9, z = 0.37, dt = 0.25;
        Step t;
        t.x_prev = x;
        t.rho = rho;
        t.t_prev = 0;
        t.t_next = dt;
        t.z = z;
        t.sigma_prev = ms.sigma(x).value();
        t.a_prev = t.sigma_prev * t.sigma_prev;
        t.reflect_base = ms.L;
        t.x_next = step_state(x, rho, ms.L, t.sigma_prev, z);
        const FlowDerivatives f = flow_derivatives(ms, t);
        const double h = 1e-6;
        const auto next = [&](double xp) {
            return step_state(xp, rho, ms.L, ms.sigma(xp).value(), z);
        };
        CHECK(f.first == doctest::Approx((next(x + h) - next(x - h)) / (2 * h)).epsilon(1e-7));
        CHECK(f.second ==
              doctest::Approx((next(x + h) - 2 * next(x) + next(x - h)) / (h * h)).epsilon(1e-3));
    }
}

TEST_CASE("merged transition formulas") {
    const Model m1 = Model::constant(1.0, 0.0, 1.0, 1.0);
    const MergedStep a = merged_transition(m1, 1.0, 0.2, 0.0, 1.0);
    CHECK(a.mu == doctest::Approx(-1.0));
    CHECK(a.x_merged == doctest::Approx(-0.8));

    const MergedStep b = merged_transition(m1, 0.0, 0.6, 0.0, 1.0); // start at the barrier
    CHECK(b.x_merged == doctest::Approx(0.0 + 1.0 * 0.6));

    const Model m2 = Model::constant(2.0, 0.0, 1.0, 1.0);
    const MergedStep c = merged_transition(m2, 0.5, 0.0, 0.0, 1.0);
    CHECK(c.mu == doctest::Approx(-1.0));
    CHECK(c.x_merged == doctest::Approx(-0.5));

    const Model ms = Model::sine_martingale(0.2, 0.2, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0);
    const MergedStep d = merged_transition(ms, 1.1, 0.0, 0.0, 0.5);
    CHECK(d.mu < 0.0);
}
