#include <doctest.h>

#include <cmath>

#include "kmc/calculus.hpp"
#include "kmc/oracles.hpp"
#include "kmc/rng.hpp"

using namespace kmc;

namespace {

Step make_step_for(const Model& m, double x_prev, int rho, double dt, double z) {
    Step s;
    s.x_prev = x_prev;
    s.rho = rho;
    s.t_prev = 0.0;
    s.t_next = dt;
    s.z = z;
    s.sigma_prev = m.sigma(x_prev).value();
    s.a_prev = s.sigma_prev * s.sigma_prev;
    s.reflect_base = m.L;
    s.x_next = step_state(x_prev, rho, m.L, s.sigma_prev, z);
    return s;
}

} // namespace

TEST_CASE("integral operator applied to one") {
    CHECK(integral_of_one(1, 1.0, 0.0) == 0.0);
    CHECK(integral_of_one(2, 1.0, 0.0) == doctest::Approx(-1.0));
    // sigma=2, dt=0.5, z=1: variance = 4*0.5 = 2, scaled increment = 2
    CHECK(integral_of_one(1, 2.0, 2.0) == doctest::Approx(1.0));
    CHECK(integral_of_one(2, 2.0, 2.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(integral_of_one(1, 0.0, 1.0), contract_violation);
    CHECK_THROWS_AS(integral_of_one(3, 1.0, 1.0), contract_violation);
}

TEST_CASE("operator identities on one step") {
    const Model m = Model::sine_martingale(0.2, 0.2, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0);
    Rng rng(5, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const double x = 0.4 + rng.uniform();
        const double dt = 0.05 + 0.4 * rng.uniform();
        const double z = std::sqrt(dt) * rng.normal();
        const int rho = rng.bernoulli();
        const Step s = make_step_for(m, x, rho, dt, z);
        const StepAlgebra alg(m, s);

        // I(1) and I^2(1) match the closed Hermite forms.
        const BiJet one = BiJet::constant(1.0);
        CHECK(alg.apply_I(one).value() ==
              doctest::Approx(integral_of_one(1, s.a_prev * dt, s.sigma_prev * z))
                  .epsilon(1e-12));
        CHECK(alg.apply_I2(one).value() ==
              doctest::Approx(integral_of_one(2, s.a_prev * dt, s.sigma_prev * z))
                  .epsilon(1e-12));

        // Recursion: I^2(1) = I(1)^2 - 1/(a dt).
        const double i1 = alg.apply_I(one).value();
        CHECK(alg.apply_I2(one).value() ==
              doctest::Approx(i1 * i1 - 1.0 / (s.a_prev * dt)).epsilon(1e-12));

        // Constant extraction: I(c h) = c I(h) for scalar c.
        const BiJet h = alg.x_next() * alg.x_next();
        CHECK(alg.apply_I(3.5 * h).value() ==
              doctest::Approx(3.5 * alg.apply_I(h).value()).epsilon(1e-12));

        // The increment as a bivariate jet reproduces the stored value and is
        // annihilated by the flow derivative.
        CHECK(alg.z().value() == doctest::Approx(z).epsilon(1e-12));
        CHECK(alg.d_total(alg.z()).value() == doctest::Approx(0.0).epsilon(1e-12));

        // Chain rule residual.
        CHECK(chain_rule_residual(alg, alg.x_prev() * alg.x_next()) <= 1e-10);
        CHECK(chain_rule_residual(alg, BiJet::constant(1.0)) <= 1e-12);
    }
}

TEST_CASE("I(h) for the identity functional") {
    const Model m = Model::constant(1.0, 0.0, 1.0, 1.0);
    // sigma=1, dt=1, z=0.5
    const Step s = make_step_for(m, 1.0, 1, 1.0, 0.5);
    const StepAlgebra alg(m, s);
    const BiJet h = alg.x_next();
    CHECK(alg.apply_I(h).value() == doctest::Approx(s.x_next * 0.5 - 1.0).epsilon(1e-14));
}

TEST_CASE("chain rule reduces to commutation for constant sigma") {
    const Model m = Model::constant(1.3, 0.0, 1.0, 1.0);
    const Step s = make_step_for(m, 1.0, 0, 0.7, 0.2);
    const StepAlgebra alg(m, s);
    const BiJet h = alg.x_prev() * alg.x_next() + alg.x_next() * alg.x_next();
    CHECK(alg.d_total(alg.apply_I(h)).value() ==
          doctest::Approx(alg.apply_I(alg.d_total(h)).value()).epsilon(1e-12));
}

TEST_CASE("merged operators and their extraction identity") {
    const Model m = Model::constant(1.0, 0.0, 1.0, 1.0);
    // I-bar(1) = z_sum / (sigma_L dt)
    const MergedStep ms = merged_transition(m, 1.0, 1.0, 0.0, 2.0);
    const MergedAlgebra alg(m, ms);
    const BiJet one = BiJet::constant(1.0);
    CHECK(alg.apply_I(one).value() == doctest::Approx(1.0 / (1.0 * 2.0)).epsilon(1e-14));
    CHECK(alg.apply_I2(one).value() == doctest::Approx((1.0 - 2.0) / 4.0).epsilon(1e-14));

    const Model sm = Model::sine_martingale(0.25, 0.25, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0);
    Rng rng(8, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const double dt = 0.1 + rng.uniform();
        const MergedStep t =
            merged_transition(sm, 0.5 + rng.uniform(), rng.normal() * std::sqrt(dt), 0.0, dt);
        const MergedAlgebra a(sm, t);
        const BiJet h1 = a.x_merged() * a.x_merged() + 0.4;
        const BiJet h2 = a.x_merged() * 2.0 - 1.0;
        const double lhs = a.apply_I(h1 * h2).value();
        const double rhs = a.apply_I(h1).value() * h2.value() - h1.value() * h2.d_next().value();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("tail-over-density ratio: closed forms and bounds") {
    // At z = 0 the ratio is sqrt(pi t / 2).
    for (double t : {0.25, 1.0, 3.0}) {
        const Jet r = mills_ratio_jet(t, 0.0, 1);
        CHECK(r.value() == doctest::Approx(std::sqrt(pi * t / 2.0)).epsilon(1e-13));
        CHECK(r.deriv(1) == 0.0);
    }

    // Quadrature cross-check of the tail mass at t=1, z=3.
    {
        const double tail = oracles::adaptive_simpson(
            [](double y) { return gauss_density(1.0, y); }, 3.0, 45.0, 1e-14);
        const Jet r = mills_ratio_jet(1.0, 3.0, 0);
        CHECK(r.value() == doctest::Approx(tail / gauss_density(1.0, 3.0)).epsilon(1e-10));
        CHECK(r.value() == doctest::Approx(0.30459).epsilon(1e-4));
    }

    // ratio * g recovers the tail mass to 1e-12 relative for |z|/sqrt(t) <= 8,
    // the ratio is bounded by its value at zero, and decreases in |z|.
    for (double t : {0.5, 1.0, 2.0}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double u = 0.0; u <= 8.0; u += 0.25) {
            const double z = u * std::sqrt(t);
            const double r = mills_ratio_jet(t, z, 0).value();
            CHECK(r * gauss_density(t, z) ==
                  doctest::Approx(gauss_tail_abs(t, z)).epsilon(1e-12));
            CHECK(r <= std::sqrt(pi * t / 2.0) + 1e-15);
            CHECK(r <= prev + 1e-15);
            prev = r;
        }
    }

    // Far tail stays finite and follows the asymptotic branch.
    const Jet far = mills_ratio_jet(1.0, 40.0, 2);
    CHECK(std::isfinite(far.value()));
    CHECK(far.value() == doctest::Approx(1.0 / 40.0).epsilon(1e-2));

    // Derivatives against finite differences.
    for (double z : {0.3, 1.5, -2.0}) {
        const double t = 0.8, h = 1e-6;
        const Jet r = mills_ratio_jet(t, z, 2);
        const double d1 = (mills_ratio_jet(t, z + h, 0).value() -
                           mills_ratio_jet(t, z - h, 0).value()) /
                          (2 * h);
        CHECK(r.deriv(1) == doctest::Approx(d1).epsilon(1e-7));
        const double d2 = (mills_ratio_jet(t, z + h, 0).value() - 2 * r.value() +
                           mills_ratio_jet(t, z - h, 0).value()) /
                          (h * h);
        CHECK(r.deriv(2) == doctest::Approx(d2).epsilon(1e-3));
    }

    CHECK_THROWS_AS(mills_ratio_jet(0.0, 1.0, 0), contract_violation);
}

TEST_CASE("duality in its simplest instances") {
    const Model m = Model::constant(1.0, 0.0, 1.0, 1.0);
    // f constant: both sides vanish for l = 1.
    const double r0 = oracles::check_duality(
        m, 1.0, 1, 0.5, [](double) { return 2.0; }, [](double) { return 0.0; }, 1,
        [](const StepAlgebra&) { return BiJet::constant(1.0); });
    CHECK(r0 <= 1e-12);
    // H = 1, f = x: E[f I(1)] = E[f'] = 1.
    const double r1 = oracles::check_duality(
        m, 1.0, 1, 0.5, [](double y) { return y; }, [](double) { return 1.0; }, 1,
        [](const StepAlgebra&) { return BiJet::constant(1.0); });
    CHECK(r1 <= 1e-12);
}
