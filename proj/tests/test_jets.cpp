#include <doctest.h>

#include <cmath>

#include "kmc/bijet.hpp"
#include "kmc/rng.hpp"

using namespace kmc;

namespace {

double fd1(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double fd2(const std::function<double(double)>& f, double x, double h = 1e-4) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

} // namespace

TEST_CASE("jet arithmetic matches finite differences") {
    const auto fn = [](double x) {
        const Jet j = Jet::variable(x);
        return sin(2.0 * j) * (j * j + 1.0) / (j + 3.0);
    };
    Rng rng(7, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = 4.0 * rng.uniform() - 2.0;
        const Jet j = fn(x);
        const auto value = [&](double y) { return fn(y).value(); };
        CHECK(j.deriv(1) == doctest::Approx(fd1(value, x)).epsilon(1e-6));
        CHECK(j.deriv(2) == doctest::Approx(fd2(value, x)).epsilon(1e-4));
        const auto first = [&](double y) { return fn(y).deriv(1); };
        CHECK(j.deriv(3) == doctest::Approx(fd2(first, x)).epsilon(1e-4));
    }
}

TEST_CASE("jet reciprocal and composition") {
    const Jet x = Jet::variable(0.7);
    const Jet r = recip(x * x + 1.0);
    const auto ref = [](double y) { return 1.0 / (y * y + 1.0); };
    CHECK(r.value() == doctest::Approx(ref(0.7)).epsilon(1e-14));
    CHECK(r.deriv(1) == doctest::Approx(fd1(ref, 0.7)).epsilon(1e-8));
}

TEST_CASE("bijet products satisfy the Leibniz rule against finite differences") {
    const auto fn = [](double xp, double xn) {
        const BiJet a = BiJet::var_prev(xp);
        const BiJet b = BiJet::var_next(xn);
        return (a * a * b + b * b - a * 0.5) * recip(a + b + 4.0);
    };
    Rng rng(17, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const double xp = rng.uniform(), xn = rng.uniform() + 0.5;
        const BiJet f = fn(xp, xn);
        const double h = 1e-5;
        CHECK(f.d[1][0] ==
              doctest::Approx((fn(xp + h, xn).value() - fn(xp - h, xn).value()) / (2 * h))
                  .epsilon(1e-7));
        CHECK(f.d[0][1] ==
              doctest::Approx((fn(xp, xn + h).value() - fn(xp, xn - h).value()) / (2 * h))
                  .epsilon(1e-7));
        const double mixed = (fn(xp + h, xn + h).value() - fn(xp + h, xn - h).value() -
                              fn(xp - h, xn + h).value() + fn(xp - h, xn - h).value()) /
                             (4 * h * h);
        CHECK(f.d[1][1] == doctest::Approx(mixed).epsilon(1e-5));
    }
}

TEST_CASE("bijet mixed partials are symmetric by construction") {
    const BiJet a = BiJet::var_prev(0.3);
    const BiJet b = BiJet::var_next(1.1);
    const BiJet f = a * b * b + 2.0 * (a * a * b);
    CHECK(f.d_prev().d_next().value() == doctest::Approx(f.d_next().d_prev().value()));
}

TEST_CASE("bijet composition with a univariate jet") {
    const Jet outer = [] {
        const Jet u = Jet::variable(1.9); // expand sin at the inner value
        return sin(u);
    }();
    const BiJet inner = BiJet::var_prev(0.4) + 3.0 * BiJet::var_next(0.5);
    const BiJet f = compose(outer, inner);
    CHECK(f.value() == doctest::Approx(std::sin(1.9)).epsilon(1e-14));
    CHECK(f.d[1][0] == doctest::Approx(std::cos(1.9)).epsilon(1e-14));
    CHECK(f.d[0][1] == doctest::Approx(3.0 * std::cos(1.9)).epsilon(1e-14));
    CHECK(f.d[0][2] == doctest::Approx(-9.0 * std::sin(1.9)).epsilon(1e-12));
    CHECK(f.d[1][1] == doctest::Approx(-3.0 * std::sin(1.9)).epsilon(1e-12));
}

TEST_CASE("differentiating below the trusted order is rejected") {
    BiJet f = BiJet::var_next(1.0);
    f = f.d_next().d_next().d_next();
    CHECK_THROWS_AS((void)f.d_next(), contract_violation);
}
