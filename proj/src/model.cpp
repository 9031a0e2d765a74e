#include "kmc/model.hpp"

#include <algorithm>
#include <cmath>

namespace kmc {

TestFunction TestFunction::linear_above(double L) {
    TestFunction f;
    f.value = [L](double x) { return x - L; };
    f.derivative = [](double) { return 1.0; };
    f.vanishes_at_L = true;
    f.name = "lin";
    return f;
}

TestFunction TestFunction::quadratic_above(double L) {
    TestFunction f;
    f.value = [L](double x) { return (x - L) * (x - L); };
    f.derivative = [L](double x) { return 2.0 * (x - L); };
    f.vanishes_at_L = true;
    f.name = "sq";
    return f;
}

TestFunction TestFunction::shifted_cubic(double c0, double c1, double c3, double L) {
    TestFunction f;
    const double fL = c3 * L * L * L + c1 * L + c0;
    f.value = [=](double x) { return c3 * x * x * x + c1 * x + c0 - fL; };
    f.derivative = [=](double x) { return 3.0 * c3 * x * x + c1; };
    f.vanishes_at_L = true;
    f.name = "martingale_h";
    return f;
}

Model Model::constant(double sigma_bar, double L, double T, double x0) {
    require(T > 0.0, "Model: horizon must be positive");
    require(x0 >= L, "Model: start must be at or above the barrier");
    Model m;
    m.sigma_jet = [sigma_bar](double) { return Jet::constant(sigma_bar); };
    m.drift_jet = [](double) { return Jet::constant(0.0); };
    m.L = L;
    m.T = T;
    m.x0 = x0;
    m.family = "constant";
    return m;
}

Model Model::sine_martingale(double sigma_bar, double omega, double c0, double c1, double c3,
                             double L, double T, double x0) {
    require(T > 0.0, "Model: horizon must be positive");
    require(x0 >= L, "Model: start must be at or above the barrier");
    require(c3 != 0.0, "Model: sine_martingale needs c3 != 0");
    Model m;
    const double k = c1 / (3.0 * c3);
    m.sigma_jet = [sigma_bar, omega](double x) {
        const Jet xx = Jet::variable(x);
        return sigma_bar * (sin(omega * xx) + 2.0);
    };
    // Chosen so that L f = b f' + a f''/2 vanishes for f = c3 x^3 + c1 x + c0:
    // b(x) = -x a(x) / (x^2 + c1/(3 c3)).
    m.drift_jet = [sigma_bar, omega, k](double x) {
        const Jet xx = Jet::variable(x);
        const Jet s = sigma_bar * (sin(omega * xx) + 2.0);
        return (-1.0) * xx * s * s / (xx * xx + k);
    };
    m.L = L;
    m.T = T;
    m.x0 = x0;
    m.family = "sine_martingale";
    m.c0 = c0;
    m.c1 = c1;
    m.c3 = c3;
    return m;
}

TestFunction Model::default_test_function() const {
    if (family == "sine_martingale") return TestFunction::shifted_cubic(c0, c1, c3, L);
    return TestFunction::quadratic_above(L);
}

Jet coefficient_jet(const Model& model, Coefficient which, double x, int order) {
    require(order >= 0 && order <= 3, "coefficient_jet: order must be in 0..3");
    Jet j;
    switch (which) {
    case Coefficient::drift: j = model.drift(x); break;
    case Coefficient::sigma: j = model.sigma(x); break;
    case Coefficient::a: j = model.a(x); break;
    }
    j.ord = order;
    for (int k = order + 1; k <= 3; ++k) j.d[k] = 0.0;
    return j;
}

std::vector<double> default_probe_grid(const Model& model, int n_points) {
    const double sbar = model.sigma(model.x0).value();
    const double hi = model.L + 10.0 * std::max(sbar, 1e-8) * std::sqrt(model.T);
    std::vector<double> grid(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i)
        grid[static_cast<std::size_t>(i)] = model.L + (hi - model.L) * i / (n_points - 1.0);
    return grid;
}

ValidationReport validate_model(const Model& model, const std::vector<double>& grid,
                                double a_lower, double a_upper) {
    require(!grid.empty(), "validate_model: empty probe grid");
    ValidationReport rep;
    double amin = std::numeric_limits<double>::infinity();
    double amax = -amin;
    bool positive = true;
    for (double x : grid) {
        const double s = model.sigma(x).value();
        if (!(s > 0.0)) positive = false;
        const double aa = s * s;
        amin = std::min(amin, aa);
        amax = std::max(amax, aa);
    }
    rep.min_a = amin;
    rep.max_a = amax;
    if (!positive) {
        rep.accepted = false;
        rep.notes.push_back("ellipticity violated: sigma <= 0 somewhere on the probe grid");
        return rep;
    }
    if (amin < a_lower || amax > a_upper) {
        rep.accepted = false;
        rep.notes.push_back("sigma^2 leaves the configured ellipticity bounds on the probe grid");
        return rep;
    }
    if (model.family == "sine_martingale") {
        double worst = 0.0;
        for (double x : grid) {
            const double fp = 3.0 * model.c3 * x * x + model.c1;
            const double fpp = 6.0 * model.c3 * x;
            const double b = model.drift(x).value();
            const double aa = model.a(x).value();
            worst = std::max(worst, std::abs(b * fp + 0.5 * aa * fpp));
        }
        rep.martingale_residual = worst;
        rep.notes.push_back(
            "built-in cubic test function has polynomial growth; boundedness assumption "
            "holds only after truncation");
    }
    if (model.x0 < model.L) {
        rep.accepted = false;
        rep.notes.push_back("start below the barrier");
        return rep;
    }
    rep.accepted = true;
    return rep;
}

} // namespace kmc
