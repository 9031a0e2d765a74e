#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kmc/jet.hpp"

namespace kmc {

// Scalar test function applied at the terminal state. The derivative is used
// only by quadrature oracles and finite-difference cross-checks.
struct TestFunction {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    bool vanishes_at_L = false;
    std::string name;

    static TestFunction linear_above(double L);    // x - L
    static TestFunction quadratic_above(double L); // (x - L)^2
    // c3 x^3 + c1 x + c0 shifted so that it vanishes at L.
    static TestFunction shifted_cubic(double c0, double c1, double c3, double L);
};

enum class Coefficient { drift, sigma, a };

// One-dimensional SDE dX = b(X) dt + sigma(X) dW, killed at the level L,
// observed at the horizon T from the start x0. Coefficients are jet-valued so
// every derivative the weight calculus needs is exact.
struct Model {
    std::function<Jet(double)> sigma_jet; // order-3 jet of sigma at x
    std::function<Jet(double)> drift_jet; // order-3 jet of b at x
    double L = 0.0;
    double T = 1.0;
    double x0 = 1.0;
    std::string family; // "constant", "sine_martingale" or "custom"
    // Parameters of the built-in martingale test function, if any.
    double c0 = 0.0, c1 = 1.0, c3 = 1.0;

    Jet sigma(double x) const { return sigma_jet(x); }
    Jet drift(double x) const { return drift_jet(x); }
    Jet a(double x) const {
        const Jet s = sigma_jet(x);
        return s * s;
    }

    static Model constant(double sigma_bar, double L, double T, double x0);
    static Model sine_martingale(double sigma_bar, double omega, double c0, double c1, double c3,
                                 double L, double T, double x0);

    TestFunction default_test_function() const;
};

// Value and derivatives 1..order of the requested coefficient at x.
Jet coefficient_jet(const Model& model, Coefficient which, double x, int order);

struct ValidationReport {
    bool accepted = false;
    double min_a = 0.0; // min of sigma^2 over the probe grid
    double max_a = 0.0;
    double martingale_residual = 0.0; // max |b f' + a f''/2| for the built-in family
    std::vector<std::string> notes;
};

std::vector<double> default_probe_grid(const Model& model, int n_points = 257);

// Grid probe of the ellipticity assumption; rejects non-positive sigma and
// violations of user-supplied bounds on sigma^2 when given. Known
// idealization gaps (e.g. polynomially growing test functions) are recorded
// as notes rather than rejected.
ValidationReport validate_model(const Model& model, const std::vector<double>& grid,
                                double a_lower = 0.0,
                                double a_upper = std::numeric_limits<double>::infinity());

} // namespace kmc
