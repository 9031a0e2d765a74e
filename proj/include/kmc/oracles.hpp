#pragma once

#include <functional>
#include <vector>

#include "kmc/estimators.hpp"

namespace kmc {
namespace oracles {

// ---- Quadrature toolbox -------------------------------------------------

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48);

// Nodes/weights for integrals against exp(-u^2); expect() integrates a
// function of a Gaussian variable with the given mean and variance.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
    static GaussHermite make(int n);
    double expect(const std::function<double(double)>& h, double mean, double variance) const;
};

// ---- Closed-form killed Brownian motion ---------------------------------

// Constant-coefficient model killed at L: two-Gaussian reflection density.
struct KilledBmOracle {
    double sigma = 1.0;
    double L = 0.0;
    double x = 1.0;
    double T = 1.0;

    double density(double z) const;     // p(T, x, z), z >= L
    double density_dz(double z) const;  // d/dz p
    double density_dx(double z) const;  // d/dx p
    double value(const std::function<double(double)>& f, double tol = 1e-10) const;
    double value_of_derivative(const std::function<double(double)>& fprime,
                               double tol = 1e-10) const; // E[f'(X_T) 1{alive}]
    double bel(const std::function<double(double)>& f, double tol = 1e-10) const; // d/dx E[f 1]
};

// ---- Identity checks ----------------------------------------------------

// |E[D^l f(X1) H(X1)] - E[f(X1) I^l(H)(X1)]| by Gauss-Hermite quadrature, one
// transition at fixed rho.
double check_duality(const Model& model, double x_prev, int rho, double dt,
                     const std::function<double(double)>& f,
                     const std::function<double(double)>& f_deriv_l, int l,
                     const std::function<BiJet(const StepAlgebra&)>& H);

struct TransferCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual() const { return std::abs(lhs - rhs); }
};

// Derivative-transfer identity on one interior interval (Dirac term realized
// as a boundary evaluation against the transition density), or on the last
// interval when `last` is set (then f must vanish at L).
TransferCheck check_transfer(const Model& model, double x_prev, double dt,
                             const TestFunction& f, bool last);

enum class MergingIdentity { star, circledast, last_star, last_circledast };

struct MergingCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double scale = 1.0; // magnitude used to normalize the residual
    double rel_residual() const { return std::abs(lhs - rhs) / scale; }
};

// Boundary-merging identities: a two-dimensional quadrature (uniform
// intermediate time x Gaussian endpoint) against the one-dimensional merged
// form. `doubled_last_coeff` evaluates the alternative last-interval
// coefficient so tests can report which variant satisfies the identity.
MergingCheck check_merging(const Model& model, double x_prev, double dt_total,
                           const std::function<double(double)>& f, MergingIdentity which,
                           bool doubled_last_coeff = false);

// Time convolutions of Gaussian kernels: `weighted` multiplies the integrand
// by s (the variant that produces the tail mass on the right-hand side).
double check_gaussian_convolution(double alpha, double beta, double x, double y, double t, int l,
                                  bool weighted);

// Parity reduction at the boundary: returns |LHS - RHS| where both sides are
// two-point Bernoulli averages against the boundary density.
double check_reduction(const Model& model, double x_prev, double dt,
                       const std::function<double(double)>& f, int l_pow, int k_ord);

// Reduction with a smooth factor c: I^k(c) localized at the boundary equals
// its extraction expansion with only parity-surviving terms.
double check_reduction_smooth(const Model& model, double x_prev, double dt,
                              const std::function<double(double)>& f,
                              const std::function<Jet(double)>& c, int k_ord);

// ---- Statistical cross-checks -------------------------------------------

struct FdCheck {
    double bel_mean = 0.0;
    double bel_se = 0.0;
    double fd_mean = 0.0;
    double fd_se = 0.0;
    double z_score = 0.0;
};

// Central difference of the value estimator (common random numbers) against
// the BEL estimator, both normalized to d/dx E[f(X_T) 1{alive}].
FdCheck fd_consistency_bel(const Model& model, const TestFunction& f, const JumpLaw& law,
                           long long samples, double h, std::uint64_t seed);

// Same consistency idea for the backward representation: compares the
// backward estimator of E[f'(X_T) 1{alive}] with the value estimator applied
// to f' (requires f'(L) = 0 so the value representation applies).
FdCheck backward_vs_value(const Model& model, const TestFunction& f,
                          const TestFunction& f_prime, const JumpLaw& law, long long samples,
                          std::uint64_t seed);

// Mittag-Leffler function, used as a soft moment diagnostic.
double mittag_leffler(double alpha, double beta, double z);

} // namespace oracles
} // namespace kmc
