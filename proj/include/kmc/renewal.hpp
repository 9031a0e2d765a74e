#pragma once

#include <string>
#include <vector>

#include "kmc/rng.hpp"

namespace kmc {

// Inter-arrival law of the renewal process whose jump times drive the chain.
// The Beta laws are the importance-sampling choices that keep the estimator
// moments finite; Exponential recovers a Poisson process.
class JumpLaw {
public:
    enum class Kind { exponential, beta_one, beta_two };

    static JumpLaw exponential(double lambda);
    static JumpLaw beta_one(double alpha, double tau_bar);
    static JumpLaw beta_two(double alpha, double beta, double tau_bar);

    static JumpLaw parse(const std::string& spec);
    std::string spec() const;

    Kind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double tau_bar() const { return tau_bar_; }

    double density(double t) const;
    double cdf(double t) const;
    double survival(double t) const; // 1 - F(t), guarded against the support edge

    // Inverse-cdf draw of one inter-arrival gap.
    double sample_gap(Rng& rng) const;

    // Sufficient condition for the p-th moment of the weight product to be
    // finite, expressed through the density's singularity exponent at 0+.
    bool variance_condition(double p) const;

private:
    Kind kind_ = Kind::exponential;
    double lambda_ = 1.0;
    double alpha_ = 0.5;
    double beta_ = 0.5;
    double tau_bar_ = 1.0;
};

// One sampled time skeleton: jump times inside (0,T], plus the Gaussian and
// Bernoulli innovations for the n_jumps+1 chain transitions. Gaussians are
// stored as standard normals and scaled by sqrt(dt) where used, so merged
// transitions can re-assemble raw Brownian increments exactly.
struct Path {
    int n_jumps = 0;
    std::vector<double> times;      // strictly increasing, in (0,T]
    std::vector<double> gaussians;  // n_jumps + 1 standard normal draws
    std::vector<int> bernoullis;    // n_jumps + 1 fair coin draws
    double T = 0.0;

    double time_at(int i) const { // zeta_i with zeta_0 = 0 and zeta_{n+1} = T
        if (i <= 0) return 0.0;
        if (i > n_jumps) return T;
        return times[static_cast<std::size_t>(i - 1)];
    }
    double dt(int i) const { return time_at(i) - time_at(i - 1); } // i in 1..n+1
    // Brownian increment W_{zeta_i} - W_{zeta_{i-1}}.
    double increment(int i) const {
        return std::sqrt(dt(i)) * gaussians[static_cast<std::size_t>(i - 1)];
    }
    int rho(int i) const { return bernoullis[static_cast<std::size_t>(i - 1)]; }
};

Path sample_path(const JumpLaw& law, double T, Rng& rng);

// Regularized incomplete beta function I_x(a, b), used by the BetaTwo law.
double incomplete_beta(double a, double b, double x);

} // namespace kmc
