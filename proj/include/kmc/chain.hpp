#pragma once

#include <vector>

#include "kmc/model.hpp"
#include "kmc/renewal.hpp"

namespace kmc {

// One transition of the reflection chain
//   x_next = rho x_prev + (1-rho)(2L - x_prev) + sigma(x_prev) z.
struct Step {
    int index = 1; // 1-based interval index
    double x_prev = 0.0;
    double x_next = 0.0;
    int rho = 1;
    double t_prev = 0.0;
    double t_next = 0.0;
    double z = 0.0; // Brownian increment over (t_prev, t_next]
    double sigma_prev = 0.0;
    double a_prev = 0.0;

    double dt() const { return t_next - t_prev; }
    double reflect_base = 0.0; // the barrier L, cached with the step
};

// One transition of the merged boundary chain
//   x_merged = L (1 - mu) + x_prev mu + sigma(L) z_sum,  mu = -sigma(L)/sigma(x_prev).
struct MergedStep {
    int j_index = 0;   // index of the left endpoint on the sampled grid
    int end_index = 1; // index of the right endpoint
    double x_prev = 0.0;
    double x_merged = 0.0;
    double z_sum = 0.0;
    double t_prev = 0.0;
    double t_end = 0.0;
    double mu = 0.0;
    double mean = 0.0; // L (1 - mu) + x_prev mu
    double sigma_L = 0.0;
    double a_prev = 0.0;

    double dt() const { return t_end - t_prev; }
};

struct ChainState {
    std::vector<double> states; // X_0 .. X_{n+1}
    std::vector<bool> alive;    // alive[i] = (X_i >= L), i = 0 .. n+1
    int first_death = -1;       // smallest i with X_i < L, or -1 if none
};

// Single transition of the reflection chain.
double step_state(double x_prev, int rho, double L, double sigma_prev, double z);

ChainState propagate(const Model& model, const Path& path);

// The i-th step (1-based) of a propagated chain as a Step record.
Step make_step(const Model& model, const Path& path, const ChainState& chain, int i);

MergedStep merged_transition(const Model& model, double x_prev, double z_sum, double t_prev,
                             double t_end);

// First and second derivative of x_next with respect to x_prev at fixed (z, rho).
struct FlowDerivatives {
    double first = 0.0;
    double second = 0.0;
};
FlowDerivatives flow_derivatives(const Model& model, const Step& step);

} // namespace kmc
