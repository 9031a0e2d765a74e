#pragma once

#include "kmc/calculus.hpp"
#include "kmc/renewal.hpp"

namespace kmc {

// Per-step renormalization of the weights. The Poisson form carries lambda^-1
// on interior intervals and e^{lambda T} on the last one; the renewal form
// carries 1/f(dt) and 1/(1-F(T - t_n)). Full-path products of the two agree
// exactly when the renewal law is Exponential(lambda).
class Normalization {
public:
    static Normalization poisson(double lambda, double T);
    static Normalization renewal(const JumpLaw& law, double T);

    double interior(double dt) const;
    double last(double t_prev) const;
    double horizon() const { return T_; }
    bool is_poisson() const { return poisson_; }
    const JumpLaw& law() const { return law_; }

private:
    bool poisson_ = true;
    double lambda_ = 1.0;
    double T_ = 1.0;
    JumpLaw law_ = JumpLaw::exponential(1.0);
};

// Every weight attached to one base-chain transition. "back"/"fwd" refer to
// the direction in which the derivative is transferred through the chain.
struct StepWeights {
    double theta_bar = 0.0;          // base product weight
    double i_theta_bar = 0.0;        // I(theta_bar), the local IBP weight
    double theta_e_back = 0.0;       // exchange weight, backward transfer
    double theta_c_back = 0.0;       // correction weight, backward transfer
    double theta_partial_back = 0.0; // boundary weight, backward transfer
    double theta_e_fwd = 0.0;        // exchange weight, forward transfer
    double theta_c_fwd = 0.0;        // correction weight, forward transfer
    double i_theta_e_fwd = 0.0;      // I(theta_e_fwd), the BEL IBP weight
};

StepWeights step_weights(const Model& model, const Normalization& norm, const Step& step,
                         bool is_last);

// theta_bar alone, via the closed extraction form. Cheaper than the jet route
// on the value-estimator hot path and an independent cross-check of it.
double base_weight(const Model& model, const Normalization& norm, const Step& step, bool is_last);

// Weight of a merged boundary transition produced when a backward boundary
// term is integrated against the intermediate jump time (transfer route).
double merged_weight_transfer(const Model& model, const Normalization& norm,
                              const MergedStep& step, bool is_last);

// Same for the boundary term generated by the local IBP; carries the Gaussian
// tail-ratio factor. `doubled_last_coeff` switches the last-interval prefactor
// to an alternative with twice the a'(L) contribution; the merging identity
// oracle selects the default.
double merged_weight_local_ibp(const Model& model, const Normalization& norm,
                               const MergedStep& step, bool is_last,
                               bool doubled_last_coeff = false);

} // namespace kmc
