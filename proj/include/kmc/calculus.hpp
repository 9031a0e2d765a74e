#pragma once

#include "kmc/bijet.hpp"
#include "kmc/chain.hpp"
#include "kmc/model.hpp"

namespace kmc {

// Per-interval integral/derivative operators acting on smooth functionals of
// one chain transition, represented as bivariate jets in (x_prev, x_next).
// The increment z is a derived function of the two states, so the total
// derivative in x_prev (along the flow, z held fixed) and the partial
// derivative in x_next stay distinct and do not commute.
class StepAlgebra {
public:
    StepAlgebra(const Model& model, const Step& step);

    const Step& step() const { return step_; }
    const BiJet& x_prev() const { return xp_; }
    const BiJet& x_next() const { return xn_; }
    const BiJet& z() const { return z_; }
    const BiJet& flow() const { return flow_; } // d x_next / d x_prev at fixed z
    double sigma_prime_prev() const { return sigma_prime_prev_; }

    // Coefficient composed with one of the endpoint variables.
    BiJet at_prev(Coefficient c) const;
    BiJet at_next(Coefficient c) const;

    // Integral operator I(h) = h z / (sigma_prev dt) - d_next h.
    BiJet apply_I(const BiJet& h) const;
    BiJet apply_I2(const BiJet& h) const { return apply_I(apply_I(h)); }
    // Derivative d/dx_prev along the flow: d1 h + (dx_next/dx_prev) d2 h.
    BiJet d_total(const BiJet& h) const;

private:
    const Model* model_;
    Step step_;
    BiJet xp_, xn_, z_, inv_sdt_, flow_;
    double sigma_prime_prev_;
};

// Same operators for the merged boundary transition; differentiation is with
// respect to the merged endpoint, the scale is sigma(L).
class MergedAlgebra {
public:
    MergedAlgebra(const Model& model, const MergedStep& step);

    const MergedStep& step() const { return step_; }
    const BiJet& x_merged() const { return xm_; }
    const BiJet& z_sum() const { return z_; }

    BiJet at_merged(Coefficient c) const;
    BiJet apply_I(const BiJet& h) const;
    BiJet apply_I2(const BiJet& h) const { return apply_I(apply_I(h)); }

    // Offset of the merged endpoint from its conditional mean, x_merged - mean;
    // this is sigma(L) * z_sum and is the natural argument of the tail ratio.
    BiJet offset() const;

private:
    const Model* model_;
    MergedStep step_;
    BiJet xp_, xm_, z_;
};

// I^l(1) for l in {1,2}; arguments are the transition variance a_prev*dt and
// the scaled increment sigma_prev*z, matching the Hermite closed form.
double integral_of_one(int l, double variance, double scaled_increment);

// Gaussian tail mass over density, R(t,z) = Phi_bar(t,z)/g(t,z), with
// derivatives in z up to order 2. Stable for large |z|/sqrt(t) via a
// continued-fraction Mills ratio.
Jet mills_ratio_jet(double t, double z, int order = 2);

// |d/dx_prev I(h) - (I(d/dx_prev h) - (sigma'/sigma) I(h))| for one step.
double chain_rule_residual(const StepAlgebra& alg, const BiJet& h);

} // namespace kmc
