#include "kmc/calculus.hpp"

#include <cmath>

namespace kmc {

StepAlgebra::StepAlgebra(const Model& model, const Step& step) : model_(&model), step_(step) {
    require(step.dt() > 0.0, "StepAlgebra: step duration must be positive");
    xp_ = BiJet::var_prev(step.x_prev);
    xn_ = BiJet::var_next(step.x_next);
    const Jet sig = model.sigma(step.x_prev);
    require(sig.value() > 0.0, "StepAlgebra: sigma(x_prev) must be positive");
    const BiJet sigma_prev = compose(sig, xp_);
    const BiJet reflected =
        (2.0 * step.rho - 1.0) * xp_ + 2.0 * model.L * (1.0 - step.rho);
    z_ = (xn_ - reflected) / sigma_prev;
    inv_sdt_ = recip(sigma_prev) * (1.0 / step.dt());
    const BiJet sigma_prime = compose(sig.differentiate(), xp_);
    flow_ = sigma_prime * z_ + (2.0 * step.rho - 1.0);
    sigma_prime_prev_ = sig.deriv(1);
}

BiJet StepAlgebra::at_prev(Coefficient c) const {
    return compose(coefficient_jet(*model_, c, step_.x_prev, 3), xp_);
}

BiJet StepAlgebra::at_next(Coefficient c) const {
    return compose(coefficient_jet(*model_, c, step_.x_next, 3), xn_);
}

BiJet StepAlgebra::apply_I(const BiJet& h) const { return h * z_ * inv_sdt_ - h.d_next(); }

BiJet StepAlgebra::d_total(const BiJet& h) const { return h.d_prev() + flow_ * h.d_next(); }

MergedAlgebra::MergedAlgebra(const Model& model, const MergedStep& step)
    : model_(&model), step_(step) {
    require(step.dt() > 0.0, "MergedAlgebra: step duration must be positive");
    xp_ = BiJet::var_prev(step.x_prev);
    xm_ = BiJet::var_next(step.x_merged);
    const BiJet sigma_prev = compose(model.sigma(step.x_prev), xp_);
    const double sL = step.sigma_L;
    const BiJet mu = (-sL) * recip(sigma_prev);
    const BiJet mean = model.L * (1.0 - mu) + xp_ * mu;
    z_ = (1.0 / sL) * (xm_ - mean);
}

BiJet MergedAlgebra::at_merged(Coefficient c) const {
    return compose(coefficient_jet(*model_, c, step_.x_merged, 3), xm_);
}

BiJet MergedAlgebra::apply_I(const BiJet& h) const {
    return h * z_ * (1.0 / (step_.sigma_L * step_.dt())) - h.d_next();
}

BiJet MergedAlgebra::offset() const { return step_.sigma_L * z_; }

double integral_of_one(int l, double variance, double scaled_increment) {
    require(variance > 0.0, "integral_of_one: variance must be positive");
    require(l == 1 || l == 2, "integral_of_one: order must be 1 or 2");
    if (l == 1) return scaled_increment / variance;
    return (scaled_increment * scaled_increment - variance) / (variance * variance);
}

namespace {

// Mills ratio m(u) = normal_tail(u)/normal_density(u) for u >= 0.
double mills_ratio_std(double u) {
    if (u < 6.0) {
        const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * pi);
        return norm_tail(u) / phi;
    }
    // Continued fraction 1/(u + 1/(u + 2/(u + 3/(...)))), accurate in the tail.
    double cf = 0.0;
    for (int k = 60; k >= 1; --k) cf = k / (u + cf);
    return 1.0 / (u + cf);
}

} // namespace

Jet mills_ratio_jet(double t, double z, int order) {
    require(t > 0.0, "mills_ratio_jet: variance argument must be positive");
    require(order >= 0 && order <= 2, "mills_ratio_jet: order must be in 0..2");
    const double rt = std::sqrt(t);
    const double u = std::abs(z) / rt;
    Jet r;
    r.ord = order;
    r.d[0] = rt * mills_ratio_std(u);
    if (order >= 1) r.d[1] = z == 0.0 ? 0.0 : -(z > 0.0 ? 1.0 : -1.0) + (z / t) * r.d[0];
    if (order >= 2) r.d[2] = r.d[0] / t + (z / t) * r.d[1];
    return r;
}

double chain_rule_residual(const StepAlgebra& alg, const BiJet& h) {
    const double lhs = alg.d_total(alg.apply_I(h)).value();
    const double sp = alg.sigma_prime_prev() / alg.step().sigma_prev;
    const double rhs = alg.apply_I(alg.d_total(h)).value() - sp * alg.apply_I(h).value();
    return std::abs(lhs - rhs);
}

} // namespace kmc
