#include "kmc/weights.hpp"

#include <cmath>

namespace kmc {

Normalization Normalization::poisson(double lambda, double T) {
    require(lambda > 0.0 && T > 0.0, "Normalization: lambda and T must be positive");
    Normalization n;
    n.poisson_ = true;
    n.lambda_ = lambda;
    n.T_ = T;
    n.law_ = JumpLaw::exponential(lambda);
    return n;
}

Normalization Normalization::renewal(const JumpLaw& law, double T) {
    require(T > 0.0, "Normalization: T must be positive");
    if (law.kind() != JumpLaw::Kind::exponential)
        require(law.tau_bar() > T, "Normalization: Beta laws need tau_bar > T");
    Normalization n;
    n.poisson_ = false;
    n.T_ = T;
    n.law_ = law;
    return n;
}

double Normalization::interior(double dt) const {
    if (poisson_) return 1.0 / lambda_;
    return 1.0 / law_.density(dt);
}

double Normalization::last(double t_prev) const {
    if (poisson_) return std::exp(lambda_ * T_);
    return 1.0 / law_.survival(T_ - t_prev);
}

StepWeights step_weights(const Model& model, const Normalization& norm, const Step& step,
                         bool is_last) {
    StepWeights w;
    const StepAlgebra alg(model, step);
    const double rho_sign = 2.0 * step.rho - 1.0;

    if (is_last) {
        const double kap = norm.last(step.t_prev);
        const Jet sig = model.sigma(step.x_prev);
        const double i2_one =
            integral_of_one(2, step.a_prev * step.dt(), step.sigma_prev * step.z);
        w.theta_bar = 2.0 * kap * rho_sign;
        w.i_theta_bar = w.theta_bar * step.z / (step.sigma_prev * step.dt());
        w.theta_e_back = 2.0 * kap;
        w.theta_c_back = -2.0 * kap * sig.deriv(1) * sig.value() * step.dt() * i2_one;
        w.theta_partial_back = 0.0;
        // Forward exchange keeps the increment through the flow derivative.
        const BiJet theta_e_fwd =
            (2.0 * kap) * (compose(sig.differentiate(), alg.x_prev()) * alg.z() * rho_sign + 1.0);
        w.theta_e_fwd = theta_e_fwd.value();
        w.theta_c_fwd = 0.0;
        w.i_theta_e_fwd = alg.apply_I(theta_e_fwd).value();
        return w;
    }

    const double kap = norm.interior(step.dt());
    const BiJet c1 = alg.at_next(Coefficient::drift);
    const BiJet a_next = alg.at_next(Coefficient::a);
    const BiJet a_prev = alg.at_prev(Coefficient::a);
    const BiJet c2 = 0.5 * (a_next - a_prev);

    const BiJet theta_bar = (2.0 * rho_sign * kap) * (alg.apply_I(c1) + alg.apply_I2(c2));
    w.theta_bar = theta_bar.value();
    w.i_theta_bar = alg.apply_I(theta_bar).value();

    // The derivative transfer moves d/dx_prev of c2 into the exchange weight;
    // the convention (no 1/2 on the transferred a-difference) is pinned by the
    // boundary-merging identity, which the oracle suite verifies.
    const BiJet da_total = alg.d_total(a_next - a_prev);
    const BiJet d1_back = c1 - rho_sign * da_total;
    const BiJet d1_fwd = c1 + rho_sign * da_total;

    const BiJet theta_e_back = (2.0 * kap) * (alg.apply_I2(c2) + alg.apply_I(d1_back));
    const BiJet theta_e_fwd = (2.0 * kap) * (alg.apply_I2(c2) + alg.apply_I(d1_fwd));
    w.theta_e_back = theta_e_back.value();
    w.theta_e_fwd = theta_e_fwd.value();

    const double sp = alg.sigma_prime_prev();
    w.theta_c_back = alg.apply_I(theta_bar - rho_sign * theta_e_back).value() -
                     alg.d_total(theta_e_back).value() -
                     sp * alg.apply_I(alg.z() * theta_e_back).value();
    w.theta_c_fwd = alg.apply_I(rho_sign * theta_bar - theta_e_fwd).value() +
                    alg.d_total(theta_bar).value() +
                    sp * alg.apply_I(alg.z() * theta_bar).value();

    const Jet aL = model.a(model.L);
    const Jet bL = model.drift(model.L);
    w.theta_partial_back = 2.0 * rho_sign * kap * (aL.deriv(1) - bL.value()) *
                           integral_of_one(1, step.a_prev * step.dt(),
                                           step.sigma_prev * step.z);

    w.i_theta_e_fwd = alg.apply_I(theta_e_fwd).value();
    return w;
}

double base_weight(const Model& model, const Normalization& norm, const Step& step,
                   bool is_last) {
    const double rho_sign = 2.0 * step.rho - 1.0;
    if (is_last) return 2.0 * norm.last(step.t_prev) * rho_sign;
    require(step.dt() > 0.0, "base_weight: step duration must be positive");
    const double kap = norm.interior(step.dt());
    const Jet b_next = model.drift(step.x_next);
    const Jet a_next = model.a(step.x_next);
    const double c2 = 0.5 * (a_next.value() - model.a(step.x_prev).value());
    const double i1 = integral_of_one(1, step.a_prev * step.dt(), step.sigma_prev * step.z);
    const double i2 = integral_of_one(2, step.a_prev * step.dt(), step.sigma_prev * step.z);
    const double ic1 = b_next.value() * i1 - b_next.deriv(1);
    const double ic2 = c2 * i2 - a_next.deriv(1) * i1 + 0.5 * a_next.deriv(2);
    return 2.0 * rho_sign * kap * (ic1 + ic2);
}

namespace {

double boundary_prefactor(const Model& model) {
    // b(L) - a'(L): the orientation that makes the merging identities hold.
    return model.drift(model.L).value() - model.a(model.L).deriv(1);
}

} // namespace

double merged_weight_transfer(const Model& model, const Normalization& norm,
                              const MergedStep& step, bool is_last) {
    const double pref = boundary_prefactor(model) / step.a_prev;
    if (is_last) return 4.0 * norm.last(step.t_prev) * pref;
    const double kap = norm.interior(step.dt());
    const MergedAlgebra alg(model, step);
    const BiJet d1 = alg.at_merged(Coefficient::drift) -
                     alg.at_merged(Coefficient::a).d_next();
    const BiJet d2 =
        0.5 * (alg.at_merged(Coefficient::a) - model.a(model.L).value());
    return 4.0 * kap * pref * (alg.apply_I2(d2) + alg.apply_I(d1)).value();
}

double merged_weight_local_ibp(const Model& model, const Normalization& norm,
                               const MergedStep& step, bool is_last, bool doubled_last_coeff) {
    const double aL = model.a(model.L).value();
    const double pref_scale =
        (step.x_prev - model.L) / (std::pow(step.a_prev, 1.5) * step.sigma_L);
    const double t_var = aL * step.dt();
    if (is_last) {
        double coeff = boundary_prefactor(model);
        if (doubled_last_coeff) coeff -= model.a(model.L).deriv(1);
        const double ratio = mills_ratio_jet(t_var, step.sigma_L * step.z_sum, 0).value();
        return 4.0 * norm.last(step.t_prev) * coeff * pref_scale * ratio;
    }
    const double kap = norm.interior(step.dt());
    const MergedAlgebra alg(model, step);
    const Jet ratio = mills_ratio_jet(t_var, step.sigma_L * step.z_sum, 2);
    const BiJet ratio_b = compose(ratio, alg.offset());
    const BiJet d1 = (alg.at_merged(Coefficient::drift) -
                      alg.at_merged(Coefficient::a).d_next()) *
                     ratio_b;
    const BiJet d2 =
        (0.5 * (alg.at_merged(Coefficient::a) - aL)) * ratio_b;
    return 4.0 * kap * boundary_prefactor(model) * pref_scale *
           (alg.apply_I2(d2) + alg.apply_I(d1)).value();
}

} // namespace kmc
