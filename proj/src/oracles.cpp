#include "kmc/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace kmc {
namespace oracles {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double m, double b,
                   double fa, double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

GaussHermite GaussHermite::make(int n) {
    require(n >= 2, "GaussHermite: need at least two nodes");
    GaussHermite gh;
    gh.nodes.resize(static_cast<std::size_t>(n));
    gh.weights.resize(static_cast<std::size_t>(n));
    // Newton iteration on the physicists' Hermite polynomials.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x;
        if (i == 0)
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        else if (i == 1)
            x = gh.nodes[0] - 1.14 * std::pow(n, 0.426) / gh.nodes[0];
        else if (i == 2)
            x = 1.86 * gh.nodes[1] - 0.86 * gh.nodes[0];
        else if (i == 3)
            x = 1.91 * gh.nodes[2] - 0.91 * gh.nodes[1];
        else
            x = 2.0 * gh.nodes[static_cast<std::size_t>(i - 1)] -
                gh.nodes[static_cast<std::size_t>(i - 2)];
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0 / std::pow(pi, 0.25);
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = x * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        gh.nodes[static_cast<std::size_t>(i)] = x;
        gh.nodes[static_cast<std::size_t>(n - 1 - i)] = -x;
        const double w = 2.0 / (pp * pp);
        gh.weights[static_cast<std::size_t>(i)] = w;
        gh.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return gh;
}

double GaussHermite::expect(const std::function<double(double)>& h, double mean,
                            double variance) const {
    const double scale = std::sqrt(2.0 * variance);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        sum += weights[i] * h(mean + scale * nodes[i]);
    return sum / std::sqrt(pi);
}

double KilledBmOracle::density(double z) const {
    const double v = sigma * sigma * T;
    return gauss_density(v, z - x) - gauss_density(v, z + x - 2.0 * L);
}

double KilledBmOracle::density_dz(double z) const {
    const double v = sigma * sigma * T;
    return -(z - x) / v * gauss_density(v, z - x) +
           (z + x - 2.0 * L) / v * gauss_density(v, z + x - 2.0 * L);
}

double KilledBmOracle::density_dx(double z) const {
    const double v = sigma * sigma * T;
    return (z - x) / v * gauss_density(v, z - x) +
           (z + x - 2.0 * L) / v * gauss_density(v, z + x - 2.0 * L);
}

double KilledBmOracle::value(const std::function<double(double)>& f, double tol) const {
    const double hi = std::max(x, L) + 14.0 * sigma * std::sqrt(T);
    return adaptive_simpson([&](double z) { return f(z) * density(z); }, L, hi, tol);
}

double KilledBmOracle::value_of_derivative(const std::function<double(double)>& fprime,
                                           double tol) const {
    const double hi = std::max(x, L) + 14.0 * sigma * std::sqrt(T);
    return adaptive_simpson([&](double z) { return fprime(z) * density(z); }, L, hi, tol);
}

double KilledBmOracle::bel(const std::function<double(double)>& f, double tol) const {
    const double hi = std::max(x, L) + 14.0 * sigma * std::sqrt(T);
    return adaptive_simpson([&](double z) { return f(z) * density_dx(z); }, L, hi, tol);
}

double check_duality(const Model& model, double x_prev, int rho, double dt,
                     const std::function<double(double)>& f,
                     const std::function<double(double)>& f_deriv_l, int l,
                     const std::function<BiJet(const StepAlgebra&)>& H) {
    static const GaussHermite gh = GaussHermite::make(64);
    const double sp = model.sigma(x_prev).value();
    const double mean = rho ? x_prev : 2.0 * model.L - x_prev;
    const double variance = sp * sp * dt;

    const auto at = [&](double y) {
        Step s;
        s.x_prev = x_prev;
        s.x_next = y;
        s.rho = rho;
        s.t_prev = 0.0;
        s.t_next = dt;
        s.z = (y - mean) / sp;
        s.sigma_prev = sp;
        s.a_prev = sp * sp;
        s.reflect_base = model.L;
        return s;
    };

    const double lhs = gh.expect([&](double y) { return f_deriv_l(y) * H(StepAlgebra(model, at(y))).value(); },
                                 mean, variance);
    const double rhs = gh.expect(
        [&](double y) {
            const StepAlgebra alg(model, at(y));
            BiJet h = H(alg);
            for (int k = 0; k < l; ++k) h = alg.apply_I(h);
            return f(y) * h.value();
        },
        mean, variance);
    return std::abs(lhs - rhs);
}

namespace {

Step boundary_pinned_step(const Model& model, double x_prev, int rho, double t_prev, double dt,
                          double y) {
    Step s;
    s.x_prev = x_prev;
    s.x_next = y;
    s.rho = rho;
    s.t_prev = t_prev;
    s.t_next = t_prev + dt;
    s.sigma_prev = model.sigma(x_prev).value();
    s.a_prev = s.sigma_prev * s.sigma_prev;
    s.reflect_base = model.L;
    const double mean = rho ? x_prev : 2.0 * model.L - x_prev;
    s.z = (y - mean) / s.sigma_prev;
    return s;
}

} // namespace

TransferCheck check_transfer(const Model& model, double x_prev, double dt, const TestFunction& f,
                             bool last) {
    // Poisson normalization with lambda = 1; for the last interval both sides
    // carry the same e^{lambda T} factor, so any consistent horizon works.
    const double T = last ? dt : 2.0 * dt;
    const Normalization norm = Normalization::poisson(1.0, T);
    const double t_prev = last ? 0.0 : 0.0;
    const double fL = f.vanishes_at_L ? 0.0 : f.value(model.L);

    TransferCheck out;
    {
        double sum = 0.0;
        const double sp = model.sigma(x_prev).value();
        const double v = sp * sp * dt;
        for (int rho = 0; rho <= 1; ++rho) {
            const double mean = rho ? x_prev : 2.0 * model.L - x_prev;
            const double hi = std::max(x_prev, model.L) + 14.0 * std::sqrt(v);
            sum += 0.5 * adaptive_simpson(
                             [&](double y) {
                                 const Step s =
                                     boundary_pinned_step(model, x_prev, rho, t_prev, dt, y);
                                 const StepWeights w = step_weights(model, norm, s, last);
                                 return f.derivative(y) * w.theta_bar * gauss_density(v, y - mean);
                             },
                             model.L, hi, 1e-11);
        }
        out.lhs = sum;
    }

    const auto exchange_expectation = [&](double x) {
        double sum = 0.0;
        const double sp = model.sigma(x).value();
        const double v = sp * sp * dt;
        for (int rho = 0; rho <= 1; ++rho) {
            const double mean = rho ? x : 2.0 * model.L - x;
            const double hi = std::max(x, model.L) + 14.0 * std::sqrt(v);
            sum += 0.5 * adaptive_simpson(
                             [&](double y) {
                                 const Step s = boundary_pinned_step(model, x, rho, t_prev, dt, y);
                                 const StepWeights w = step_weights(model, norm, s, last);
                                 return (f.value(y) - fL) * w.theta_e_back *
                                        gauss_density(v, y - mean);
                             },
                             model.L, hi, 1e-12);
        }
        return sum;
    };

    const double h = 1e-5;
    const double flow_term =
        (exchange_expectation(x_prev + h) - exchange_expectation(x_prev - h)) / (2.0 * h);

    double corr_term = 0.0;
    {
        const double sp = model.sigma(x_prev).value();
        const double v = sp * sp * dt;
        for (int rho = 0; rho <= 1; ++rho) {
            const double mean = rho ? x_prev : 2.0 * model.L - x_prev;
            const double hi = std::max(x_prev, model.L) + 14.0 * std::sqrt(v);
            corr_term += 0.5 * adaptive_simpson(
                                   [&](double y) {
                                       const Step s = boundary_pinned_step(model, x_prev, rho,
                                                                           t_prev, dt, y);
                                       const StepWeights w = step_weights(model, norm, s, last);
                                       return (f.value(y) - fL) * w.theta_c_back *
                                              gauss_density(v, y - mean);
                                   },
                                   model.L, hi, 1e-11);
        }
    }

    double boundary_term = 0.0;
    if (!last) {
        const double sp = model.sigma(x_prev).value();
        const double v = sp * sp * dt;
        for (int rho = 0; rho <= 1; ++rho) {
            const double mean = rho ? x_prev : 2.0 * model.L - x_prev;
            const Step s = boundary_pinned_step(model, x_prev, rho, t_prev, dt, model.L);
            const StepWeights w = step_weights(model, norm, s, false);
            boundary_term +=
                0.5 * (f.value(model.L) - fL) * w.theta_partial_back * gauss_density(v, model.L - mean);
        }
    }

    out.rhs = flow_term + corr_term + boundary_term;
    return out;
}

MergingCheck check_merging(const Model& model, double x_prev, double dt_total,
                           const std::function<double(double)>& f, MergingIdentity which,
                           bool doubled_last_coeff) {
    const bool last = which == MergingIdentity::last_star || which == MergingIdentity::last_circledast;
    const bool star = which == MergingIdentity::star || which == MergingIdentity::last_star;
    const Normalization norm = Normalization::poisson(1.0, dt_total);
    const double L = model.L;
    const double aL = model.a(L).value();
    const double sL = std::sqrt(aL);
    const double ax = model.a(x_prev).value();

    // Inner expectation over the second (post-boundary) transition started at
    // L, integrated in the normalized coordinate so narrow transitions stay
    // resolved.
    const auto psi = [&](double dtp) -> double {
        const double w_scale = std::sqrt(aL * dtp);
        double sum = 0.0;
        for (int rho = 0; rho <= 1; ++rho) {
            sum += 0.5 * adaptive_simpson(
                             [&](double xi) {
                                 const double y = L + w_scale * xi;
                                 const Step s = boundary_pinned_step(model, L, rho,
                                                                     dt_total - dtp, dtp, y);
                                 const StepWeights w = step_weights(model, norm, s, last);
                                 return f(y) * w.theta_e_back *
                                        std::exp(-0.5 * xi * xi) / std::sqrt(2.0 * pi);
                             },
                             0.0, 14.0, 1e-11);
        }
        return sum;
    };

    // Boundary factor on the first transition, pinned at L, averaged over rho.
    const auto boundary_kernel = [&](double s_len) -> double {
        double sum = 0.0;
        for (int rho = 0; rho <= 1; ++rho) {
            const Step s = boundary_pinned_step(model, x_prev, rho, 0.0, s_len, L);
            const StepWeights w = step_weights(model, norm, s, false);
            const double weight = star ? w.theta_partial_back : s_len * w.theta_bar;
            const double mean = rho ? x_prev : 2.0 * L - x_prev;
            sum += 0.5 * weight * gauss_density(ax * s_len, L - mean);
        }
        return sum;
    };

    // LHS: uniform intermediate time; substitute s = dt_total - v^2 to absorb
    // the inverse square-root edge at the merged end.
    const double sqrt_dt = std::sqrt(dt_total);
    const double lhs =
        (1.0 / dt_total) *
        adaptive_simpson(
            [&](double v) {
                const double s_len = dt_total - v * v;
                if (s_len <= 0.0 || s_len >= dt_total) return 0.0;
                return 2.0 * v * boundary_kernel(s_len) * psi(dt_total - s_len);
            },
            0.0, sqrt_dt, 1e-9);

    // RHS: one-dimensional Gaussian quadrature of the merged weight.
    const double mu = -sL / model.sigma(x_prev).value();
    const double mean = L * (1.0 - mu) + x_prev * mu;
    const double v_tot = aL * dt_total;
    const double hi = L + 14.0 * std::sqrt(v_tot);
    const double orientation = star ? 1.0 : -1.0;
    const double rhs_integral = adaptive_simpson(
        [&](double y) {
            MergedStep ms = merged_transition(model, x_prev, (y - mean) / sL, 0.0, dt_total);
            ms.x_merged = y;
            ms.z_sum = (y - mean) / sL;
            const double w = star ? merged_weight_transfer(model, norm, ms, last)
                                  : merged_weight_local_ibp(model, norm, ms, last,
                                                            doubled_last_coeff);
            return f(y) * w * gauss_density(v_tot, y - mean);
        },
        L, hi, 1e-11);

    MergingCheck out;
    out.lhs = lhs;
    out.rhs = orientation * norm.interior(dt_total) / dt_total * rhs_integral;
    out.scale = std::max({std::abs(out.lhs), std::abs(out.rhs), 1e-8});
    return out;
}

namespace {

double dgauss(double t, double y, int l) {
    const double g = gauss_density(t, y);
    switch (l) {
    case 0: return g;
    case 1: return -(y / t) * g;
    case 2: return (y * y / (t * t) - 1.0 / t) * g;
    default: require(false, "dgauss: order out of range"); return 0.0;
    }
}

double dtail(double t, double y, int l) {
    // d^l/dy^l of the tail mass above |y|, for y > 0.
    if (l == 0) return gauss_tail_abs(t, y);
    return -dgauss(t, y, l - 1);
}

} // namespace

double check_gaussian_convolution(double alpha, double beta, double x, double y, double t, int l,
                                  bool weighted) {
    require(alpha > 0.0 && beta > 0.0 && x > 0.0 && t > 0.0,
            "check_gaussian_convolution: bad arguments");
    require(y > 0.0 || l == 0, "check_gaussian_convolution: derivatives need y > 0");
    const auto integrand = [&](double s) -> double {
        if (s <= 0.0 || s >= t) return 0.0;
        const double dxg = -(x / (alpha * alpha * s)) * gauss_density(alpha * alpha * s, x);
        const double tail = dgauss(beta * beta * (t - s), y, l);
        return (weighted ? s : 1.0) * dxg * tail;
    };
    const double lhs = adaptive_simpson(integrand, 0.0, t, 1e-12);
    const double arg = y + beta / alpha * x;
    const double rhs = weighted
                           ? -x / (alpha * alpha * alpha * beta) * dtail(beta * beta * t, arg, l)
                           : -1.0 / (alpha * alpha) * dgauss(beta * beta * t, arg, l);
    return std::abs(lhs - rhs);
}

double check_reduction(const Model& model, double x_prev, double dt,
                       const std::function<double(double)>& f, int l_pow, int k_ord) {
    require(k_ord >= 1 && k_ord <= 2, "check_reduction: k must be 1 or 2");
    const double sp = model.sigma(x_prev).value();
    const double v = sp * sp * dt;
    const auto term = [&](int parity_pow) {
        double sum = 0.0;
        for (int rho = 0; rho <= 1; ++rho) {
            const double mean = rho ? x_prev : 2.0 * model.L - x_prev;
            const double zpin = (model.L - mean) / sp;
            const double sgn = std::pow(2.0 * rho - 1.0, parity_pow);
            sum += 0.5 * f(model.L) * sgn * integral_of_one(k_ord, v, sp * zpin) *
                   gauss_density(v, model.L - mean);
        }
        return sum;
    };
    const double lhs = term(l_pow);
    const double rhs = (l_pow + k_ord) % 2 == 1 ? 0.0 : term(k_ord);
    return std::abs(lhs - rhs);
}

double check_reduction_smooth(const Model& model, double x_prev, double dt,
                              const std::function<double(double)>& f,
                              const std::function<Jet(double)>& c, int k_ord) {
    require(k_ord >= 1 && k_ord <= 2, "check_reduction_smooth: k must be 1 or 2");
    const double sp = model.sigma(x_prev).value();
    const double v = sp * sp * dt;
    const Jet cL = c(model.L);
    double lhs = 0.0, rhs = 0.0;
    for (int rho = 0; rho <= 1; ++rho) {
        const double mean = rho ? x_prev : 2.0 * model.L - x_prev;
        const double zpin = (model.L - mean) / sp;
        const double dens = gauss_density(v, model.L - mean);
        const double sgn = 2.0 * rho - 1.0;
        // I^k(c) at the boundary via extraction.
        double ick = 0.0;
        if (k_ord == 1)
            ick = cL.value() * integral_of_one(1, v, sp * zpin) - cL.deriv(1);
        else
            ick = cL.value() * integral_of_one(2, v, sp * zpin) -
                  2.0 * cL.deriv(1) * integral_of_one(1, v, sp * zpin) + cL.deriv(2);
        lhs += 0.5 * f(model.L) * std::pow(sgn, k_ord) * ick * dens;
        // Parity-surviving expansion terms.
        for (int j = 0; j <= k_ord; ++j) {
            if ((2 * k_ord - j) % 2 == 1) continue;
            const double binom = k_ord == 1 ? 1.0 : (j == 1 ? 2.0 : 1.0);
            const double io =
                k_ord - j == 0 ? 1.0 : integral_of_one(k_ord - j, v, sp * zpin);
            rhs += 0.5 * f(model.L) * std::pow(-1.0, j) * binom * cL.deriv(j) *
                   std::pow(sgn, k_ord - j) * io * dens;
        }
    }
    return std::abs(lhs - rhs);
}

namespace {

// Paired two-estimator comparison on common paths; the z-score uses the
// standard error of the per-path differences.
template <class Fa, class Fb>
FdCheck paired_check(Fa&& eval_a, Fb&& eval_b, long long samples) {
    double a_sum = 0.0, a_sq = 0.0, b_sum = 0.0, b_sq = 0.0, d_sum = 0.0, d_sq = 0.0;
    for (long long r = 0; r < samples; ++r) {
        const double a = eval_a(r);
        const double b = eval_b(r);
        a_sum += a;
        a_sq += a * a;
        b_sum += b;
        b_sq += b * b;
        const double d = a - b;
        d_sum += d;
        d_sq += d * d;
    }
    const double n = static_cast<double>(samples);
    FdCheck out;
    out.bel_mean = a_sum / n;
    out.fd_mean = b_sum / n;
    out.bel_se = std::sqrt(std::max(0.0, a_sq / n - out.bel_mean * out.bel_mean) / n);
    out.fd_se = std::sqrt(std::max(0.0, b_sq / n - out.fd_mean * out.fd_mean) / n);
    const double d_mean = d_sum / n;
    const double d_se = std::sqrt(std::max(0.0, d_sq / n - d_mean * d_mean) / n);
    out.z_score = d_se > 0.0 ? d_mean / d_se : 0.0;
    return out;
}

} // namespace

FdCheck fd_consistency_bel(const Model& model, const TestFunction& f, const JumpLaw& law,
                           long long samples, double h, std::uint64_t seed) {
    const Normalization norm = Normalization::renewal(law, model.T);
    Model up = model, down = model;
    up.x0 = model.x0 + h;
    down.x0 = model.x0 - h;
    std::vector<Path> paths;
    paths.reserve(static_cast<std::size_t>(samples));
    for (long long r = 0; r < samples; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r));
        paths.push_back(sample_path(law, model.T, rng));
    }
    return paired_check(
        [&](long long r) {
            return bel_term(model, norm, f, paths[static_cast<std::size_t>(r)]) / model.T;
        },
        [&](long long r) {
            const Path& p = paths[static_cast<std::size_t>(r)];
            return (value_term(up, norm, f, p) - value_term(down, norm, f, p)) / (2.0 * h);
        },
        samples);
}

FdCheck backward_vs_value(const Model& model, const TestFunction& f, const TestFunction& f_prime,
                          const JumpLaw& law, long long samples, std::uint64_t seed) {
    require(std::abs(f_prime.value(model.L)) < 1e-12,
            "backward_vs_value: f' must vanish at the barrier");
    const Normalization norm = Normalization::renewal(law, model.T);
    std::vector<Path> paths;
    paths.reserve(static_cast<std::size_t>(samples));
    for (long long r = 0; r < samples; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r));
        paths.push_back(sample_path(law, model.T, rng));
    }
    return paired_check(
        [&](long long r) {
            return ibp_backward_term(model, norm, f, paths[static_cast<std::size_t>(r)]) /
                   model.T;
        },
        [&](long long r) {
            return value_term(model, norm, f_prime, paths[static_cast<std::size_t>(r)]);
        },
        samples);
}

double mittag_leffler(double alpha, double beta, double z) {
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double term = std::pow(z, k) / std::tgamma(beta + k * alpha);
        sum += term;
        if (k > 4 && std::abs(term) < 1e-14 * std::abs(sum)) break;
    }
    return sum;
}

} // namespace oracles
} // namespace kmc
