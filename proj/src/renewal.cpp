#include "kmc/renewal.hpp"

#include <cmath>
#include <sstream>

#include "kmc/common.hpp"

namespace kmc {

namespace {

double beta_cf(double a, double b, double x) {
    // Lentz continued fraction for the incomplete beta, as in the classic
    // numerical-recipes formulation.
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

double parse_value(const std::string& body, const std::string& key) {
    const std::string token = key + "=";
    const auto pos = body.find(token);
    require(pos != std::string::npos, "JumpLaw::parse: missing parameter");
    const auto start = pos + token.size();
    auto end = body.find(',', start);
    if (end == std::string::npos) end = body.size();
    return std::stod(body.substr(start, end - start));
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    require(a > 0.0 && b > 0.0, "incomplete_beta: shape parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          b * std::log1p(-x) + a * std::log(x)) *
                     beta_cf(b, a, 1.0 - x) / b;
}

JumpLaw JumpLaw::exponential(double lambda) {
    require(lambda > 0.0, "JumpLaw: lambda must be positive");
    JumpLaw l;
    l.kind_ = Kind::exponential;
    l.lambda_ = lambda;
    return l;
}

JumpLaw JumpLaw::beta_one(double alpha, double tau_bar) {
    require(alpha > 0.0 && alpha < 1.0, "JumpLaw: alpha must lie in (0,1)");
    require(tau_bar > 0.0, "JumpLaw: tau_bar must be positive");
    JumpLaw l;
    l.kind_ = Kind::beta_one;
    l.alpha_ = alpha;
    l.tau_bar_ = tau_bar;
    return l;
}

JumpLaw JumpLaw::beta_two(double alpha, double beta, double tau_bar) {
    require(alpha > 0.0 && alpha < 1.0, "JumpLaw: alpha must lie in (0,1)");
    require(beta > 0.0 && beta < 1.0, "JumpLaw: beta must lie in (0,1)");
    require(tau_bar > 0.0, "JumpLaw: tau_bar must be positive");
    JumpLaw l;
    l.kind_ = Kind::beta_two;
    l.alpha_ = alpha;
    l.beta_ = beta;
    l.tau_bar_ = tau_bar;
    return l;
}

JumpLaw JumpLaw::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    require(colon != std::string::npos, "JumpLaw::parse: expected '<kind>:<params>'");
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);
    if (kind == "exp") return exponential(parse_value(body, "lambda"));
    if (kind == "beta1") return beta_one(parse_value(body, "alpha"), parse_value(body, "tau"));
    if (kind == "beta2")
        return beta_two(parse_value(body, "alpha"), parse_value(body, "beta"),
                        parse_value(body, "tau"));
    throw contract_violation("JumpLaw::parse: unknown law '" + kind + "'");
}

std::string JumpLaw::spec() const {
    std::ostringstream os;
    switch (kind_) {
    case Kind::exponential: os << "exp:lambda=" << lambda_; break;
    case Kind::beta_one: os << "beta1:alpha=" << alpha_ << ",tau=" << tau_bar_; break;
    case Kind::beta_two:
        os << "beta2:alpha=" << alpha_ << ",beta=" << beta_ << ",tau=" << tau_bar_;
        break;
    }
    return os.str();
}

double JumpLaw::density(double t) const {
    switch (kind_) {
    case Kind::exponential:
        require(t >= 0.0, "JumpLaw::density: t outside support");
        return lambda_ * std::exp(-lambda_ * t);
    case Kind::beta_one:
        require(t > 0.0 && t <= tau_bar_, "JumpLaw::density: t outside support");
        return (1.0 - alpha_) / std::pow(tau_bar_, 1.0 - alpha_) * std::pow(t, -alpha_);
    case Kind::beta_two: {
        require(t > 0.0 && t < tau_bar_, "JumpLaw::density: t outside support");
        const double ln_b =
            std::lgamma(alpha_) + std::lgamma(beta_) - std::lgamma(alpha_ + beta_);
        return std::exp((1.0 - alpha_ - beta_) * std::log(tau_bar_) - ln_b +
                        (alpha_ - 1.0) * std::log(t) + (beta_ - 1.0) * std::log(tau_bar_ - t));
    }
    }
    return 0.0;
}

double JumpLaw::cdf(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
    case Kind::exponential: return -std::expm1(-lambda_ * t);
    case Kind::beta_one:
        return t >= tau_bar_ ? 1.0 : std::pow(t / tau_bar_, 1.0 - alpha_);
    case Kind::beta_two:
        return t >= tau_bar_ ? 1.0 : incomplete_beta(alpha_, beta_, t / tau_bar_);
    }
    return 0.0;
}

double JumpLaw::survival(double t) const {
    if (kind_ != Kind::exponential)
        require(t < tau_bar_, "JumpLaw::survival: argument at or beyond the support edge");
    if (kind_ == Kind::exponential) return std::exp(-lambda_ * t);
    return 1.0 - cdf(t);
}

double JumpLaw::sample_gap(Rng& rng) const {
    const double u = rng.uniform();
    switch (kind_) {
    case Kind::exponential: return -std::log1p(-u) / lambda_;
    case Kind::beta_one: return tau_bar_ * std::pow(u, 1.0 / (1.0 - alpha_));
    case Kind::beta_two: {
        // Bracketed bisection on the incomplete beta; monotone, so this is
        // reproducible across platforms to the stated tolerance.
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (incomplete_beta(alpha_, beta_, mid) < u)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-12) break;
        }
        return tau_bar_ * 0.5 * (lo + hi);
    }
    }
    return 0.0;
}

bool JumpLaw::variance_condition(double p) const {
    require(p >= 1.0, "variance_condition: p must be >= 1");
    double s0 = 0.0; // density ~ t^{-s0} near 0+
    switch (kind_) {
    case Kind::exponential: s0 = 0.0; break;
    case Kind::beta_one: s0 = alpha_; break;
    case Kind::beta_two: s0 = 1.0 - alpha_; break;
    }
    return p * (0.5 - s0) < 1.0 - s0;
}

Path sample_path(const JumpLaw& law, double T, Rng& rng) {
    require(T > 0.0, "sample_path: horizon must be positive");
    if (law.kind() != JumpLaw::Kind::exponential)
        require(law.tau_bar() > T, "sample_path: Beta laws need tau_bar > T");
    Path p;
    p.T = T;
    double t = 0.0;
    while (true) {
        const double t_next = t + law.sample_gap(rng);
        if (!(t_next < T)) break;
        // Zero-length intervals can appear when a heavy-tailed gap underflows
        // at double precision; the jump times are a.s. distinct, so drop the
        // degenerate jump to keep the skeleton strictly increasing.
        if (t_next > t) p.times.push_back(t_next);
        t = t_next;
    }
    p.n_jumps = static_cast<int>(p.times.size());
    const int m = p.n_jumps + 1;
    p.gaussians.resize(static_cast<std::size_t>(m));
    p.bernoullis.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) p.gaussians[static_cast<std::size_t>(i)] = rng.normal();
    for (int i = 0; i < m; ++i) p.bernoullis[static_cast<std::size_t>(i)] = rng.bernoulli();
    return p;
}

} // namespace kmc
