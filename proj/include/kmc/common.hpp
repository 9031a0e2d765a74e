#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace kmc {

// Thrown when a caller violates a documented precondition.
class contract_violation : public std::logic_error {
public:
    explicit contract_violation(const std::string& what) : std::logic_error(what) {}
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw contract_violation(msg);
}

inline constexpr double pi = 3.14159265358979323846;

// Heat kernel: density at x of a centered Gaussian with variance t.
inline double gauss_density(double t, double x) {
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * pi * t);
}

// Standard normal cdf and tail, accurate in both tails.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double norm_tail(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

// Upper tail mass of a centered Gaussian with variance t above |z|.
inline double gauss_tail_abs(double t, double z) {
    return norm_tail(std::abs(z) / std::sqrt(t));
}

} // namespace kmc
