#pragma once

#include <array>
#include <cmath>

#include "kmc/common.hpp"

namespace kmc {

// Truncated Taylor expansion of a scalar function of one variable: the value
// and derivatives up to order `ord` (at most 3) at a point. `ord` tracks how
// many derivatives are trustworthy, so differentiating a jet lowers it.
struct Jet {
    std::array<double, 4> d{0.0, 0.0, 0.0, 0.0}; // d[k] = k-th derivative
    int ord = 3;

    double value() const { return d[0]; }
    double deriv(int k) const {
        require(k >= 0 && k <= ord, "Jet: derivative order out of range");
        return d[k];
    }

    static Jet constant(double c, int ord = 3) {
        Jet j;
        j.d[0] = c;
        j.ord = ord;
        return j;
    }
    // The identity function x -> x expanded at `x`.
    static Jet variable(double x, int ord = 3) {
        Jet j;
        j.d[0] = x;
        if (ord >= 1) j.d[1] = 1.0;
        j.ord = ord;
        return j;
    }

    // d/dx as a new jet (one order lower).
    Jet differentiate() const {
        require(ord >= 1, "Jet: cannot differentiate an order-0 jet");
        Jet r;
        r.ord = ord - 1;
        for (int k = 0; k <= r.ord; ++k) r.d[k] = d[k + 1];
        return r;
    }
};

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    r.ord = std::min(a.ord, b.ord);
    for (int k = 0; k <= r.ord; ++k) r.d[k] = a.d[k] + b.d[k];
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    r.ord = std::min(a.ord, b.ord);
    for (int k = 0; k <= r.ord; ++k) r.d[k] = a.d[k] - b.d[k];
    return r;
}

inline Jet operator*(double s, const Jet& a) {
    Jet r = a;
    for (int k = 0; k <= r.ord; ++k) r.d[k] = s * a.d[k];
    return r;
}

inline Jet operator*(const Jet& a, double s) { return s * a; }

inline Jet operator+(const Jet& a, double c) {
    Jet r = a;
    r.d[0] += c;
    return r;
}

inline Jet operator-(const Jet& a, double c) { return a + (-c); }

// Leibniz product up to the shared trusted order.
inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.ord = std::min(a.ord, b.ord);
    r.d[0] = a.d[0] * b.d[0];
    if (r.ord >= 1) r.d[1] = a.d[1] * b.d[0] + a.d[0] * b.d[1];
    if (r.ord >= 2) r.d[2] = a.d[2] * b.d[0] + 2.0 * a.d[1] * b.d[1] + a.d[0] * b.d[2];
    if (r.ord >= 3)
        r.d[3] = a.d[3] * b.d[0] + 3.0 * a.d[2] * b.d[1] + 3.0 * a.d[1] * b.d[2] + a.d[0] * b.d[3];
    return r;
}

inline Jet recip(const Jet& a) {
    require(a.d[0] != 0.0, "Jet: reciprocal of zero");
    Jet r;
    r.ord = a.ord;
    const double i0 = 1.0 / a.d[0];
    r.d[0] = i0;
    if (r.ord >= 1) r.d[1] = -a.d[1] * i0 * i0;
    if (r.ord >= 2) r.d[2] = (2.0 * a.d[1] * a.d[1] * i0 - a.d[2]) * i0 * i0;
    if (r.ord >= 3)
        r.d[3] = (-6.0 * a.d[1] * a.d[1] * a.d[1] * i0 * i0 + 6.0 * a.d[1] * a.d[2] * i0 - a.d[3]) *
                 i0 * i0;
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }

// Compose an outer univariate function (given as derivative values f, f', f'',
// f''' at a.value()) with the inner jet `a`.
inline Jet compose(const std::array<double, 4>& f, int ford, const Jet& a) {
    // Faa di Bruno to order 3.
    Jet r;
    r.ord = std::min(ford, a.ord);
    r.d[0] = f[0];
    if (r.ord >= 1) r.d[1] = f[1] * a.d[1];
    if (r.ord >= 2) r.d[2] = f[2] * a.d[1] * a.d[1] + f[1] * a.d[2];
    if (r.ord >= 3)
        r.d[3] = f[3] * a.d[1] * a.d[1] * a.d[1] + 3.0 * f[2] * a.d[1] * a.d[2] + f[1] * a.d[3];
    return r;
}

inline Jet sin(const Jet& a) {
    const double s = std::sin(a.d[0]), c = std::cos(a.d[0]);
    return compose({s, c, -s, -c}, 3, a);
}

inline Jet cos(const Jet& a) {
    const double s = std::sin(a.d[0]), c = std::cos(a.d[0]);
    return compose({c, -s, -c, s}, 3, a);
}

} // namespace kmc
