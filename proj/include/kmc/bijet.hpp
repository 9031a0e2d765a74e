#pragma once

#include <algorithm>
#include <array>

#include "kmc/common.hpp"
#include "kmc/jet.hpp"

namespace kmc {

// Truncated bivariate Taylor expansion: raw partial derivatives
// d[i][j] = d^i/dx^i d^j/dy^j F of a function of two variables (here: the
// previous and next state of one chain transition), kept to total order <= 3.
// `ord` is the trusted total order; partial differentiation lowers it.
struct BiJet {
    std::array<std::array<double, 4>, 4> d{}; // d[i][j], i + j <= 3
    int ord = 3;

    double value() const { return d[0][0]; }

    static BiJet constant(double c, int ord = 3) {
        BiJet b;
        b.d[0][0] = c;
        b.ord = ord;
        return b;
    }
    static BiJet var_prev(double x, int ord = 3) {
        BiJet b;
        b.d[0][0] = x;
        b.d[1][0] = 1.0;
        b.ord = ord;
        return b;
    }
    static BiJet var_next(double y, int ord = 3) {
        BiJet b;
        b.d[0][0] = y;
        b.d[0][1] = 1.0;
        b.ord = ord;
        return b;
    }

    // Partial derivative in the first (previous-state) variable.
    BiJet d_prev() const {
        require(ord >= 1, "BiJet: insufficient order for d_prev");
        BiJet r;
        r.ord = ord - 1;
        for (int i = 0; i <= r.ord; ++i)
            for (int j = 0; i + j <= r.ord; ++j) r.d[i][j] = d[i + 1][j];
        return r;
    }
    // Partial derivative in the second (next-state) variable.
    BiJet d_next() const {
        require(ord >= 1, "BiJet: insufficient order for d_next");
        BiJet r;
        r.ord = ord - 1;
        for (int i = 0; i <= r.ord; ++i)
            for (int j = 0; i + j <= r.ord; ++j) r.d[i][j] = d[i][j + 1];
        return r;
    }
};

inline BiJet operator+(const BiJet& a, const BiJet& b) {
    BiJet r;
    r.ord = std::min(a.ord, b.ord);
    for (int i = 0; i <= r.ord; ++i)
        for (int j = 0; i + j <= r.ord; ++j) r.d[i][j] = a.d[i][j] + b.d[i][j];
    return r;
}

inline BiJet operator-(const BiJet& a, const BiJet& b) {
    BiJet r;
    r.ord = std::min(a.ord, b.ord);
    for (int i = 0; i <= r.ord; ++i)
        for (int j = 0; i + j <= r.ord; ++j) r.d[i][j] = a.d[i][j] - b.d[i][j];
    return r;
}

inline BiJet operator*(double s, const BiJet& a) {
    BiJet r = a;
    for (int i = 0; i <= r.ord; ++i)
        for (int j = 0; i + j <= r.ord; ++j) r.d[i][j] = s * a.d[i][j];
    return r;
}

inline BiJet operator*(const BiJet& a, double s) { return s * a; }

inline BiJet operator+(const BiJet& a, double c) {
    BiJet r = a;
    r.d[0][0] += c;
    return r;
}

inline BiJet operator-(const BiJet& a, double c) { return a + (-c); }
inline BiJet operator-(double c, const BiJet& a) { return (-1.0) * a + c; }

inline BiJet operator*(const BiJet& a, const BiJet& b) {
    static constexpr double binom[4][4] = {
        {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    BiJet r;
    r.ord = std::min(a.ord, b.ord);
    for (int i = 0; i <= r.ord; ++i)
        for (int j = 0; i + j <= r.ord; ++j) {
            double s = 0.0;
            for (int p = 0; p <= i; ++p)
                for (int q = 0; q <= j; ++q)
                    s += binom[i][p] * binom[j][q] * a.d[p][q] * b.d[i - p][j - q];
            r.d[i][j] = s;
        }
    return r;
}

inline BiJet recip(const BiJet& a) {
    require(a.d[0][0] != 0.0, "BiJet: reciprocal of zero");
    const double i0 = 1.0 / a.d[0][0];
    BiJet e = a;
    e.d[0][0] = 0.0; // e = (a - a0), expand 1/a = (1 - e/a0 + (e/a0)^2 - ...) / a0
    e = i0 * e;
    BiJet r = BiJet::constant(1.0, a.ord) - e + e * e - e * e * e;
    return i0 * r;
}

inline BiJet operator/(const BiJet& a, const BiJet& b) { return a * recip(b); }

// Compose a univariate jet (expanded at u.value()) with a bivariate argument.
inline BiJet compose(const Jet& f, const BiJet& u) {
    BiJet du = u;
    du.d[0][0] = 0.0;
    const int ord = std::min(f.ord, u.ord);
    // Horner form of f(u0 + du) truncated at total order 3.
    BiJet r = BiJet::constant(f.d[3] / 6.0, ord);
    r = r * du + BiJet::constant(f.d[2] / 2.0, ord);
    r = r * du + BiJet::constant(f.d[1], ord);
    r = r * du + BiJet::constant(f.d[0], ord);
    return r;
}

} // namespace kmc
