#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace ut::poly {

// Dense real polynomials, coefficients in descending powers: {a, b, c} = a s^2 + b s + c.

/// Drop leading (highest-power) coefficients that are exactly zero; keeps at least one entry.
inline std::vector<double> trim(std::vector<double> c) {
    std::size_t i = 0;
    while (i + 1 < c.size() && c[i] == 0.0) ++i;
    c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(i));
    return c;
}

[[nodiscard]] inline std::size_t degree(const std::vector<double>& c) {
    return trim(c).size() - 1;
}

/// Product of two polynomials (convolution of coefficient lists).
[[nodiscard]] inline std::vector<double> mul(const std::vector<double>& a,
                                             const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    return out;
}

/// Sum of two polynomials, aligned at the constant term.
[[nodiscard]] inline std::vector<double> add(const std::vector<double>& a,
                                             const std::vector<double>& b) {
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
    return out;
}

[[nodiscard]] inline std::vector<double> scale(std::vector<double> c, double k) {
    for (double& v : c) v *= k;
    return c;
}

/// Horner evaluation at a complex point.
[[nodiscard]] inline std::complex<double> eval(const std::vector<double>& c,
                                               std::complex<double> s) {
    std::complex<double> acc{0.0, 0.0};
    for (double v : c) acc = acc * s + v;
    return acc;
}

[[nodiscard]] inline double eval_real(const std::vector<double>& c, double s) {
    double acc = 0.0;
    for (double v : c) acc = acc * s + v;
    return acc;
}

/// Coefficients of the derivative polynomial.
[[nodiscard]] inline std::vector<double> derivative(const std::vector<double>& c) {
    const std::vector<double> t = trim(c);
    if (t.size() == 1) return {0.0};
    std::vector<double> out(t.size() - 1);
    const std::size_t deg = t.size() - 1;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = t[i] * static_cast<double>(deg - i);
    return out;
}

} // namespace ut::poly
