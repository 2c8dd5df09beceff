#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ut/errors.hpp"
#include "ut/lti.hpp"
#include "ut/poly.hpp"

namespace ut {

/// Difference equation in z^-1 form with a[0] == 1:
///   y[n] = sum b[i] u[n-i] - sum_{i>=1} a[i] y[n-i]
/// realized in direct form II transposed. Dead time becomes a whole-sample
/// delay line on the input.
class DiscreteFilter {
public:
    DiscreteFilter() = default;

    DiscreteFilter(std::vector<double> b, std::vector<double> a, std::size_t delay_samples = 0)
        : b_(std::move(b)), a_(std::move(a)), delay_(delay_samples, 0.0) {
        state_.assign(std::max(b_.size(), a_.size()) - 1, 0.0);
    }

    double step(double u) {
        if (!delay_.empty()) {
            const double head = delay_[pos_];
            delay_[pos_] = u;
            pos_ = (pos_ + 1) % delay_.size();
            u = head;
        }
        const double y = b_[0] * u + (state_.empty() ? 0.0 : state_[0]);
        for (std::size_t i = 0; i + 1 < state_.size(); ++i)
            state_[i] = state_[i + 1] + bi(i + 1) * u - ai(i + 1) * y;
        if (!state_.empty())
            state_.back() = bi(state_.size()) * u - ai(state_.size()) * y;
        return y;
    }

    void reset() {
        std::fill(state_.begin(), state_.end(), 0.0);
        std::fill(delay_.begin(), delay_.end(), 0.0);
        pos_ = 0;
    }

    [[nodiscard]] const std::vector<double>& b() const { return b_; }
    [[nodiscard]] const std::vector<double>& a() const { return a_; }

private:
    [[nodiscard]] double bi(std::size_t i) const { return i < b_.size() ? b_[i] : 0.0; }
    [[nodiscard]] double ai(std::size_t i) const { return i < a_.size() ? a_[i] : 0.0; }

    std::vector<double> b_{1.0};
    std::vector<double> a_{1.0};
    std::vector<double> state_;
    std::vector<double> delay_;
    std::size_t pos_ = 0;
};

/// Tustin (bilinear) discretization, s = (2/dt)(z-1)/(z+1). Dead time is
/// rounded to whole samples. Improper functions have no causal realization.
[[nodiscard]] inline DiscreteFilter discretize(const TransferFunction& tf, double dt) {
    if (!(dt > 0.0)) throw OutOfRange("discretize requires dt > 0");
    if (!tf.proper()) throw ImproperTf("cannot discretize an improper transfer function");

    const std::vector<double> num = poly::trim(tf.num);
    const std::vector<double> den = poly::trim(tf.den);
    const std::size_t n = den.size() - 1; // realization order

    // Each term c * s^p maps to c * (2/dt)^p (z-1)^p (z+1)^(n-p); accumulate
    // the resulting degree-n polynomials in z.
    const double k = 2.0 / dt;
    auto map_poly = [&](const std::vector<double>& c) {
        std::vector<double> out(n + 1, 0.0);
        const std::size_t cd = c.size() - 1;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::size_t p = cd - i; // power of s for this coefficient
            std::vector<double> term{c[i] * std::pow(k, static_cast<double>(p))};
            for (std::size_t j = 0; j < p; ++j) term = poly::mul(term, {1.0, -1.0});
            for (std::size_t j = 0; j < n - p; ++j) term = poly::mul(term, {1.0, 1.0});
            out = poly::add(out, term);
        }
        return out;
    };

    std::vector<double> bz = map_poly(num);
    std::vector<double> az = map_poly(den);
    const double lead = az[0];
    for (double& v : bz) v /= lead;
    for (double& v : az) v /= lead;

    const auto delay = static_cast<std::size_t>(std::llround(tf.dead_time / dt));
    return {std::move(bz), std::move(az), delay};
}

} // namespace ut
