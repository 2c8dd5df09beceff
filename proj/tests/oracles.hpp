#pragma once

// Independent closed-form oracles the test suite checks library output
// against. Everything here is derived by hand from textbook formulas and
// deliberately avoids the code paths under test.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ut/session.hpp"
#include "ut/trace.hpp"

namespace oracle {

/// Step response of a / (s + a) closed at unity dc gain: 1 - exp(-a t).
[[nodiscard]] inline double first_order_step(double t, double a) {
    return 1.0 - std::exp(-a * t);
}

/// Step response of the underdamped prototype wn^2 / (s^2 + 2 zeta wn s + wn^2).
[[nodiscard]] inline double second_order_step(double t, double wn, double zeta) {
    const double wd = wn * std::sqrt(1.0 - zeta * zeta);
    const double phi = std::acos(zeta);
    return 1.0 - std::exp(-zeta * wn * t) / std::sqrt(1.0 - zeta * zeta) *
                     std::sin(wd * t + phi);
}

/// Peak overshoot of the same prototype: exp(-pi zeta / sqrt(1 - zeta^2)).
[[nodiscard]] inline double prototype_overshoot(double zeta) {
    return std::exp(-std::numbers::pi * zeta / std::sqrt(1.0 - zeta * zeta));
}

/// Roots of a x^2 + b x + c via the numerically stable quadratic formula.
[[nodiscard]] inline std::pair<std::complex<double>, std::complex<double>>
quadratic_roots(double a, double b, double c) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * a * c));
    const std::complex<double> q = -0.5 * (b + (b >= 0.0 ? disc : -disc));
    return {q / a, c / q};
}

/// Gain crossover of 1/(s(s+1)): |L| = 1 means w^2 (w^2 + 1) = 1, a
/// quadratic in w^2 solved exactly; phase margin follows analytically.
struct IntegratorPoleMargins {
    double omega_gc = 0.0;
    double phase_margin_deg = 0.0;
};

[[nodiscard]] inline IntegratorPoleMargins margins_integrator_pole() {
    const double w2 = 0.5 * (std::sqrt(5.0) - 1.0);
    IntegratorPoleMargins m;
    m.omega_gc = std::sqrt(w2);
    m.phase_margin_deg =
        (std::numbers::pi / 2.0 - std::atan(m.omega_gc)) * 180.0 / std::numbers::pi;
    return m;
}

/// Ultimate point of 1/(s(T1 s+1)(T2 s+1)): phase hits -180 deg where
/// atan(T1 w) + atan(T2 w) = 90 deg, i.e. T1 T2 w^2 = 1.
struct UltimatePoint {
    double Ku = 0.0;
    double Tu = 0.0;
};

[[nodiscard]] inline UltimatePoint ultimate_two_lag(double T1, double T2) {
    const double w = 1.0 / std::sqrt(T1 * T2);
    UltimatePoint u;
    u.Ku = w * std::sqrt(1.0 + T1 * T1 * w * w) * std::sqrt(1.0 + T2 * T2 * w * w);
    u.Tu = 2.0 * std::numbers::pi / w;
    return u;
}

/// Invert prototype_overshoot by bisection, independent of the library's
/// closed-form inverse.
[[nodiscard]] inline double zeta_from_overshoot_bisect(double M) {
    double lo = 1e-6, hi = 1.0 - 1e-6;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (prototype_overshoot(mid) > M)
            lo = mid; // overshoot falls as damping rises
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Synthetic traces for the detector and metrics tests
// ---------------------------------------------------------------------------

struct ToneSpec {
    double amplitude = 1.0;
    double omega = 10.0;  // rad/s
    double growth = 0.0;  // 1/s exponent; negative decays, positive grows
    double offset = 0.0;
    double t_end = 10.0;
    double dt = 1e-3;
};

[[nodiscard]] inline ut::Trace make_tone(const ToneSpec& s) {
    ut::Trace tr;
    tr.dt = s.dt;
    const auto n = static_cast<std::size_t>(std::llround(s.t_end / s.dt)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * s.dt;
        tr.r.push_back(0.0);
        tr.u.push_back(1.0);
        tr.x.push_back(s.offset +
                       s.amplitude * std::exp(s.growth * t) * std::sin(s.omega * t));
        tr.d.push_back(0.0);
    }
    return tr;
}

/// Sampled prototype second-order step response as a Trace.
[[nodiscard]] inline ut::Trace make_prototype_step(double wn, double zeta, double t_end,
                                                   double dt = 1e-3, double x_ref = 1.0,
                                                   std::size_t lead_in = 0) {
    ut::Trace tr;
    tr.dt = dt;
    for (std::size_t i = 0; i < lead_in; ++i) {
        tr.r.push_back(x_ref);
        tr.u.push_back(0.0);
        tr.x.push_back(0.0);
        tr.d.push_back(0.0);
    }
    const auto n = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        tr.r.push_back(x_ref);
        tr.u.push_back(1.0);
        tr.x.push_back(x_ref * second_order_step(t, wn, zeta));
        tr.d.push_back(0.0);
    }
    return tr;
}

} // namespace oracle
