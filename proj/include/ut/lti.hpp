#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ut/errors.hpp"
#include "ut/poly.hpp"

namespace ut {

// ---------------------------------------------------------------------------
// TransferFunction
// ---------------------------------------------------------------------------

/// Rational transfer function with optional input dead time:
///   H(s) = num(s) / den(s) * exp(-dead_time * s)
/// Coefficients are stored in descending powers of s.
struct TransferFunction {
    std::vector<double> num{1.0};
    std::vector<double> den{1.0};
    double dead_time = 0.0; // seconds

    TransferFunction() = default;

    TransferFunction(std::vector<double> n, std::vector<double> d, double dead = 0.0)
        : num(poly::trim(std::move(n))), den(poly::trim(std::move(d))), dead_time(dead) {
        if (den.empty() || den[0] == 0.0)
            throw BadTransferFunction("denominator has no leading coefficient");
        if (num.empty()) num = {0.0};
        if (dead_time < 0.0)
            throw BadTransferFunction("dead time must be non-negative");
    }

    [[nodiscard]] std::size_t num_degree() const { return num.size() - 1; }
    [[nodiscard]] std::size_t den_degree() const { return den.size() - 1; }
    [[nodiscard]] bool proper() const { return num_degree() <= den_degree(); }

    /// Same function with the leading denominator coefficient scaled to 1.
    [[nodiscard]] TransferFunction normalized() const {
        const double lead = den[0];
        return {poly::scale(num, 1.0 / lead), poly::scale(den, 1.0 / lead), dead_time};
    }
};

/// Cascade H1*H2. Dead times add.
[[nodiscard]] inline TransferFunction series(const TransferFunction& a,
                                             const TransferFunction& b) {
    return {poly::mul(a.num, b.num), poly::mul(a.den, b.den), a.dead_time + b.dead_time};
}

/// Closed loop L/(1+L) for a unity negative-feedback loop with open loop L.
/// Only rational loops close in rational form.
[[nodiscard]] inline TransferFunction unity_feedback(const TransferFunction& loop) {
    if (loop.dead_time > 0.0)
        throw DelayNotClosable("cannot close a loop with dead time into a rational form");
    return {loop.num, poly::add(loop.den, loop.num), 0.0};
}

// ---------------------------------------------------------------------------
// Frequency response
// ---------------------------------------------------------------------------

/// H(j*omega) for omega > 0.
[[nodiscard]] inline std::complex<double> freq_response(const TransferFunction& tf,
                                                        double omega) {
    if (!(omega > 0.0)) throw OutOfRange("freq_response requires omega > 0");
    const std::complex<double> s{0.0, omega};
    const std::complex<double> d = poly::eval(tf.den, s);
    if (std::abs(d) < 1e-300)
        throw PoleOnAxis("denominator vanishes on the imaginary axis");
    std::complex<double> h = poly::eval(tf.num, s) / d;
    if (tf.dead_time > 0.0)
        h *= std::exp(std::complex<double>{0.0, -omega * tf.dead_time});
    return h;
}

struct FrequencyPoint {
    double omega = 0.0;        // rad/s
    double magnitude_db = 0.0;
    double phase_deg = 0.0;    // unwrapped along the sweep
};

namespace detail {

inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }
inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

/// Shift ph by whole turns until it sits within half a turn of ref.
inline double unwrap_near(double ph, double ref) {
    while (ph - ref > 180.0) ph -= 360.0;
    while (ph - ref < -180.0) ph += 360.0;
    return ph;
}

[[nodiscard]] inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> w(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    w.front() = lo;
    w.back() = hi;
    return w;
}

} // namespace detail

/// Response samples over a log grid with phase unwrapped along the sweep.
/// The grid starts at 512 points and densifies 4x (up to a cap) while any
/// adjacent phase step exceeds 90 degrees, so fast phase drops (delays,
/// resonances) cannot alias through the unwrap.
[[nodiscard]] inline std::vector<FrequencyPoint> response_points(const TransferFunction& tf,
                                                                 double omega_lo,
                                                                 double omega_hi,
                                                                 std::size_t min_points = 512) {
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo))
        throw OutOfRange("response_points requires 0 < omega_lo < omega_hi");
    std::size_t n = min_points;
    const std::size_t cap = min_points * 64;
    std::vector<FrequencyPoint> pts;
    for (;;) {
        const std::vector<double> w = detail::log_grid(omega_lo, omega_hi, n);
        pts.clear();
        pts.reserve(n);
        double prev_phase = 0.0;
        bool coarse = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> h = freq_response(tf, w[i]);
            double ph = detail::rad2deg(std::arg(h));
            if (i > 0) ph = detail::unwrap_near(ph, prev_phase);
            if (i > 0 && std::abs(ph - prev_phase) > 90.0) coarse = true;
            prev_phase = ph;
            pts.push_back({w[i], 20.0 * std::log10(std::abs(h)), ph});
        }
        if (!coarse || n >= cap) break;
        n *= 4;
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Poles
// ---------------------------------------------------------------------------

/// Denominator roots via companion-matrix eigenvalues. Reliable to about
/// 1e-8 relative for the well-scaled, degree <= 10 polynomials used here.
[[nodiscard]] inline std::vector<std::complex<double>> poles(const TransferFunction& tf) {
    const std::vector<double> d = poly::trim(tf.den);
    const std::size_t deg = d.size() - 1;
    if (deg == 0) throw DegreeZero("constant denominator has no poles");

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg),
                                                      static_cast<Eigen::Index>(deg));
    for (std::size_t i = 0; i < deg; ++i)
        companion(0, static_cast<Eigen::Index>(i)) = -d[i + 1] / d[0];
    for (std::size_t i = 1; i < deg; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;

    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(deg);
    for (std::size_t i = 0; i < deg; ++i)
        out[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

// ---------------------------------------------------------------------------
// Stability margins
// ---------------------------------------------------------------------------

struct MarginReport {
    double omega_gc = 0.0;          // rad/s, lowest gain-crossover frequency
    double phase_margin_deg = 0.0;  // 180 + unwrapped phase at omega_gc
    bool crossover_found = false;
    int crossover_count = 0;        // callers may warn when > 1
};

/// Gain crossover and phase margin of an open-loop response over
/// [omega_lo, omega_hi]. Crossings of |L| = 1 are located on a log grid and
/// refined by bisection; the reported crossover is the lowest-frequency one.
[[nodiscard]] inline MarginReport margins(const TransferFunction& loop,
                                          double omega_lo = 1e-2,
                                          double omega_hi = 1e5) {
    const std::vector<FrequencyPoint> pts = response_points(loop, omega_lo, omega_hi);

    MarginReport rep;
    double first_cross = 0.0;
    double phase_at_cross = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double g0 = pts[i].magnitude_db;
        const double g1 = pts[i + 1].magnitude_db;
        const bool crossing = (g0 == 0.0) || (g0 > 0.0) != (g1 > 0.0);
        if (!crossing) continue;
        ++rep.crossover_count;
        if (rep.crossover_found) continue;

        double lo = pts[i].omega, hi = pts[i + 1].omega;
        double mlo = g0;
        for (int it = 0; it < 100 && (hi - lo) > 1e-13 * lo; ++it) {
            const double mid = std::sqrt(lo * hi);
            const double gm = 20.0 * std::log10(std::abs(freq_response(loop, mid)));
            if ((gm > 0.0) == (mlo > 0.0)) {
                lo = mid;
                mlo = gm;
            } else {
                hi = mid;
            }
        }
        first_cross = std::sqrt(lo * hi);
        const double raw = detail::rad2deg(std::arg(freq_response(loop, first_cross)));
        phase_at_cross = detail::unwrap_near(raw, pts[i].phase_deg);
        rep.crossover_found = true;
    }
    if (rep.crossover_found) {
        rep.omega_gc = first_cross;
        rep.phase_margin_deg = 180.0 + phase_at_cross;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Controller factories
// ---------------------------------------------------------------------------

/// PI controller C(s) = Kp * (Ti s + 1) / (Ti s).
[[nodiscard]] inline TransferFunction make_pi(double Kp, double Ti) {
    if (!(Kp > 0.0)) throw OutOfRange("make_pi requires Kp > 0");
    if (!(Ti > 0.0)) throw OutOfRange("make_pi requires Ti > 0");
    return {{Kp * Ti, Kp}, {Ti, 0.0}};
}

struct LeadParams {
    double alpha = 0.1; // pole/zero separation, in (0, 1]
    double tau = 1.0;   // zero time constant, s
    double K_L = 1.0;   // dc gain
};

/// Lead element L(s) = K_L * (tau s + 1) / (alpha tau s + 1).
[[nodiscard]] inline TransferFunction make_lead(const LeadParams& p) {
    if (!(p.alpha > 0.0) || p.alpha > 1.0) throw OutOfRange("lead alpha must be in (0, 1]");
    if (!(p.tau > 0.0)) throw OutOfRange("lead tau must be > 0");
    if (!(p.K_L > 0.0)) throw OutOfRange("lead K_L must be > 0");
    return {{p.K_L * p.tau, p.K_L}, {p.alpha * p.tau, 1.0}};
}

[[nodiscard]] inline TransferFunction make_lead(double alpha, double tau, double K_L = 1.0) {
    return make_lead(LeadParams{alpha, tau, K_L});
}

/// Frequency of maximum phase advance, 1 / (sqrt(alpha) * tau).
[[nodiscard]] inline double lead_peak_omega(const LeadParams& p) {
    return 1.0 / (std::sqrt(p.alpha) * p.tau);
}

/// Maximum phase advance in degrees, asin((1-alpha)/(1+alpha)).
[[nodiscard]] inline double lead_peak_phase_deg(const LeadParams& p) {
    return detail::rad2deg(std::asin((1.0 - p.alpha) / (1.0 + p.alpha)));
}

/// Unity-dc-gain Butterworth low-pass of the given order and cutoff.
[[nodiscard]] inline TransferFunction butterworth_lowpass(int order, double cutoff_hz) {
    if (order < 1) throw OutOfRange("butterworth order must be >= 1");
    if (!(cutoff_hz > 0.0)) throw OutOfRange("butterworth cutoff must be > 0");
    std::vector<double> b{1.0};
    if (order % 2 == 1) b = poly::mul(b, {1.0, 1.0});
    for (int k = 1; k <= order / 2; ++k) {
        const double theta =
            std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order);
        b = poly::mul(b, {1.0, -2.0 * std::cos(theta), 1.0});
    }
    const double wc = 2.0 * std::numbers::pi * cutoff_hz;
    const std::size_t deg = b.size() - 1;
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] /= std::pow(wc, static_cast<double>(deg - i));
    return {{1.0}, b};
}

struct ZnPid {
    double Kp = 0.0;
    double Ti = 0.0; // s
    double Td = 0.0; // s
    TransferFunction tf; // PID cascaded with the roll-off filter, proper
};

/// Ziegler-Nichols ultimate-sensitivity PID from the ultimate gain and period:
/// Kp = 0.6 Ku, Ti = 0.5 Tu, Td = 0.125 Tu, cascaded with a Butterworth
/// low-pass so the result is realizable.
[[nodiscard]] inline ZnPid make_zn_pid(double Ku, double Tu,
                                       double filter_cutoff_hz = 1000.0,
                                       int filter_order = 2) {
    if (!(Ku > 0.0) || !(Tu > 0.0)) throw OutOfRange("make_zn_pid requires Ku, Tu > 0");
    ZnPid r;
    r.Kp = 0.6 * Ku;
    r.Ti = 0.5 * Tu;
    r.Td = 0.125 * Tu;
    const TransferFunction pid{{r.Kp * r.Td * r.Ti, r.Kp * r.Ti, r.Kp}, {r.Ti, 0.0}};
    r.tf = series(pid, butterworth_lowpass(filter_order, filter_cutoff_hz));
    return r;
}

} // namespace ut
