#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "ut/errors.hpp"
#include "ut/trace.hpp"

namespace ut {

// ---------------------------------------------------------------------------
// Signal helpers
// ---------------------------------------------------------------------------

/// Centered running median; the window shrinks symmetrically at the edges.
[[nodiscard]] inline std::vector<double> median_filter(const std::vector<double>& v,
                                                       std::size_t window = 11) {
    if (window < 2 || v.size() < 3) return v;
    const std::size_t half = window / 2;
    std::vector<double> out(v.size());
    std::vector<double> buf;
    buf.reserve(window);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t h = std::min({half, i, v.size() - 1 - i});
        buf.assign(v.begin() + static_cast<std::ptrdiff_t>(i - h),
                   v.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
        std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(h), buf.end());
        out[i] = buf[h];
    }
    return out;
}

/// Centered moving mean via prefix sums; the window clamps at the edges.
[[nodiscard]] inline std::vector<double> moving_mean(const std::vector<double>& v,
                                                     std::size_t window) {
    if (window < 2 || v.empty()) return v;
    const std::size_t half = window / 2;
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(v.size() - 1, i + half);
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

namespace detail {

[[nodiscard]] inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid - 1), v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

/// Robust noise scale: MAD of the first difference, insensitive to slow
/// drift and to the oscillation itself.
[[nodiscard]] inline double diff_mad(const std::vector<double>& v) {
    if (v.size() < 3) return 0.0;
    std::vector<double> d(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) d[i] = v[i + 1] - v[i];
    const double med = median_of(d);
    for (double& x : d) x = std::abs(x - med);
    return median_of(d);
}

struct Extremum {
    std::size_t index = 0;
    double value = 0.0;
    int sign = 0; // +1 maximum, -1 minimum
};

/// Alternating extrema by threshold reversal: an extremum counts once the
/// signal retreats from it by more than prominence. An extremum on the very
/// first or last sample is a window-boundary artifact, not a turning point,
/// and is discarded.
[[nodiscard]] inline std::vector<Extremum> prominent_extrema(const std::vector<double>& z,
                                                             double prominence) {
    std::vector<Extremum> out;
    if (z.size() < 3) return out;
    double cur_max = z[0], cur_min = z[0];
    std::size_t max_i = 0, min_i = 0;
    int dir = 0;
    for (std::size_t i = 1; i < z.size(); ++i) {
        const double v = z[i];
        if (v > cur_max) { cur_max = v; max_i = i; }
        if (v < cur_min) { cur_min = v; min_i = i; }
        if (dir >= 0 && v < cur_max - prominence) {
            out.push_back({max_i, cur_max, +1});
            dir = -1;
            cur_min = v;
            min_i = i;
        } else if (dir <= 0 && v > cur_min + prominence) {
            out.push_back({min_i, cur_min, -1});
            dir = +1;
            cur_max = v;
            max_i = i;
        }
    }
    while (!out.empty() && out.front().index == 0) out.erase(out.begin());
    while (!out.empty() && out.back().index == z.size() - 1) out.pop_back();
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Step metrics
// ---------------------------------------------------------------------------

struct StepMetrics {
    double overshoot = 0.0;      // fraction of the reference, 0 when the
                                 // filtered output never exceeds it
    double peak_fraction = 0.0;  // peak of the filtered output over the
                                 // reference; below 1 when it falls short
    double peak_time = 0.0;      // s, absolute trace time
    std::optional<double> settling_time; // s, 2% band entry; absent if never settles
    double steady_state_error = 0.0;     // output units, reference minus final value
};

/// Overshoot and friends on the median-filtered output. The peak search
/// starts where the controller first acts so leading quiet samples of a
/// delayed record cannot contribute.
[[nodiscard]] inline StepMetrics step_metrics(const Trace& tr, double x_ref,
                                              double settle_band = 0.02) {
    if (x_ref == 0.0) throw OutOfRange("step_metrics requires x_ref != 0");
    if (tr.size() < 2) throw TooShort("trace too short for step metrics");

    const std::vector<double> xf = median_filter(tr.x, 11);
    std::size_t start = 0;
    while (start < tr.size() && tr.u[start] == 0.0) ++start;
    if (start >= tr.size()) start = 0;

    StepMetrics m;
    double peak = -1e300;
    std::size_t peak_i = start;
    for (std::size_t i = start; i < tr.size(); ++i) {
        const double y = xf[i] / x_ref;
        if (y > peak) { peak = y; peak_i = i; }
    }
    m.peak_fraction = peak;
    m.overshoot = std::max(0.0, peak - 1.0);
    m.peak_time = tr.time(peak_i);

    std::size_t last_exceed = tr.size(); // sentinel: none
    for (std::size_t i = tr.size(); i-- > start;) {
        if (std::abs(xf[i] / x_ref - 1.0) > settle_band) { last_exceed = i; break; }
    }
    if (last_exceed == tr.size())
        m.settling_time = tr.time(start);
    else if (last_exceed + 1 < tr.size())
        m.settling_time = tr.time(last_exceed + 1);
    // else: still outside the band at the end, leave absent

    const std::size_t tail = std::max<std::size_t>(10, tr.size() / 50);
    const std::size_t lo = tr.size() > tail ? tr.size() - tail : 0;
    double acc = 0.0;
    for (std::size_t i = lo; i < tr.size(); ++i) acc += xf[i];
    m.steady_state_error = x_ref - acc / static_cast<double>(tr.size() - lo);
    return m;
}

/// Time from a disturbance release until the output re-enters (and stays in)
/// the 2% band around the reference. Absent if it never re-settles.
[[nodiscard]] inline std::optional<double> recovery_time(const Trace& tr, double x_ref,
                                                         double t_release,
                                                         double band = 0.02) {
    if (x_ref == 0.0) throw OutOfRange("recovery_time requires x_ref != 0");
    const std::vector<double> xf = median_filter(tr.x, 11);
    std::size_t i0 = 0;
    while (i0 < tr.size() && tr.time(i0) < t_release) ++i0;
    if (i0 >= tr.size()) return std::nullopt;

    std::size_t last_exceed = tr.size();
    for (std::size_t i = tr.size(); i-- > i0;) {
        if (std::abs(xf[i] / x_ref - 1.0) > band) { last_exceed = i; break; }
    }
    if (last_exceed == tr.size()) return 0.0;
    if (last_exceed + 1 >= tr.size()) return std::nullopt;
    return tr.time(last_exceed + 1) - t_release;
}

// ---------------------------------------------------------------------------
// Sustained-oscillation detector
// ---------------------------------------------------------------------------

struct OscillationVerdict {
    bool sustained = false;
    std::optional<double> period; // s, mean same-sign peak spacing
    double amplitude_ratio = 0.0; // last adjacent-extrema swing over first
    int n_peaks = 0;              // prominent extrema in the window
    bool diverging = false;

    [[nodiscard]] double omega() const {
        return period ? 2.0 * std::numbers::pi / *period : 0.0;
    }
};

struct DetectorConfig {
    double transient_skip = 0.3;    // fraction of the record dropped up front
    double ratio_lo = 0.8;          // sustained band on the amplitude ratio
    double ratio_hi = 1.25;
    int min_peaks = 4;
    double prominence_factor = 3.0; // times the noise scale
    double spacing_tolerance = 0.35; // allowed relative spread of peak spacing
    double min_swing_fraction = 0.02; // swings below this fraction of the
                                      // reference never count as oscillation
};

/// Decide whether the tail of a record shows constant-amplitude oscillation.
/// The verdict is invariant to offset and to positive scaling of the signal.
/// The caller is expected to provide roughly ten expected periods of data;
/// decay rates of zeta around 0.05 and above read as not sustained.
[[nodiscard]] inline OscillationVerdict detect_sustained(const Trace& tr,
                                                         const DetectorConfig& cfg = {}) {
    const std::size_t n = tr.size();
    std::size_t i0 = static_cast<std::size_t>(std::ceil(cfg.transient_skip *
                                                        static_cast<double>(n)));
    if (i0 >= n) i0 = n;
    if (n - i0 < 64) throw TooShort("fewer than 64 samples after the transient skip");

    std::vector<double> y(tr.x.begin() + static_cast<std::ptrdiff_t>(i0), tr.x.end());
    const double noise = detail::diff_mad(y);

    std::vector<double> ym = median_filter(y, 11);
    std::size_t w = std::max<std::size_t>(3, ym.size() / 4);
    if (w % 2 == 0) ++w;
    const std::vector<double> mm = moving_mean(ym, w);
    for (std::size_t i = 0; i < ym.size(); ++i) ym[i] -= mm[i];

    // Clamped mean windows distort the ends; analyze the interior only.
    const std::size_t edge = w / 2;
    std::vector<double> z(ym.begin() + static_cast<std::ptrdiff_t>(edge),
                          ym.end() - static_cast<std::ptrdiff_t>(edge));

    double span = 0.0;
    for (double v : z) span = std::max(span, std::abs(v));
    const double prominence = std::max({cfg.prominence_factor * noise, 1e-9 * span, 1e-15});

    const std::vector<detail::Extremum> peaks = detail::prominent_extrema(z, prominence);

    OscillationVerdict verdict;
    verdict.n_peaks = static_cast<int>(peaks.size());
    verdict.diverging = tr.diverged;

    if (peaks.size() >= 2) {
        const double first = std::abs(peaks[1].value - peaks[0].value);
        const double last = std::abs(peaks[peaks.size() - 1].value -
                                     peaks[peaks.size() - 2].value);
        verdict.amplitude_ratio = first > 0.0 ? last / first : 0.0;
    }
    bool regular = true; // random noise peaks betray themselves by spacing
    if (peaks.size() >= 3) {
        std::vector<double> gaps;
        for (std::size_t i = 2; i < peaks.size(); ++i)
            // peaks alternate, so two apart is the same sign
            gaps.push_back(tr.time(i0 + edge + peaks[i].index) -
                           tr.time(i0 + edge + peaks[i - 2].index));
        const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) /
                            static_cast<double>(gaps.size());
        verdict.period = mean;
        if (gaps.size() >= 2) {
            const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
            regular = (*hi - *lo) <= cfg.spacing_tolerance * mean;
        }
    }

    // residual measurement noise can clear the prominence threshold on long
    // records; demand a swing that is macroscopic next to the reference
    double ref_scale = 0.0;
    for (double v : tr.r) ref_scale = std::max(ref_scale, std::abs(v));
    bool big_enough = true;
    if (peaks.size() >= 2) {
        std::vector<double> swings;
        for (std::size_t i = 1; i < peaks.size(); ++i)
            swings.push_back(std::abs(peaks[i].value - peaks[i - 1].value));
        big_enough = detail::median_of(swings) >=
                     cfg.min_swing_fraction * ref_scale;
    }

    if (verdict.n_peaks >= cfg.min_peaks && regular && big_enough) {
        verdict.sustained = verdict.amplitude_ratio >= cfg.ratio_lo &&
                            verdict.amplitude_ratio <= cfg.ratio_hi;
        if (verdict.amplitude_ratio > cfg.ratio_hi) verdict.diverging = true;
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Damping conversions
// ---------------------------------------------------------------------------

/// Overshoot of the second-order prototype: M = exp(-pi zeta / sqrt(1 - zeta^2)).
[[nodiscard]] inline double overshoot_from_zeta(double zeta) {
    if (!(zeta > 0.0) || !(zeta < 1.0)) throw OutOfRange("zeta must be in (0, 1)");
    return std::exp(-std::numbers::pi * zeta / std::sqrt(1.0 - zeta * zeta));
}

/// Closed-form inverse of overshoot_from_zeta.
[[nodiscard]] inline double zeta_from_overshoot(double M) {
    if (!(M > 0.0) || !(M < 1.0)) throw OutOfRange("overshoot must be in (0, 1)");
    const double l = std::log(M);
    return -l / std::sqrt(std::numbers::pi * std::numbers::pi + l * l);
}

/// Phase margin of the prototype loop wn^2 / (s (s + 2 zeta wn)), degrees.
/// Independent of wn.
[[nodiscard]] inline double phase_margin_from_zeta(double zeta) {
    if (!(zeta > 0.0)) throw OutOfRange("zeta must be > 0");
    const double z2 = zeta * zeta;
    const double inner = std::sqrt(1.0 + 4.0 * z2 * z2) - 2.0 * z2;
    const double phi = std::atan(2.0 * zeta / std::sqrt(inner));
    return phi * 180.0 / std::numbers::pi;
}

} // namespace ut
