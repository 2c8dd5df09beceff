#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ut/analysis.hpp"
#include "ut/errors.hpp"
#include "ut/lti.hpp"
#include "ut/session.hpp"
#include "ut/trace.hpp"

namespace ut {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct KSearchConfig {
    double k_start = 1.0;
    double k_factor = 10.0; // decade escalation
    double k_max = 1e6;
};

struct SafetyConfig {
    double abort_amplitude = 5.0; // multiples of x_ref
    int max_experiments = 400;
};

struct OvershootBand {
    double lo = 0.30;
    double hi = 0.40;
    [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
    [[nodiscard]] bool contains(double m) const { return m >= lo && m <= hi; }
};

struct TuneConfig {
    // integrator sweep
    double Ti_start = 0.1;
    double Ti_decay = 0.9;
    double Ti_refine = 0.97;
    double Ti_floor_dt_multiple = 100.0;
    // gain stage
    int gain_grid_points = 25;
    double gain_delta_min = 0.1;
    double gain_delta_max = 10.0;
    int gain_bisections = 8;
    OvershootBand m_band;
    // responsiveness probe
    double responsive_fraction = 0.63;
    KSearchConfig k_search;
    // relay-free ultimate search for the PID baseline
    double zn_factor = 1.5;
    int zn_bisections = 10;
    double zn_rel_width = 0.02;
    double zn_filter_cutoff_hz = 1000.0;
    int zn_filter_order = 2;
    // shared
    SafetyConfig safety;
    DetectorConfig detector;
    ScenarioSpec experiment; // template for every experiment in a campaign

    void validate() const {
        experiment.validate();
        if (experiment.x_ref == 0.0) throw BadScenario("tuning needs a nonzero x_ref");
        const double n = experiment.t_end / experiment.dt;
        if (n * (1.0 - detector.transient_skip) < 64.0)
            throw BadScenario("experiment horizon leaves fewer than 64 samples "
                              "after the transient skip");
        if (!(Ti_start > 0.0) || !(Ti_decay > 0.0) || Ti_decay >= 1.0 ||
            !(Ti_refine > 0.0) || Ti_refine >= 1.0)
            throw OutOfRange("Ti sweep factors must lie in (0, 1)");
        if (gain_grid_points < 3 || !(gain_delta_min > 0.0) ||
            !(gain_delta_max > gain_delta_min))
            throw OutOfRange("bad gain grid");
    }
};

// ---------------------------------------------------------------------------
// Experiment bookkeeping
// ---------------------------------------------------------------------------

struct ExperimentRecord {
    int index = 0;
    std::string stage;
    TransferFunction controller;
    double Kp = 0.0; // proportional gain for P/PI stages, 0 otherwise
    double Ti = 0.0; // integrator constant for PI stages, 0 otherwise
    OscillationVerdict verdict;
    std::optional<StepMetrics> metrics;
    bool aborted = false;  // safety bound hit or solver divergence
    double max_abs_x = 0.0;
};

/// Called once per experiment with the record and its trace (measurements
/// only; sessions do not hand out clean outputs).
using ExperimentObserver = std::function<void(const ExperimentRecord&, const Trace&)>;

namespace detail {

class ExperimentRunner {
public:
    ExperimentRunner(PlantSession& session, const TuneConfig& cfg, ExperimentObserver obs)
        : session_(session), cfg_(cfg), obs_(std::move(obs)) {}

    ExperimentRecord run(const std::string& stage, const TransferFunction& controller,
                         double Kp, double Ti) {
        if (used_ >= cfg_.safety.max_experiments)
            throw BudgetExceeded("experiment budget of " +
                                 std::to_string(cfg_.safety.max_experiments) + " exhausted");
        const Trace tr = session_.run(controller, cfg_.experiment);
        ++used_;

        ExperimentRecord rec;
        rec.index = used_ - 1;
        rec.stage = stage;
        rec.controller = controller;
        rec.Kp = Kp;
        rec.Ti = Ti;
        for (double v : tr.x) rec.max_abs_x = std::max(rec.max_abs_x, std::abs(v));
        rec.aborted = tr.diverged ||
                      rec.max_abs_x > cfg_.safety.abort_amplitude *
                                          std::abs(cfg_.experiment.x_ref);
        try {
            rec.verdict = detect_sustained(tr, cfg_.detector);
        } catch (const TooShort&) {
            if (!tr.diverged) throw;
            rec.verdict.diverging = true; // runaway cut the record short
        }
        try {
            rec.metrics = step_metrics(tr, cfg_.experiment.x_ref);
        } catch (const TooShort&) {
            // diverged almost immediately; metrics stay absent
        }
        log_.push_back(rec);
        if (obs_) obs_(rec, tr);
        return rec;
    }

    [[nodiscard]] int used() const { return used_; }
    [[nodiscard]] const std::vector<ExperimentRecord>& log() const { return log_; }
    [[nodiscard]] const TuneConfig& config() const { return cfg_; }

    /// Peak of the median-filtered response as a fraction of the reference.
    [[nodiscard]] static double reach_fraction(const ExperimentRecord& rec) {
        return rec.metrics ? rec.metrics->peak_fraction : 0.0;
    }

private:
    PlantSession& session_;
    const TuneConfig& cfg_;
    ExperimentObserver obs_;
    int used_ = 0;
    std::vector<ExperimentRecord> log_;
};

[[nodiscard]] inline bool oscillation_evidence(const ExperimentRecord& rec) {
    return rec.verdict.sustained || rec.verdict.diverging || rec.aborted;
}

[[nodiscard]] inline TransferFunction pure_gain(double k) {
    return TransferFunction{{k}, {1.0}};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct SweepRow {
    double Ti = 0.0;         // s
    double omega_c_pi = 0.0; // rad/s, 1/Ti
    double omega_gc = 0.0;   // rad/s, measured oscillation frequency, 0 if none
};

struct IntegratorResult {
    double Ti_bar = 0.0;        // ultimate integrator constant found by the sweep
    double omega_gc_bar = 0.0;  // oscillation frequency at Ti_bar (0 if unmeasurable)
    double omega_c_pi_bar = 0.0; // 1/Ti_bar
    double Ti = 0.0;            // assigned constant, 10 / max of the pair above
    std::vector<SweepRow> sweep_log; // strictly decreasing Ti
};

struct GainRow {
    double Kp = 0.0;
    double M = 0.0; // measured overshoot; +inf marks an aborted run
};

struct GainResult {
    double Kp = 0.0;
    double M = 0.0;
    bool band_fallback = false; // band unreachable, closest grid point returned
    std::vector<GainRow> gain_log;
};

struct PiLeadResult {
    double k = 0.0; // responsive proportional gain the campaign started from
    double Kp = 0.0;
    double Ti = 0.0;
    LeadParams lead;
    double achieved_M = 0.0; // overshoot of the PI verification rerun
    std::optional<double> predicted_phase_margin_deg;
    bool band_fallback = false;
    int n_experiments = 0;
    IntegratorResult integrator;
    std::vector<GainRow> gain_log;
    std::vector<ExperimentRecord> log;

    [[nodiscard]] TransferFunction pi() const { return make_pi(Kp, Ti); }
    [[nodiscard]] TransferFunction lead_tf() const { return make_lead(lead); }
    [[nodiscard]] TransferFunction pi_lead() const { return series(pi(), lead_tf()); }
};

struct ZnResult {
    double Ku = 0.0;
    double Tu = 0.0; // s
    ZnPid pid;
    int n_experiments = 0;
    std::vector<ExperimentRecord> log;
};

/// Integrator constant from the ultimate pair: Ti = 10 / max of the
/// measured oscillation frequency and the triggering 1/Ti_bar.
[[nodiscard]] inline double integrator_time_from_ultimate(double omega_c_pi_bar,
                                                          double omega_gc_bar) {
    const double w = std::max(omega_c_pi_bar, omega_gc_bar);
    if (!(w > 0.0)) throw OutOfRange("ultimate pair must have a positive entry");
    return 10.0 / w;
}

// ---------------------------------------------------------------------------
// Stage implementations
// ---------------------------------------------------------------------------

namespace detail {

/// Decade-escalate a pure gain until the step response moves at least the
/// configured fraction of the way to the reference without oscillating.
/// A responsive but oscillating gain is retried half a decade lower.
inline double find_responsive_gain_impl(ExperimentRunner& runner) {
    const TuneConfig& cfg = runner.config();
    double k = cfg.k_search.k_start;
    bool any_responsive = false;
    while (k <= cfg.k_search.k_max * (1.0 + 1e-12)) {
        const ExperimentRecord rec = runner.run("responsive", pure_gain(k), k, 0.0);
        const bool responsive =
            ExperimentRunner::reach_fraction(rec) >= cfg.responsive_fraction;
        if (responsive && !oscillation_evidence(rec)) return k;
        if (responsive) {
            any_responsive = true;
            const double k2 = k / std::sqrt(cfg.k_search.k_factor);
            const ExperimentRecord r2 = runner.run("responsive", pure_gain(k2), k2, 0.0);
            if (ExperimentRunner::reach_fraction(r2) >= cfg.responsive_fraction &&
                !oscillation_evidence(r2))
                return k2;
        }
        k *= cfg.k_search.k_factor;
    }
    if (any_responsive)
        throw UnstablePlant("every responsive gain oscillates or diverges");
    throw Unresponsive("no gain up to the search limit moves the plant");
}

/// Shrink Ti at the coarse rate until oscillation evidence appears, then
/// restart one coarse step higher and close in at the refine rate. Safety
/// aborts count as oscillation evidence, so runaway sweeps stop themselves.
/// The published sweep log holds the effective monotone sweep; the coarse
/// step that first tripped is superseded by the refine pass and is only
/// retained in the full experiment log.
inline IntegratorResult tune_integrator_impl(ExperimentRunner& runner, double k) {
    const TuneConfig& cfg = runner.config();
    const double floor = cfg.Ti_floor_dt_multiple * cfg.experiment.dt;

    IntegratorResult res;
    double Ti = cfg.Ti_start;
    std::optional<double> prev_clean;
    bool refine = false;

    for (;;) {
        if (Ti < floor)
            throw NoOscillationFound("integrator sweep reached its floor without "
                                     "sustained oscillation");
        const ExperimentRecord rec = runner.run(refine ? "integrator_refine" : "integrator",
                                                make_pi(k, Ti), k, Ti);
        const double w_osc = rec.verdict.period ? rec.verdict.omega() : 0.0;
        const bool evidence = oscillation_evidence(rec);

        if (!evidence) {
            res.sweep_log.push_back({Ti, 1.0 / Ti, w_osc});
            prev_clean = Ti;
            Ti *= refine ? cfg.Ti_refine : cfg.Ti_decay;
            continue;
        }
        if (!refine && prev_clean) {
            refine = true;
            Ti = *prev_clean * cfg.Ti_refine;
            continue;
        }
        res.sweep_log.push_back({Ti, 1.0 / Ti, w_osc});
        res.Ti_bar = Ti;
        res.omega_gc_bar = w_osc;
        res.omega_c_pi_bar = 1.0 / Ti;
        res.Ti = integrator_time_from_ultimate(res.omega_c_pi_bar, res.omega_gc_bar);
        return res;
    }
}

[[nodiscard]] inline double experiment_overshoot(const ExperimentRecord& rec) {
    if (rec.aborted || !rec.metrics)
        return std::numeric_limits<double>::infinity();
    return rec.metrics->overshoot;
}

/// Walk the multiplier grid away from delta = 1 until a sample lands in the
/// band or an adjacent pair straddles it, then bisect the straddling pair.
/// A walk that moves away from the band is abandoned and the opposite
/// direction tried, so a locally non-monotone M(K_p) still gets banded.
/// When the band cannot be reached the closest sample is returned, flagged.
inline GainResult tune_gain_impl(ExperimentRunner& runner, double k, double Ti) {
    const TuneConfig& cfg = runner.config();
    const int n = cfg.gain_grid_points;
    std::vector<double> delta(n);
    const double la = std::log10(cfg.gain_delta_min);
    const double lb = std::log10(cfg.gain_delta_max);
    int center = 0;
    for (int i = 0; i < n; ++i) {
        delta[i] = std::pow(10.0, la + (lb - la) * i / (n - 1.0));
        if (std::abs(std::log10(delta[i])) < std::abs(std::log10(delta[center])))
            center = i;
    }

    GainResult res;
    auto probe = [&](double Kp, const std::string& stage) {
        const ExperimentRecord rec = runner.run(stage, make_pi(Kp, Ti), Kp, Ti);
        const double M = experiment_overshoot(rec);
        res.gain_log.push_back({Kp, M});
        return M;
    };
    auto band_dist = [&](double M) {
        if (cfg.m_band.contains(M)) return 0.0;
        if (!std::isfinite(M)) return std::numeric_limits<double>::infinity();
        return M < cfg.m_band.lo ? cfg.m_band.lo - M : M - cfg.m_band.hi;
    };
    auto straddles = [&](double Ma, double Mb) {
        return (Ma < cfg.m_band.lo && Mb > cfg.m_band.hi) ||
               (Mb < cfg.m_band.lo && Ma > cfg.m_band.hi);
    };
    auto finish = [&](double Kp, double M) {
        res.Kp = Kp;
        res.M = M;
        return res;
    };

    const double M0 = probe(delta[center] * k, "gain");
    if (cfg.m_band.contains(M0)) return finish(delta[center] * k, M0);

    // straddling gains, each side's overshoot outside the band on one side
    std::optional<std::pair<GainRow, GainRow>> bracket;

    // walk outward; true means stop the whole search (hit or bracket)
    double hit_Kp = 0.0, hit_M = 0.0;
    bool hit = false;
    auto walk = [&](int dir) {
        double prev_Kp = delta[center] * k;
        double prev_M = M0;
        for (int i = center + dir; i >= 0 && i < n; i += dir) {
            const double Kp = delta[i] * k;
            const double M = probe(Kp, "gain");
            if (cfg.m_band.contains(M)) {
                hit = true;
                hit_Kp = Kp;
                hit_M = M;
                return true;
            }
            if (straddles(prev_M, M)) {
                bracket = {{prev_Kp, prev_M}, {Kp, M}};
                return true;
            }
            // moving away from the band: this side cannot deliver
            if (band_dist(M) > band_dist(prev_M) + 1e-3) return false;
            prev_Kp = Kp;
            prev_M = M;
        }
        return false;
    };

    // a start above the band descends first, below it the walk raises the gain
    const int first = M0 > cfg.m_band.hi ? -1 : +1;
    if (!walk(first) && !hit && !bracket) walk(-first);
    if (hit) return finish(hit_Kp, hit_M);

    if (bracket) {
        GainRow a = bracket->first, b = bracket->second;
        for (int it = 0; it < cfg.gain_bisections; ++it) {
            const double mid = std::sqrt(a.Kp * b.Kp);
            const double M = probe(mid, "gain_bisect");
            if (cfg.m_band.contains(M)) return finish(mid, M);
            // replace the endpoint lying on the same side as the midpoint
            if ((M > cfg.m_band.hi) == (a.M > cfg.m_band.hi))
                a = {mid, M};
            else
                b = {mid, M};
        }
    }

    const GainRow* best = nullptr;
    for (const GainRow& r : res.gain_log) {
        if (!std::isfinite(r.M)) continue;
        if (!best || std::abs(r.M - cfg.m_band.mid()) <
                         std::abs(best->M - cfg.m_band.mid()))
            best = &r;
    }
    if (!best) throw UnstablePlant("every gain probe aborted on the safety bound");
    res.band_fallback = true;
    return finish(best->Kp, best->M);
}

inline std::pair<double, double> zn_ultimate_impl(ExperimentRunner& runner) {
    const TuneConfig& cfg = runner.config();
    double Kp = cfg.k_search.k_start;
    std::optional<double> last_clean;
    std::optional<double> osc_at;
    std::optional<double> period;

    while (Kp <= cfg.k_search.k_max * (1.0 + 1e-12)) {
        const ExperimentRecord rec = runner.run("zn_search", pure_gain(Kp), Kp, 0.0);
        if (oscillation_evidence(rec)) {
            osc_at = Kp;
            if (rec.verdict.period) period = rec.verdict.period;
            break;
        }
        last_clean = Kp;
        Kp *= cfg.zn_factor;
    }
    if (!osc_at) throw NoOscillation("no gain up to the search limit sustains oscillation");

    double lo = last_clean.value_or(*osc_at / cfg.zn_factor);
    double hi = *osc_at;
    for (int it = 0; it < cfg.zn_bisections && (hi - lo) > cfg.zn_rel_width * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        const ExperimentRecord rec = runner.run("zn_bisect", pure_gain(mid), mid, 0.0);
        if (oscillation_evidence(rec)) {
            hi = mid;
            if (rec.verdict.period) period = rec.verdict.period;
        } else {
            lo = mid;
        }
    }

    const double Ku = 0.5 * (lo + hi);
    const ExperimentRecord rec = runner.run("zn_confirm", pure_gain(Ku), Ku, 0.0);
    if (rec.verdict.period) period = rec.verdict.period;
    if (!period)
        throw NoOscillation("oscillation period could not be measured near the "
                            "ultimate gain");
    return {Ku, *period};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

/// Direct Lead assignment from the integrator constant: alpha = 0.1,
/// tau = Ti / 10, unity dc gain. Places the maximum phase advance half a
/// decade above the zero, clear of the crossover region the PI shaped.
[[nodiscard]] inline LeadParams assign_lead(double Ti) {
    if (!(Ti > 0.0)) throw OutOfRange("assign_lead requires Ti > 0");
    return LeadParams{0.1, Ti / 10.0, 1.0};
}

[[nodiscard]] inline double find_responsive_gain(PlantSession& session,
                                                 const TuneConfig& cfg,
                                                 const ExperimentObserver& obs = {}) {
    cfg.validate();
    detail::ExperimentRunner runner(session, cfg, obs);
    return detail::find_responsive_gain_impl(runner);
}

[[nodiscard]] inline IntegratorResult tune_integrator(PlantSession& session, double k,
                                                      const TuneConfig& cfg,
                                                      const ExperimentObserver& obs = {}) {
    cfg.validate();
    detail::ExperimentRunner runner(session, cfg, obs);
    return detail::tune_integrator_impl(runner, k);
}

[[nodiscard]] inline GainResult tune_gain(PlantSession& session, double k, double Ti,
                                          const TuneConfig& cfg,
                                          const ExperimentObserver& obs = {}) {
    cfg.validate();
    detail::ExperimentRunner runner(session, cfg, obs);
    return detail::tune_gain_impl(runner, k, Ti);
}

[[nodiscard]] inline std::pair<double, double> zn_ultimate(PlantSession& session,
                                                           const TuneConfig& cfg,
                                                           const ExperimentObserver& obs = {}) {
    cfg.validate();
    detail::ExperimentRunner runner(session, cfg, obs);
    return detail::zn_ultimate_impl(runner);
}

/// Ultimate-sensitivity PID baseline: find (Ku, Tu) by gain escalation and
/// bisection, then apply the classic 0.6 / 0.5 / 0.125 rules behind the
/// configured roll-off filter.
[[nodiscard]] inline ZnResult zn_pid(PlantSession& session, const TuneConfig& cfg,
                                     const ExperimentObserver& obs = {}) {
    cfg.validate();
    detail::ExperimentRunner runner(session, cfg, obs);
    ZnResult res;
    const auto [Ku, Tu] = detail::zn_ultimate_impl(runner);
    res.Ku = Ku;
    res.Tu = Tu;
    res.pid = make_zn_pid(Ku, Tu, cfg.zn_filter_cutoff_hz, cfg.zn_filter_order);
    res.n_experiments = runner.used();
    res.log = runner.log();
    return res;
}

/// The full three-step campaign against an opaque plant session:
///   1. find a responsive proportional gain k,
///   2. shrink the PI integrator constant until sustained oscillation and
///      assign Ti = 10 / max(measured frequency, 1/Ti_bar),
///   3. scale the gain until the step overshoot lands in the target band,
/// then attach the fixed Lead element. Two verification runs close the
/// campaign: the tuned PI (its overshoot is achieved_M) and the tuned
/// PI-Lead, both retained in the log.
[[nodiscard]] inline PiLeadResult tune_pi_lead(PlantSession& session, const TuneConfig& cfg,
                                               const ExperimentObserver& obs = {}) {
    cfg.validate();
    detail::ExperimentRunner runner(session, cfg, obs);

    PiLeadResult res;
    res.k = detail::find_responsive_gain_impl(runner);
    res.integrator = detail::tune_integrator_impl(runner, res.k);
    res.Ti = res.integrator.Ti;

    const GainResult gain = detail::tune_gain_impl(runner, res.k, res.Ti);
    res.Kp = gain.Kp;
    res.band_fallback = gain.band_fallback;
    res.gain_log = gain.gain_log;
    res.lead = assign_lead(res.Ti);

    const ExperimentRecord pi_rec =
        runner.run("verify_pi", make_pi(res.Kp, res.Ti), res.Kp, res.Ti);
    res.achieved_M = detail::experiment_overshoot(pi_rec);
    runner.run("verify_pi_lead", series(make_pi(res.Kp, res.Ti), make_lead(res.lead)),
               res.Kp, res.Ti);

    if (res.achieved_M > 0.0 && res.achieved_M < 1.0)
        res.predicted_phase_margin_deg =
            phase_margin_from_zeta(zeta_from_overshoot(res.achieved_M));

    res.n_experiments = runner.used();
    res.log = runner.log();
    return res;
}

} // namespace ut
