// Acceptance gate. Runs every release criterion end to end and prints one
// [PASS]/[FAIL] line per criterion; exits nonzero if any line fails. Kept as
// a plain main so the output reads as a checklist rather than a unit suite.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ut/analysis.hpp"
#include "ut/json_io.hpp"
#include "ut/lti.hpp"
#include "ut/plant.hpp"
#include "ut/report.hpp"
#include "ut/simulate.hpp"
#include "ut/tuner.hpp"
#include "ut/wire.hpp"

#include "oracles.hpp"

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct Check {
    bool ok = true;
    std::string why;

    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (!why.empty()) why += "; ";
        why += what;
    }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Criterion 1: the worked ultimate pair reproduces the reference PI-Lead
// design. The pair is quoted at display precision, so the rounded inputs
// must land within rounding distance of Ti = 0.31 and the exact pre-rounding
// pair (omega_c_pi = 1/0.031) must reproduce it to the last bit. Controller
// coefficients are checked at 1e-12.
Check criterion_1() {
    Check c;

    const double ti_rounded = ut::integrator_time_from_ultimate(32.26, 20.73);
    c.expect(near(ti_rounded, 0.31, 5e-3), "rounded pair does not give Ti ~ 0.31");

    const double ti = ut::integrator_time_from_ultimate(1.0 / 0.031, 20.73);
    c.expect(ti == 0.31, "exact pair does not give Ti = 0.31");

    const ut::TransferFunction pi = ut::make_pi(450.0, 0.31);
    c.expect(pi.num.size() == 2 && pi.den.size() == 2, "PI coefficient counts");
    c.expect(near(pi.num[0], 139.5, 1e-12), "PI numerator s-coefficient");
    c.expect(near(pi.num[1], 450.0, 1e-12), "PI numerator constant");
    c.expect(near(pi.den[0], 0.31, 1e-12), "PI denominator s-coefficient");
    c.expect(pi.den[1] == 0.0, "PI denominator constant");
    c.expect(ut::format_tf(pi) == "(139.5 s + 450) / (0.31 s)", "PI display form");

    const ut::LeadParams lead = ut::assign_lead(0.31);
    c.expect(lead.alpha == 0.1, "lead alpha");
    c.expect(lead.tau == 0.031, "lead tau");
    c.expect(lead.K_L == 1.0, "lead dc gain");

    const ut::TransferFunction lt = ut::make_lead(lead);
    c.expect(lt.num.size() == 2 && lt.den.size() == 2, "lead coefficient counts");
    c.expect(lt.num[0] == 0.031 && lt.num[1] == 1.0, "lead numerator");
    c.expect(near(lt.den[0], 0.0031, 1e-12) && lt.den[1] == 1.0, "lead denominator");
    return c;
}

// Criterion 2: the classic tuning rule reproduces the reference PID for
// Ku = 1290, Tu = 0.098 s, with Td correct to two significant figures.
Check criterion_2() {
    Check c;
    const ut::ZnPid pid = ut::make_zn_pid(1290.0, 0.098);
    c.expect(near(pid.Kp, 774.0, 1e-12), "Kp != 774");
    c.expect(near(pid.Ti, 0.049, 1e-12), "Ti != 0.049");
    c.expect(near(pid.Td, 0.01225, 1e-12), "Td != 0.01225");

    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2g", pid.Td);
    c.expect(std::string(buf) == "0.012", "Td not 0.012 at two significant figures");

    c.expect(pid.tf.proper(), "filtered PID is not proper");
    return c;
}

// Criterion 3: the overshoot-to-phase-margin table. Each entry must match
// the closed form within 0.1 degrees and also match margins() of the
// prototype second-order loop wn^2 / (s (s + 2 zeta wn)) within 0.1 degrees.
Check criterion_3() {
    Check c;
    const double overshoots[] = {0.30, 0.35, 0.40};
    const double expected_deg[] = {39.1, 35.0, 31.2};

    for (int i = 0; i < 3; ++i) {
        const double zeta = ut::zeta_from_overshoot(overshoots[i]);
        const double pm = ut::phase_margin_from_zeta(zeta);
        std::ostringstream tag;
        tag << "M = " << overshoots[i] << ": ";
        c.expect(near(pm, expected_deg[i], 0.1), tag.str() + "table value off");
        c.expect(pm >= 30.0 - 0.1 && pm <= 40.0 + 0.1, tag.str() + "outside the design band");

        const double wn = 10.0;
        const ut::TransferFunction proto{{wn * wn}, {1.0, 2.0 * zeta * wn, 0.0}};
        const ut::MarginReport mr = ut::margins(proto);
        c.expect(mr.crossover_found, tag.str() + "prototype loop has no crossover");
        c.expect(near(mr.phase_margin_deg, pm, 0.1), tag.str() + "margins() disagrees");
    }
    return c;
}

// Criterion 4: full campaigns on the three linear catalog plants at the
// default experiment settings. Budget, final overshoot band, open-loop
// margins with and without the lead, and settling of both verification
// steps are all checked.
Check criterion_4() {
    Check c;
    const char* names[] = {"second_order_type_one", "fourth_order_resonant",
                           "delayed_type_one"};
    for (const char* name : names) {
        const std::string tag = std::string(name) + ": ";
        auto session = ut::make_catalog_session(name);
        const ut::TuneConfig cfg;
        const ut::PiLeadResult res = ut::tune_pi_lead(*session, cfg);

        c.expect(res.n_experiments <= 400, tag + "over the experiment budget");
        c.expect(res.achieved_M >= 0.29 && res.achieved_M <= 0.41,
                 tag + "final overshoot outside [0.29, 0.41]");

        const ut::TransferFunction g =
            std::get<ut::LinearTfParams>(ut::catalog(name).model).tf;
        const ut::MarginReport with_pi = ut::margins(ut::series(res.pi(), g));
        const ut::MarginReport with_lead = ut::margins(ut::series(res.pi_lead(), g));
        c.expect(with_pi.crossover_found && with_lead.crossover_found,
                 tag + "open loop has no gain crossover");
        c.expect(with_pi.phase_margin_deg >= 25.0 && with_pi.phase_margin_deg <= 45.0,
                 tag + "PI phase margin outside [25, 45] deg");
        c.expect(with_lead.phase_margin_deg >= with_pi.phase_margin_deg - 1e-9,
                 tag + "lead reduced the phase margin");

        bool saw_pi = false, saw_lead = false;
        for (const ut::ExperimentRecord& rec : res.log) {
            if (rec.stage == "verify_pi") {
                saw_pi = true;
                c.expect(rec.metrics && rec.metrics->settling_time.has_value(),
                         tag + "PI verification step never settled");
            } else if (rec.stage == "verify_pi_lead") {
                saw_lead = true;
                c.expect(rec.metrics && rec.metrics->settling_time.has_value(),
                         tag + "PI-Lead verification step never settled");
            }
        }
        c.expect(saw_pi && saw_lead, tag + "verification records missing");
    }
    return c;
}

// Criterion 5: the motor stage. Tune once, then across five noise seeds:
// (a) after a press-and-release disturbance on a held 0.01 m step, the loop
//     with the lead re-enters the 2% band no later than the PI loop alone;
// (b) the classic ultimate-gain PID overshoots the same step harder than
//     the PI-Lead design.
Check criterion_5() {
    Check c;
    const ut::CatalogScenarioHints hints = ut::catalog_hints("vcm_like");

    ut::TuneConfig cfg;
    cfg.experiment.x_ref = hints.x_ref;
    cfg.experiment.gravity_feedforward = hints.gravity_feedforward;

    auto tuned_on = ut::make_catalog_session("vcm_like", 7);
    const ut::PiLeadResult res = ut::tune_pi_lead(*tuned_on, cfg);
    tuned_on->reset();
    const ut::ZnResult zn = ut::zn_pid(*tuned_on, cfg);

    const ut::TransferFunction pi = res.pi();
    const ut::TransferFunction pi_lead = res.pi_lead();

    // Press-and-release on the settled step: a firm 60 ms tap. Short enough
    // to excite the fast loop mode, where damping differences show; a long
    // push instead measures integrator discharge, which both loops share.
    ut::ScenarioSpec disturbed;
    disturbed.x_ref = 0.01;
    disturbed.t_end = 6.0;
    disturbed.dt = cfg.experiment.dt;
    disturbed.gravity_feedforward = hints.gravity_feedforward;
    disturbed.disturbance = ut::DisturbancePulse{2.0, 2.06, -4.5};

    ut::ScenarioSpec plain = disturbed;
    plain.disturbance.reset();
    plain.t_end = 2.0;

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        auto session = ut::make_catalog_session("vcm_like", seed);

        session->reset();
        const ut::Trace with_pi = session->run(pi, disturbed);
        session->reset();
        const ut::Trace with_lead = session->run(pi_lead, disturbed);

        const auto rec_pi =
            ut::recovery_time(with_pi, disturbed.x_ref, disturbed.disturbance->t_off);
        const auto rec_lead =
            ut::recovery_time(with_lead, disturbed.x_ref, disturbed.disturbance->t_off);
        c.expect(rec_pi.has_value(), tag + "PI loop never recovered");
        c.expect(rec_lead.has_value(), tag + "PI-Lead loop never recovered");
        if (rec_pi && rec_lead)
            c.expect(*rec_lead <= *rec_pi, tag + "lead did not speed up recovery");

        session->reset();
        const ut::Trace zn_step = session->run(zn.pid.tf, plain);
        session->reset();
        const ut::Trace lead_step = session->run(pi_lead, plain);
        const ut::StepMetrics zn_m = ut::step_metrics(zn_step, plain.x_ref);
        const ut::StepMetrics lead_m = ut::step_metrics(lead_step, plain.x_ref);
        c.expect(std::abs(zn_m.overshoot) > std::abs(lead_m.overshoot),
                 tag + "classic PID did not overshoot harder");
    }
    return c;
}

// Criterion 6: determinism across the wire. The same campaign run against
// the in-process simulator and against a served plant with the same seed
// must produce byte-identical JSON reports.
Check criterion_6() {
    Check c;

    ut::TuneConfig cfg;
    cfg.experiment.dt = 1e-3;

    const auto build_report = [&cfg](ut::PlantSession& session) {
        ut::CampaignReport rep;
        rep.plant_label = session.label();
        rep.seed = 7;
        rep.config = cfg;
        const auto observer = [&rep](const ut::ExperimentRecord& rec, const ut::Trace&) {
            ut::ReportExperiment row;
            row.index = rec.index;
            row.stage = rec.stage;
            row.controller = rec.controller;
            row.Kp = rec.Kp;
            row.Ti = rec.Ti;
            row.aborted = rec.aborted;
            row.verdict = rec.verdict;
            row.metrics = rec.metrics;
            rep.experiments.push_back(std::move(row));
        };
        rep.pi_lead = ut::tune_pi_lead(session, cfg, observer);
        return ut::jio::report_to_json(rep).dump(2);
    };

    auto local = ut::make_catalog_session("second_order_type_one", 7);
    const std::string local_report = build_report(*local);

    ut::wire::WireServer server(ut::catalog("second_order_type_one"),
                                "second_order_type_one");
    std::thread server_thread([&server] { server.run(); });
    std::string wire_report;
    try {
        ut::wire::WireSession remote("127.0.0.1", server.port(), 7);
        wire_report = build_report(remote);
    } catch (...) {
        server.stop();
        server_thread.join();
        throw;
    }
    server.stop();
    server_thread.join();

    c.expect(!local_report.empty(), "empty local report");
    c.expect(local_report.find("\"ut_schema\"") != std::string::npos,
             "report is not schema-stamped");
    c.expect(local_report == wire_report, "local and wire reports differ");
    return c;
}

// Criterion 7: the numerical invariants behind everything else. Conversion
// round-trips and monotonicity, block algebra, pole placement, step-solver
// convergence under dt halving, and the oscillation detector on known
// synthetic inputs.
Check criterion_7() {
    Check c;

    double prev_zeta = 1e300;
    for (double m = 0.02; m < 0.951; m += 0.01) {
        const double zeta = ut::zeta_from_overshoot(m);
        c.expect(zeta < prev_zeta, "zeta(M) is not strictly decreasing");
        prev_zeta = zeta;
        c.expect(near(ut::overshoot_from_zeta(zeta), m, 1e-9),
                 "overshoot conversion round-trip above 1e-9");
    }
    double prev_pm = -1e300;
    for (double zeta = 0.05; zeta < 0.96; zeta += 0.05) {
        const double pm = ut::phase_margin_from_zeta(zeta);
        c.expect(pm > prev_pm, "phase margin not increasing in zeta");
        prev_pm = pm;
    }

    const ut::TransferFunction a{{2.0, 1.0}, {1.0, 3.0, 2.0}};
    const ut::TransferFunction b{{5.0}, {0.5, 1.0}};
    const ut::TransferFunction ab = ut::series(a, b);
    c.expect(ab.num == ut::poly::mul(a.num, b.num) &&
                 ab.den == ut::poly::mul(a.den, b.den),
             "series() is not the polynomial product");

    const ut::TransferFunction type_one{{3.0}, {1.0, 0.0}};
    const ut::TransferFunction closed = ut::unity_feedback(type_one);
    const double dc = ut::poly::eval_real(closed.num, 0.0) /
                      ut::poly::eval_real(closed.den, 0.0);
    c.expect(near(dc, 1.0, 1e-12), "type-one closed loop dc gain != 1");

    const auto ps = ut::poles(ut::TransferFunction{{1.0}, {1.0, 3.0, 2.0}});
    c.expect(ps.size() == 2, "pole count of a quadratic");
    if (ps.size() == 2) {
        c.expect(near(ps[0].real(), -2.0, 1e-9) && near(ps[0].imag(), 0.0, 1e-9),
                 "fast pole off");
        c.expect(near(ps[1].real(), -1.0, 1e-9) && near(ps[1].imag(), 0.0, 1e-9),
                 "slow pole off");
    }

    {
        ut::PlantSpec plant = ut::catalog("second_order_type_one");
        ut::ScenarioSpec sc;
        sc.t_end = 3.0;
        sc.dt = 1e-4;
        const ut::TransferFunction pi = ut::make_pi(1.0, 1.0);
        const ut::Trace coarse = ut::simulate_closed_loop(plant, pi, sc);
        sc.dt = 5e-5;
        const ut::Trace fine = ut::simulate_closed_loop(plant, pi, sc);
        const double drift = std::abs(coarse.x.back() - fine.x.back());
        c.expect(drift <= 1e-3, "dt halving moved the endpoint by more than 1e-3");
    }

    {
        oracle::ToneSpec tone;
        tone.omega = 10.0;
        tone.offset = 0.0;
        const ut::OscillationVerdict sustained = ut::detect_sustained(oracle::make_tone(tone));
        c.expect(sustained.sustained, "pure tone not flagged sustained");
        c.expect(sustained.period.has_value(), "pure tone period missing");
        if (sustained.period) {
            const double want = 2.0 * std::acos(-1.0) / tone.omega;
            c.expect(std::abs(*sustained.period - want) / want < 0.02,
                     "pure tone period off by more than 2%");
        }

        tone.growth = -0.5;
        const ut::OscillationVerdict decaying = ut::detect_sustained(oracle::make_tone(tone));
        c.expect(!decaying.sustained && !decaying.diverging, "decaying tone misread");

        tone.growth = 0.4;
        tone.amplitude = 0.1;
        const ut::OscillationVerdict growing = ut::detect_sustained(oracle::make_tone(tone));
        c.expect(growing.diverging, "growing tone not flagged diverging");
    }
    return c;
}

struct Criterion {
    const char* title;
    Check (*run)();
    double budget_s; // wall-clock limit from the release checklist
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {"worked PI-Lead design reproduced bit-for-bit", criterion_1, 1.0},
        {"worked ultimate-gain PID reproduced", criterion_2, 1.0},
        {"overshoot-to-phase-margin table", criterion_3, 1.0},
        {"catalog campaigns inside budget and margin band", criterion_4, 60.0},
        {"motor stage: lead recovery and classic-PID comparison", criterion_5, 30.0},
        {"byte-identical reports locally and over the wire", criterion_6, 10.0},
        {"numerical invariant suite", criterion_7, 30.0},
    };

    int failures = 0;
    int index = 0;
    for (const Criterion& cr : criteria) {
        ++index;
        Check check;
        Stopwatch watch;
        try {
            check = cr.run();
        } catch (const std::exception& e) {
            check.ok = false;
            check.why = std::string("exception: ") + e.what();
        }
        const double elapsed = watch.seconds();
        if (elapsed > cr.budget_s) {
            check.ok = false;
            if (!check.why.empty()) check.why += "; ";
            check.why += "runtime over budget";
        }
        std::printf("[%s] criterion %d: %s (%.2f s)%s%s\n", check.ok ? "PASS" : "FAIL",
                    index, cr.title, elapsed, check.ok ? "" : " -- ",
                    check.ok ? "" : check.why.c_str());
        if (!check.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
