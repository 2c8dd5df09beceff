// ut: model-free PI-Lead tuning for type-one motion systems.
//
// Subcommands: tune, simulate, analyze, compare, serve.
// Exit codes: 0 ok, 1 usage or bad input file, 2 tuner/analysis failure,
// 3 transport failure.

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ut/analysis.hpp"
#include "ut/json_io.hpp"
#include "ut/lti.hpp"
#include "ut/plant.hpp"
#include "ut/report.hpp"
#include "ut/simulate.hpp"
#include "ut/trace.hpp"
#include "ut/tuner.hpp"
#include "ut/version.hpp"
#include "ut/wire.hpp"

namespace fs = std::filesystem;
using ut::jio::json;

namespace {

struct UsageErr : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- plant source ----------------------------------------------------------

struct PlantSource {
    std::string plant;   // catalog name
    std::string spec;    // PlantSpec JSON file
    std::string connect; // host:port
};

void add_source_flags(CLI::App* cmd, PlantSource& src) {
    cmd->add_option("--plant", src.plant, "catalog plant name");
    cmd->add_option("--spec", src.spec, "PlantSpec JSON file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--connect", src.connect, "host:port of a plant server");
}

void check_one_source(const PlantSource& src) {
    const int n = !src.plant.empty() + !src.spec.empty() + !src.connect.empty();
    if (n != 1)
        throw UsageErr("exactly one of --plant, --spec, --connect is required");
}

std::pair<std::string, std::uint16_t> split_host_port(const std::string& hp) {
    const std::size_t pos = hp.rfind(':');
    if (pos == std::string::npos || pos + 1 >= hp.size())
        throw UsageErr("--connect expects host:port, got '" + hp + "'");
    const long port = std::strtol(hp.c_str() + pos + 1, nullptr, 10);
    if (port <= 0 || port > 65535)
        throw UsageErr("bad port in '" + hp + "'");
    return {hp.substr(0, pos), static_cast<std::uint16_t>(port)};
}

ut::PlantSpec load_plant_spec(const std::string& path) {
    return ut::jio::plant_from_json(ut::jio::load_json(path));
}

std::unique_ptr<ut::PlantSession> open_session(const PlantSource& src,
                                               std::optional<std::uint64_t> seed) {
    if (!src.connect.empty()) {
        const auto [host, port] = split_host_port(src.connect);
        return std::make_unique<ut::wire::WireSession>(host, port, seed);
    }
    if (!src.plant.empty()) return ut::make_catalog_session(src.plant, seed);
    ut::PlantSpec spec = load_plant_spec(src.spec);
    if (seed) spec.seed = *seed;
    return ut::make_session(std::move(spec), "spec");
}

// --- scenario / controller flags -------------------------------------------

struct ScenarioFlags {
    std::optional<double> x_ref, t_end, dt, ff;
    std::vector<double> disturb; // t_on, t_off, force
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
    cmd->add_option("--xref", f.x_ref, "step reference amplitude");
    cmd->add_option("--t-end", f.t_end, "experiment horizon [s]");
    cmd->add_option("--dt", f.dt, "sample period [s]");
    cmd->add_option("--ff", f.ff, "constant feedforward added to u");
    cmd->add_option("--disturb", f.disturb,
                    "disturbance pulse as t_on,t_off,force")
        ->delimiter(',')
        ->expected(0, 3);
}

/// Layer a scenario: base defaults, then catalog hints, then explicit flags.
ut::ScenarioSpec build_scenario(const ScenarioFlags& f, const PlantSource& src,
                                ut::ScenarioSpec base, bool apply_hints = true) {
    if (apply_hints && !src.plant.empty()) {
        const ut::CatalogScenarioHints h = ut::catalog_hints(src.plant);
        base.x_ref = h.x_ref;
        base.gravity_feedforward = h.gravity_feedforward;
    }
    if (f.x_ref) base.x_ref = *f.x_ref;
    if (f.t_end) base.t_end = *f.t_end;
    if (f.dt) base.dt = *f.dt;
    if (f.ff) base.gravity_feedforward = *f.ff;
    if (!f.disturb.empty()) {
        if (f.disturb.size() != 3)
            throw UsageErr("--disturb expects t_on,t_off,force");
        base.disturbance =
            ut::DisturbancePulse{f.disturb[0], f.disturb[1], f.disturb[2]};
    }
    base.validate();
    return base;
}

struct ControllerFlags {
    std::vector<std::string> files;
    std::vector<double> pi;   // Kp, Ti
    std::vector<double> lead; // alpha, tau
};

void add_controller_flags(CLI::App* cmd, ControllerFlags& f, bool repeatable) {
    auto* opt = cmd->add_option("--controller", f.files, "controller JSON file");
    opt->check(CLI::ExistingFile);
    if (!repeatable) opt->expected(0, 1);
    cmd->add_option("--pi", f.pi, "inline PI controller as Kp,Ti")
        ->delimiter(',')
        ->expected(0, 2);
    cmd->add_option("--lead", f.lead, "inline Lead element as alpha,tau")
        ->delimiter(',')
        ->expected(0, 2);
}

/// Named controller list from files plus at most one inline --pi [--lead].
std::vector<std::pair<std::string, ut::TransferFunction>>
build_controllers(const ControllerFlags& f) {
    std::vector<std::pair<std::string, ut::TransferFunction>> out;
    for (const std::string& path : f.files)
        out.emplace_back(fs::path(path).stem().string(),
                         ut::jio::controller_from_json(ut::jio::load_json(path)));
    if (!f.pi.empty()) {
        if (f.pi.size() != 2) throw UsageErr("--pi expects Kp,Ti");
        ut::TransferFunction c = ut::make_pi(f.pi[0], f.pi[1]);
        std::string name = "pi";
        if (!f.lead.empty()) {
            if (f.lead.size() != 2) throw UsageErr("--lead expects alpha,tau");
            c = ut::series(c, ut::make_lead({f.lead[0], f.lead[1], 1.0}));
            name = "pi_lead";
        }
        out.emplace_back(std::move(name), std::move(c));
    } else if (!f.lead.empty()) {
        throw UsageErr("--lead requires --pi");
    }
    if (out.empty()) throw UsageErr("no controller given (--controller or --pi)");
    return out;
}

// --- shared output helpers -------------------------------------------------

std::string trace_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%03d.csv", index);
    return buf;
}

void print_metrics(const std::optional<ut::StepMetrics>& m,
                   const ut::OscillationVerdict& v) {
    if (m) {
        std::printf("  overshoot            %.4g\n", m->overshoot);
        std::printf("  peak_time            %.4g s\n", m->peak_time);
        if (m->settling_time)
            std::printf("  settling_time        %.4g s\n", *m->settling_time);
        else
            std::printf("  settling_time        none within horizon\n");
        std::printf("  steady_state_error   %.4g\n", m->steady_state_error);
    }
    std::printf("  sustained            %s\n", v.sustained ? "yes" : "no");
    if (v.period) std::printf("  period               %.4g s (omega %.4g rad/s)\n",
                              *v.period, v.omega());
    std::printf("  diverging            %s\n", v.diverging ? "yes" : "no");
}

// --- tune ------------------------------------------------------------------

struct TuneArgs {
    PlantSource src;
    ScenarioFlags scen;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::string config_file;
    std::string traces = "all"; // all | final | none
    bool with_zn = false;
};

int cmd_tune(const TuneArgs& a) {
    check_one_source(a.src);
    fs::create_directories(a.out_dir);

    ut::TuneConfig cfg;
    if (!a.config_file.empty())
        cfg = ut::jio::tune_config_from_json(ut::jio::load_json(a.config_file));
    cfg.experiment = build_scenario(a.scen, a.src, cfg.experiment,
                                    /*apply_hints=*/a.config_file.empty());
    cfg.validate();

    auto session = open_session(a.src, a.seed);

    ut::CampaignReport report;
    report.plant_label = session->label();
    report.seed = a.seed;
    report.config = cfg;

    int file_index = 0;
    ut::Trace verify_pi_trace, verify_lead_trace;
    auto observer = [&](const ut::ExperimentRecord& rec, const ut::Trace& tr) {
        ut::ReportExperiment row;
        row.index = file_index;
        row.stage = rec.stage;
        row.controller = rec.controller;
        row.Kp = rec.Kp;
        row.Ti = rec.Ti;
        row.aborted = rec.aborted;
        row.verdict = rec.verdict;
        row.metrics = rec.metrics;
        const bool keep =
            a.traces == "all" ||
            (a.traces == "final" && (rec.stage == "verify_pi" ||
                                     rec.stage == "verify_pi_lead" ||
                                     rec.stage == "zn_confirm"));
        if (keep) {
            row.trace_file = trace_filename(file_index);
            const std::string path = (fs::path(a.out_dir) / row.trace_file).string();
            ut::write_trace_csv(path, tr);
            // recompute from the rounded file so the report row is exactly
            // what a later `analyze` of that file reproduces
            const ut::Trace rt = ut::read_trace_csv(path);
            try {
                row.verdict = ut::detect_sustained(rt, cfg.detector);
            } catch (const ut::TooShort&) {
                row.verdict = rec.verdict;
            }
            try {
                row.metrics = ut::step_metrics(rt, cfg.experiment.x_ref);
            } catch (const ut::TooShort&) {
                row.metrics = rec.metrics;
            }
        }
        if (rec.stage == "verify_pi") verify_pi_trace = tr;
        if (rec.stage == "verify_pi_lead") verify_lead_trace = tr;
        report.experiments.push_back(std::move(row));
        ++file_index;
    };

    ut::PiLeadResult res = ut::tune_pi_lead(*session, cfg, observer);
    report.pi_lead = res;
    if (a.with_zn) {
        session->reset();
        report.zn = ut::zn_pid(*session, cfg, observer);
    }

    ut::jio::save_json((fs::path(a.out_dir) / "report.json").string(),
                       ut::jio::report_to_json(report));

    const ut::TransferFunction C = res.pi();
    const ut::TransferFunction L = res.lead_tf();
    ut::write_bode_csv((fs::path(a.out_dir) / "bode.csv").string(),
                       {{"C", C}, {"L", L}, {"CL", ut::series(C, L)}});

    std::vector<ut::PlotSeries> plot;
    auto as_series = [](const std::string& label, const ut::Trace& tr,
                        const std::vector<double>& y) {
        ut::PlotSeries s;
        s.label = label;
        s.y = y;
        s.t.reserve(tr.size());
        for (std::size_t i = 0; i < tr.size(); ++i) s.t.push_back(tr.time(i));
        return s;
    };
    if (verify_pi_trace.size() > 0)
        plot.push_back(as_series("reference", verify_pi_trace, verify_pi_trace.r));
    if (verify_pi_trace.size() > 0)
        plot.push_back(as_series("PI", verify_pi_trace, verify_pi_trace.x));
    if (verify_lead_trace.size() > 0)
        plot.push_back(as_series("PI-Lead", verify_lead_trace, verify_lead_trace.x));
    ut::write_step_svg((fs::path(a.out_dir) / "step.svg").string(),
                       "step response, plant: " + report.plant_label, plot);

    std::printf("plant: %s\n", report.plant_label.c_str());
    std::printf("experiments: %d%s\n", file_index,
                a.with_zn ? " (including ZN baseline)" : "");
    std::printf("k = %.6g, Ti_bar = %.6g s\n", res.k, res.integrator.Ti_bar);
    std::printf("C(s) = %s\n", ut::format_tf(C).c_str());
    std::printf("L(s) = %s\n", ut::format_tf(L).c_str());
    std::printf("achieved M = %.4g", res.achieved_M);
    if (res.predicted_phase_margin_deg)
        std::printf("  (predicted phase margin %.1f deg)",
                    *res.predicted_phase_margin_deg);
    std::printf("%s\n", res.band_fallback ? "  [warning: band not reached]" : "");
    if (report.zn)
        std::printf("ZN baseline: Ku = %.6g, Tu = %.6g s -> Kp = %.6g, Ti = %.6g, "
                    "Td = %.6g\n",
                    report.zn->Ku, report.zn->Tu, report.zn->pid.Kp,
                    report.zn->pid.Ti, report.zn->pid.Td);
    std::printf("wrote %s/{report.json, bode.csv, step.svg", a.out_dir.c_str());
    if (a.traces != "none") std::printf(", trace_NNN.csv");
    std::printf("}\n");
    return 0;
}

// --- simulate --------------------------------------------------------------

struct SimArgs {
    PlantSource src;
    ScenarioFlags scen;
    ControllerFlags ctrl;
    std::optional<std::uint64_t> seed;
    std::string out = "trace.csv";
};

int cmd_simulate(const SimArgs& a) {
    check_one_source(a.src);
    auto controllers = build_controllers(a.ctrl);
    if (controllers.size() != 1)
        throw UsageErr("simulate expects exactly one controller");
    ut::ScenarioSpec base;
    base.t_end = 2.0;
    const ut::ScenarioSpec sc = build_scenario(a.scen, a.src, base);

    ut::Trace tr;
    if (!a.src.connect.empty()) {
        auto session = open_session(a.src, a.seed);
        tr = session->run(controllers[0].second, sc);
    } else {
        // local runs keep the clean output column for offline study
        ut::PlantSpec spec = a.src.plant.empty() ? load_plant_spec(a.src.spec)
                                                 : ut::catalog(a.src.plant);
        if (a.seed) spec.seed = *a.seed;
        tr = ut::simulate_closed_loop(spec, controllers[0].second, sc,
                                      ut::detail::run_seed(spec.seed, 0));
    }
    ut::write_trace_csv(a.out, tr);

    std::printf("wrote %s (%zu samples, dt = %.4g s%s)\n", a.out.c_str(), tr.size(),
                tr.dt, tr.diverged ? ", diverged" : "");
    try {
        print_metrics(ut::step_metrics(tr, sc.x_ref), ut::detect_sustained(tr));
    } catch (const ut::TooShort&) {
        std::printf("  record too short for metrics\n");
    }
    return 0;
}

// --- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string trace_file;
    std::optional<double> x_ref;
    bool as_json = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
    const ut::Trace tr = ut::read_trace_csv(a.trace_file);
    const double x_ref = a.x_ref ? *a.x_ref : (tr.r.empty() ? 1.0 : tr.r.back());
    if (x_ref == 0.0) throw UsageErr("reference is zero; pass --xref");

    std::optional<ut::StepMetrics> metrics;
    try {
        metrics = ut::step_metrics(tr, x_ref);
    } catch (const ut::TooShort&) {
    }
    const ut::OscillationVerdict v = ut::detect_sustained(tr);

    if (a.as_json) {
        json j = ut::jio::stamp("analysis");
        j["trace_file"] = a.trace_file;
        j["x_ref"] = x_ref;
        j["metrics"] = metrics ? ut::jio::metrics_to_json(*metrics) : json(nullptr);
        j["oscillation"] = ut::jio::verdict_to_json(v);
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("%s: %zu samples, dt = %.4g s\n", a.trace_file.c_str(), tr.size(),
                    tr.dt);
        print_metrics(metrics, v);
    }
    return 0;
}

// --- compare ---------------------------------------------------------------

struct CompareArgs {
    PlantSource src;
    ScenarioFlags scen;
    ControllerFlags ctrl;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::vector<double> steps{0.005, 0.01, 0.015};
};

int cmd_compare(const CompareArgs& a) {
    check_one_source(a.src);
    auto controllers = build_controllers(a.ctrl);
    if (a.steps.empty()) throw UsageErr("--steps needs at least one value");
    fs::create_directories(a.out_dir);

    auto session = open_session(a.src, a.seed);
    const bool has_pulse = !a.scen.disturb.empty();

    std::FILE* csv = std::fopen(
        (fs::path(a.out_dir) / "compare.csv").string().c_str(), "wb");
    if (!csv) throw ut::IoError("cannot open compare.csv for write");
    std::fprintf(csv, "controller,x_ref,overshoot,peak_time,settling_time,"
                      "steady_state_error,recovery_time\n");

    std::printf("%-14s %10s %10s %10s %10s %10s %10s\n", "controller", "x_ref",
                "overshoot", "peak_t", "settle_t", "sse", "recovery");
    for (std::size_t si = 0; si < a.steps.size(); ++si) {
        ScenarioFlags f = a.scen;
        f.x_ref = a.steps[si];
        ut::ScenarioSpec base;
        base.t_end = 2.0;
        const ut::ScenarioSpec sc = build_scenario(f, a.src, base);

        std::vector<ut::PlotSeries> plot;
        bool ref_plotted = false;
        for (const auto& [name, ctrl] : controllers) {
            session->reset(); // every run sees the same noise draw
            const ut::Trace tr = session->run(ctrl, sc);

            std::optional<ut::StepMetrics> m;
            try {
                m = ut::step_metrics(tr, sc.x_ref);
            } catch (const ut::TooShort&) {
            }
            std::optional<double> rec;
            if (has_pulse && sc.disturbance)
                rec = ut::recovery_time(tr, sc.x_ref, sc.disturbance->t_off);

            auto cell = [](const std::optional<double>& v) {
                char b[32];
                if (v) std::snprintf(b, sizeof b, "%.4g", *v);
                else std::snprintf(b, sizeof b, "-");
                return std::string(b);
            };
            std::printf("%-14s %10.4g %10s %10s %10s %10s %10s\n", name.c_str(),
                        sc.x_ref,
                        cell(m ? std::optional<double>(m->overshoot) : std::nullopt)
                            .c_str(),
                        cell(m ? std::optional<double>(m->peak_time) : std::nullopt)
                            .c_str(),
                        cell(m ? m->settling_time : std::nullopt).c_str(),
                        cell(m ? std::optional<double>(m->steady_state_error)
                               : std::nullopt)
                            .c_str(),
                        cell(rec).c_str());
            std::fprintf(csv, "%s,%s,%s,%s,%s,%s,%s\n", name.c_str(),
                         ut::detail::format_g9(sc.x_ref).c_str(),
                         m ? ut::detail::format_g9(m->overshoot).c_str() : "nan",
                         m ? ut::detail::format_g9(m->peak_time).c_str() : "nan",
                         m && m->settling_time
                             ? ut::detail::format_g9(*m->settling_time).c_str()
                             : "nan",
                         m ? ut::detail::format_g9(m->steady_state_error).c_str()
                           : "nan",
                         rec ? ut::detail::format_g9(*rec).c_str() : "nan");

            ut::PlotSeries s;
            s.label = name;
            for (std::size_t i = 0; i < tr.size(); ++i) s.t.push_back(tr.time(i));
            s.y = tr.x;
            if (!ref_plotted) {
                ut::PlotSeries rs;
                rs.label = "reference";
                rs.t = s.t;
                rs.y = tr.r;
                plot.push_back(std::move(rs));
                ref_plotted = true;
            }
            plot.push_back(std::move(s));
        }
        char svg_name[48];
        std::snprintf(svg_name, sizeof svg_name, "compare_%03zu.svg", si);
        char title[96];
        std::snprintf(title, sizeof title, "step to %.4g, plant: %s", a.steps[si],
                      session->label().c_str());
        ut::write_step_svg((fs::path(a.out_dir) / svg_name).string(), title, plot);
    }
    std::fclose(csv);
    std::printf("wrote %s/{compare.csv, compare_NNN.svg}\n", a.out_dir.c_str());
    return 0;
}

// --- serve -----------------------------------------------------------------

std::atomic<ut::wire::WireServer*> g_server{nullptr};

void handle_stop_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

struct ServeArgs {
    PlantSource src;
    std::optional<std::uint64_t> seed;
    std::uint16_t port = 0;
};

int cmd_serve(const ServeArgs& a) {
    if (!a.src.connect.empty() || (a.src.plant.empty() == a.src.spec.empty()))
        throw UsageErr("serve expects exactly one of --plant or --spec");
    ut::PlantSpec spec;
    std::string label;
    if (!a.src.plant.empty()) {
        spec = ut::catalog(a.src.plant);
        label = a.src.plant;
    } else {
        spec = load_plant_spec(a.src.spec);
        label = "spec";
    }
    if (a.seed) spec.seed = *a.seed;

    ut::wire::WireServer server(std::move(spec), label, a.port);
    g_server.store(&server);
    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    std::printf("serving %s on port %u\n", label.c_str(), server.port());
    std::fflush(stdout);
    server.run();
    g_server.store(nullptr);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-free PI-Lead tuner for type-one motion systems"};
    app.set_version_flag("--version", ut::kToolVersion);
    app.require_subcommand(1);

    TuneArgs tune;
    auto* t = app.add_subcommand("tune", "run a full tuning campaign");
    add_source_flags(t, tune.src);
    add_scenario_flags(t, tune.scen);
    t->add_option("--seed", tune.seed, "noise seed")->envname("UT_SEED");
    t->add_option("-o,--out", tune.out_dir, "output directory");
    t->add_option("--config", tune.config_file, "TuneConfig JSON file")
        ->check(CLI::ExistingFile);
    t->add_option("--traces", tune.traces, "trace files to keep")
        ->check(CLI::IsMember({"all", "final", "none"}));
    t->add_flag("--zn", tune.with_zn, "also run the ZN-PID baseline");

    SimArgs sim;
    auto* s = app.add_subcommand("simulate", "one closed-loop run, CSV out");
    add_source_flags(s, sim.src);
    add_scenario_flags(s, sim.scen);
    add_controller_flags(s, sim.ctrl, false);
    s->add_option("--seed", sim.seed, "noise seed")->envname("UT_SEED");
    s->add_option("-o,--out", sim.out, "output CSV path");

    AnalyzeArgs an;
    auto* az = app.add_subcommand("analyze", "recompute metrics from a trace CSV");
    az->add_option("trace", an.trace_file, "trace CSV file")
        ->required()
        ->check(CLI::ExistingFile);
    az->add_option("--xref", an.x_ref, "reference (default: final r value)");
    az->add_flag("--json", an.as_json, "emit a JSON document");

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare",
                                 "overlay controllers across reference steps");
    add_source_flags(c, cmp.src);
    add_scenario_flags(c, cmp.scen);
    add_controller_flags(c, cmp.ctrl, true);
    c->add_option("--seed", cmp.seed, "noise seed")->envname("UT_SEED");
    c->add_option("-o,--out", cmp.out_dir, "output directory");
    c->add_option("--steps", cmp.steps, "reference steps")->delimiter(',');

    ServeArgs srv;
    auto* sv = app.add_subcommand("serve", "expose a simulated plant over TCP");
    add_source_flags(sv, srv.src);
    sv->add_option("--seed", srv.seed, "noise seed")->envname("UT_SEED");
    sv->add_option("--port", srv.port, "TCP port (0 picks one)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*t) return cmd_tune(tune);
        if (*s) return cmd_simulate(sim);
        if (*az) return cmd_analyze(an);
        if (*c) return cmd_compare(cmp);
        if (*sv) return cmd_serve(srv);
    } catch (const UsageErr& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ut::ProtocolError& e) {
        std::fprintf(stderr, "transport error: %s\n", e.what());
        return 3;
    } catch (const ut::SchemaError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ut::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ut::UnknownPlant& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ut::BadPlantSpec& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ut::BadScenario& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ut::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
