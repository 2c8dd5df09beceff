#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ut/analysis.hpp"
#include "ut/json_io.hpp"
#include "ut/lti.hpp"
#include "ut/trace.hpp"
#include "ut/tuner.hpp"
#include "ut/version.hpp"

namespace ut {

// ---------------------------------------------------------------------------
// Textbook-style display of rational functions
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_coeff(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace detail

/// "139.5 s + 450" from {139.5, 450}.
inline std::string format_poly(const std::vector<double>& c) {
    const std::vector<double> t = poly::trim(c);
    const std::size_t deg = t.size() - 1;
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = t[i];
        if (v == 0.0 && t.size() > 1) continue;
        const std::size_t p = deg - i;
        if (out.empty()) {
            if (v < 0.0) out += "-";
        } else {
            out += v < 0.0 ? " - " : " + ";
        }
        const double mag = std::abs(v);
        if (mag != 1.0 || p == 0) out += detail::format_coeff(mag);
        if (p >= 1) {
            if (mag != 1.0) out += " ";
            out += "s";
            if (p >= 2) out += "^" + std::to_string(p);
        }
    }
    return out.empty() ? "0" : out;
}

/// "(139.5 s + 450) / (0.31 s)" with an exp factor when dead time is present.
inline std::string format_tf(const TransferFunction& tf) {
    std::string out = "(" + format_poly(tf.num) + ") / (" + format_poly(tf.den) + ")";
    if (tf.dead_time > 0.0)
        out += " exp(-" + detail::format_coeff(tf.dead_time) + " s)";
    return out;
}

// ---------------------------------------------------------------------------
// Campaign report
// ---------------------------------------------------------------------------

struct ReportExperiment {
    int index = 0;
    std::string stage;
    TransferFunction controller;
    double Kp = 0.0;
    double Ti = 0.0;
    bool aborted = false;
    OscillationVerdict verdict;
    std::optional<StepMetrics> metrics;
    std::string trace_file; // relative path; empty when traces are not kept
};

struct CampaignReport {
    std::string tool_version = kToolVersion;
    std::string plant_label = "external";
    std::optional<std::uint64_t> seed; // as requested on the command line
    TuneConfig config;
    std::optional<PiLeadResult> pi_lead;
    std::optional<ZnResult> zn;
    std::vector<ReportExperiment> experiments;
};

namespace jio {

inline json verdict_to_json(const OscillationVerdict& v) {
    json j;
    j["sustained"] = v.sustained;
    j["period"] = v.period ? json(*v.period) : json(nullptr);
    j["omega"] = v.period ? json(v.omega()) : json(nullptr);
    j["amplitude_ratio"] = v.amplitude_ratio;
    j["n_peaks"] = v.n_peaks;
    j["diverging"] = v.diverging;
    return j;
}

inline json metrics_to_json(const StepMetrics& m) {
    json j;
    j["overshoot"] = m.overshoot;
    j["peak_time"] = m.peak_time;
    j["settling_time"] = m.settling_time ? json(*m.settling_time) : json(nullptr);
    j["steady_state_error"] = m.steady_state_error;
    return j;
}

inline json report_to_json(const CampaignReport& r) {
    json j = stamp("report");
    j["tool_version"] = r.tool_version;
    j["plant"] = r.plant_label;
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    json cfg = tune_config_to_json(r.config);
    cfg.erase("ut_schema");
    cfg.erase("type");
    j["config"] = cfg;

    if (r.pi_lead) {
        const PiLeadResult& p = *r.pi_lead;
        json sweep = json::array();
        for (const SweepRow& row : p.integrator.sweep_log)
            sweep.push_back({{"Ti", row.Ti},
                             {"omega_c_pi", row.omega_c_pi},
                             {"omega_gc", row.omega_gc}});
        json gains = json::array();
        for (const GainRow& row : p.gain_log)
            gains.push_back({{"Kp", row.Kp},
                             {"M", std::isfinite(row.M) ? json(row.M) : json(nullptr)}});
        j["pi_lead"] = {
            {"k", p.k},
            {"Kp", p.Kp},
            {"Ti", p.Ti},
            {"lead", {{"alpha", p.lead.alpha}, {"tau", p.lead.tau}, {"K_L", p.lead.K_L}}},
            {"achieved_M", p.achieved_M},
            {"predicted_phase_margin_deg",
             p.predicted_phase_margin_deg ? json(*p.predicted_phase_margin_deg)
                                          : json(nullptr)},
            {"band_fallback", p.band_fallback},
            {"n_experiments", p.n_experiments},
            {"ultimate",
             {{"Ti_bar", p.integrator.Ti_bar},
              {"omega_gc_bar", p.integrator.omega_gc_bar},
              {"omega_c_pi_bar", p.integrator.omega_c_pi_bar}}},
            {"sweep_log", sweep},
            {"gain_log", gains},
            {"pi", tf_to_json(p.pi())},
            {"pi_lead_tf", tf_to_json(p.pi_lead())},
            {"display", {{"C", format_tf(p.pi())}, {"L", format_tf(p.lead_tf())}}},
        };
    } else {
        j["pi_lead"] = nullptr;
    }

    if (r.zn) {
        j["zn"] = {{"Ku", r.zn->Ku},
                   {"Tu", r.zn->Tu},
                   {"Kp", r.zn->pid.Kp},
                   {"Ti", r.zn->pid.Ti},
                   {"Td", r.zn->pid.Td},
                   {"n_experiments", r.zn->n_experiments},
                   {"tf", tf_to_json(r.zn->pid.tf)}};
    } else {
        j["zn"] = nullptr;
    }

    json rows = json::array();
    for (const ReportExperiment& e : r.experiments) {
        json row;
        row["index"] = e.index;
        row["stage"] = e.stage;
        row["controller"] = tf_to_json(e.controller);
        row["Kp"] = e.Kp;
        row["Ti"] = e.Ti;
        row["aborted"] = e.aborted;
        row["oscillation"] = verdict_to_json(e.verdict);
        row["metrics"] = e.metrics ? metrics_to_json(*e.metrics) : json(nullptr);
        row["trace_file"] = e.trace_file.empty() ? json(nullptr) : json(e.trace_file);
        rows.push_back(row);
    }
    j["experiments"] = rows;
    return j;
}

} // namespace jio

// ---------------------------------------------------------------------------
// bode.csv
// ---------------------------------------------------------------------------

/// Long-format frequency response table for external tooling:
/// series,omega,mag_db,phase_deg. Controller-side elements only; the loop
/// response would require plant knowledge this tool does not assume.
inline void write_bode_csv(const std::string& path,
                           const std::vector<std::pair<std::string, TransferFunction>>& series_list,
                           double omega_lo = 1e-1, double omega_hi = 1e4) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << "series,omega,mag_db,phase_deg\n";
    for (const auto& [name, tf] : series_list) {
        for (const FrequencyPoint& p : response_points(tf, omega_lo, omega_hi, 512)) {
            f << name << ',' << detail::format_g9(p.omega) << ','
              << detail::format_g9(p.magnitude_db) << ','
              << detail::format_g9(p.phase_deg) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// step.svg
// ---------------------------------------------------------------------------

struct PlotSeries {
    std::string label;
    std::vector<double> t;
    std::vector<double> y;
};

/// Minimal self-contained line plot; no external references, loads anywhere.
inline void write_step_svg(const std::string& path, const std::string& title,
                           const std::vector<PlotSeries>& series_list) {
    const double W = 840, H = 520, ml = 70, mr = 30, mt = 46, mb = 54;
    double tmin = 1e300, tmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const PlotSeries& s : series_list)
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            tmin = std::min(tmin, s.t[i]);
            tmax = std::max(tmax, s.t[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(tmax > tmin)) { tmin = 0; tmax = 1; }
    if (!(ymax > ymin)) { ymin -= 1; ymax += 1; }
    const double pad = 0.06 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    auto px = [&](double t) { return ml + (t - tmin) / (tmax - tmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };
    auto num = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.4g", v);
        return std::string(b);
    };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n"
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
      << "\" height=\"" << H - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double tv = tmin + (tmax - tmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        f << "<line x1=\"" << px(tv) << "\" y1=\"" << H - mb << "\" x2=\"" << px(tv)
          << "\" y2=\"" << H - mb + 5 << "\" stroke=\"#333\"/>\n"
          << "<text x=\"" << px(tv) << "\" y=\"" << H - mb + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << num(tv) << "</text>\n"
          << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml
          << "\" y2=\"" << py(yv) << "\" stroke=\"#333\"/>\n"
          << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << num(yv) << "</text>\n";
    }
    f << "<text x=\"" << W / 2 << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "t [s]</text>\n";

    int ci = 0;
    for (const PlotSeries& s : series_list) {
        const char* color = colors[ci % 6];
        // keep files small; the plot is a visual aid, not a data channel
        const std::size_t step = std::max<std::size_t>(1, s.t.size() / 2000);
        f << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.4\" points=\"";
        for (std::size_t i = 0; i < s.t.size(); i += step)
            f << num(px(s.t[i])) << ',' << num(py(s.y[i])) << ' ';
        if (!s.t.empty())
            f << num(px(s.t.back())) << ',' << num(py(s.y.back()));
        f << "\"/>\n"
          << "<text x=\"" << W - mr - 10 << "\" y=\"" << mt + 18 + 16 * ci
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
          << color << "\">" << s.label << "</text>\n";
        ++ci;
    }
    f << "</svg>\n";
}

} // namespace ut
