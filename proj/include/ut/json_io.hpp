#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ut/errors.hpp"
#include "ut/lti.hpp"
#include "ut/plant.hpp"
#include "ut/session.hpp"
#include "ut/tuner.hpp"

namespace ut {

inline constexpr int kSchemaVersion = 1;

namespace jio {

using nlohmann::json;

inline void require_schema(const json& j, const std::string& type) {
    if (!j.is_object()) throw SchemaError("document is not a JSON object");
    if (!j.contains("ut_schema") || !j["ut_schema"].is_number_integer() ||
        j["ut_schema"].get<int>() != kSchemaVersion)
        throw SchemaError("missing or unsupported ut_schema (expected " +
                          std::to_string(kSchemaVersion) + ")");
    if (!j.contains("type") || j["type"].get<std::string>() != type)
        throw SchemaError("expected document type '" + type + "'");
}

inline json stamp(const std::string& type) {
    return json{{"ut_schema", kSchemaVersion}, {"type", type}};
}

// --- transfer functions ----------------------------------------------------

inline json tf_to_json(const TransferFunction& tf) {
    return json{{"num", tf.num}, {"den", tf.den}, {"dead_time", tf.dead_time}};
}

inline TransferFunction tf_from_json(const json& j) {
    try {
        return TransferFunction(j.at("num").get<std::vector<double>>(),
                                j.at("den").get<std::vector<double>>(),
                                j.value("dead_time", 0.0));
    } catch (const json::exception& e) {
        throw SchemaError(std::string{"bad transfer function: "} + e.what());
    }
}

// --- scenarios -------------------------------------------------------------

inline json scenario_to_json(const ScenarioSpec& sc) {
    json j = stamp("scenario");
    j["x_ref"] = sc.x_ref;
    j["t_end"] = sc.t_end;
    j["dt"] = sc.dt;
    j["gravity_feedforward"] = sc.gravity_feedforward;
    if (sc.disturbance)
        j["disturbance"] = {{"t_on", sc.disturbance->t_on},
                            {"t_off", sc.disturbance->t_off},
                            {"force", sc.disturbance->force}};
    else
        j["disturbance"] = nullptr;
    return j;
}

inline ScenarioSpec scenario_from_json(const json& j) {
    require_schema(j, "scenario");
    ScenarioSpec sc;
    try {
        sc.x_ref = j.at("x_ref").get<double>();
        sc.t_end = j.at("t_end").get<double>();
        sc.dt = j.value("dt", 1e-4);
        sc.gravity_feedforward = j.value("gravity_feedforward", 0.0);
        if (j.contains("disturbance") && !j["disturbance"].is_null()) {
            const json& d = j["disturbance"];
            sc.disturbance = DisturbancePulse{d.at("t_on").get<double>(),
                                             d.at("t_off").get<double>(),
                                             d.at("force").get<double>()};
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string{"bad scenario: "} + e.what());
    }
    sc.validate();
    return sc;
}

// --- plants ----------------------------------------------------------------

inline json plant_to_json(const PlantSpec& p) {
    json j = stamp("plant");
    j["noise_sigma"] = p.noise_sigma;
    j["seed"] = p.seed;
    if (const auto* lin = std::get_if<LinearTfParams>(&p.model)) {
        j["model"] = {{"kind", "linear_tf"},
                      {"num", lin->tf.num},
                      {"den", lin->tf.den},
                      {"dead_time", lin->tf.dead_time}};
    } else {
        const auto& v = std::get<VcmParams>(p.model);
        json m = {{"kind", "vcm_like"},  {"mass", v.mass},
                  {"viscous", v.viscous}, {"coulomb", v.coulomb},
                  {"delay", v.delay},     {"gravity", v.gravity},
                  {"input_gain", {{"in", v.input_gain.in}, {"out", v.input_gain.out}}}};
        if (v.resonance)
            m["resonance"] = {{"stiffness", v.resonance->stiffness},
                              {"damping", v.resonance->damping},
                              {"appendage_mass", v.resonance->appendage_mass}};
        else
            m["resonance"] = nullptr;
        j["model"] = m;
    }
    return j;
}

inline PlantSpec plant_from_json(const json& j) {
    require_schema(j, "plant");
    PlantSpec p;
    try {
        p.noise_sigma = j.value("noise_sigma", 0.0);
        p.seed = j.value("seed", std::uint64_t{0});
        const json& m = j.at("model");
        const std::string kind = m.at("kind").get<std::string>();
        if (kind == "linear_tf") {
            p.model = LinearTfParams{
                TransferFunction(m.at("num").get<std::vector<double>>(),
                                 m.at("den").get<std::vector<double>>(),
                                 m.value("dead_time", 0.0))};
        } else if (kind == "vcm_like") {
            VcmParams v;
            v.mass = m.at("mass").get<double>();
            v.viscous = m.value("viscous", 0.0);
            v.coulomb = m.value("coulomb", 0.0);
            v.delay = m.value("delay", 0.0);
            v.gravity = m.value("gravity", 0.0);
            v.input_gain.in = m.at("input_gain").at("in").get<std::vector<double>>();
            v.input_gain.out = m.at("input_gain").at("out").get<std::vector<double>>();
            if (m.contains("resonance") && !m["resonance"].is_null()) {
                const json& r = m["resonance"];
                v.resonance = ResonanceParams{r.at("stiffness").get<double>(),
                                              r.at("damping").get<double>(),
                                              r.at("appendage_mass").get<double>()};
            }
            p.model = v;
        } else {
            throw SchemaError("unknown plant model kind '" + kind + "'");
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string{"bad plant spec: "} + e.what());
    }
    p.validate();
    return p;
}

// --- tune configuration ----------------------------------------------------

inline json tune_config_to_json(const TuneConfig& c) {
    json j = stamp("tune_config");
    j["Ti_start"] = c.Ti_start;
    j["Ti_decay"] = c.Ti_decay;
    j["Ti_refine"] = c.Ti_refine;
    j["Ti_floor_dt_multiple"] = c.Ti_floor_dt_multiple;
    j["gain_grid_points"] = c.gain_grid_points;
    j["gain_delta_min"] = c.gain_delta_min;
    j["gain_delta_max"] = c.gain_delta_max;
    j["gain_bisections"] = c.gain_bisections;
    j["m_band"] = {{"lo", c.m_band.lo}, {"hi", c.m_band.hi}};
    j["responsive_fraction"] = c.responsive_fraction;
    j["k_search"] = {{"k_start", c.k_search.k_start},
                     {"k_factor", c.k_search.k_factor},
                     {"k_max", c.k_search.k_max}};
    j["zn"] = {{"factor", c.zn_factor},
               {"bisections", c.zn_bisections},
               {"rel_width", c.zn_rel_width},
               {"filter_cutoff_hz", c.zn_filter_cutoff_hz},
               {"filter_order", c.zn_filter_order}};
    j["safety"] = {{"abort_amplitude", c.safety.abort_amplitude},
                   {"max_experiments", c.safety.max_experiments}};
    j["detector"] = {{"transient_skip", c.detector.transient_skip},
                     {"ratio_lo", c.detector.ratio_lo},
                     {"ratio_hi", c.detector.ratio_hi},
                     {"min_peaks", c.detector.min_peaks},
                     {"prominence_factor", c.detector.prominence_factor}};
    json sc = scenario_to_json(c.experiment);
    sc.erase("ut_schema");
    sc.erase("type");
    j["experiment"] = sc;
    return j;
}

inline TuneConfig tune_config_from_json(const json& j) {
    require_schema(j, "tune_config");
    TuneConfig c;
    try {
        c.Ti_start = j.value("Ti_start", c.Ti_start);
        c.Ti_decay = j.value("Ti_decay", c.Ti_decay);
        c.Ti_refine = j.value("Ti_refine", c.Ti_refine);
        c.Ti_floor_dt_multiple = j.value("Ti_floor_dt_multiple", c.Ti_floor_dt_multiple);
        c.gain_grid_points = j.value("gain_grid_points", c.gain_grid_points);
        c.gain_delta_min = j.value("gain_delta_min", c.gain_delta_min);
        c.gain_delta_max = j.value("gain_delta_max", c.gain_delta_max);
        c.gain_bisections = j.value("gain_bisections", c.gain_bisections);
        if (j.contains("m_band")) {
            c.m_band.lo = j["m_band"].value("lo", c.m_band.lo);
            c.m_band.hi = j["m_band"].value("hi", c.m_band.hi);
        }
        c.responsive_fraction = j.value("responsive_fraction", c.responsive_fraction);
        if (j.contains("k_search")) {
            const json& k = j["k_search"];
            c.k_search.k_start = k.value("k_start", c.k_search.k_start);
            c.k_search.k_factor = k.value("k_factor", c.k_search.k_factor);
            c.k_search.k_max = k.value("k_max", c.k_search.k_max);
        }
        if (j.contains("zn")) {
            const json& z = j["zn"];
            c.zn_factor = z.value("factor", c.zn_factor);
            c.zn_bisections = z.value("bisections", c.zn_bisections);
            c.zn_rel_width = z.value("rel_width", c.zn_rel_width);
            c.zn_filter_cutoff_hz = z.value("filter_cutoff_hz", c.zn_filter_cutoff_hz);
            c.zn_filter_order = z.value("filter_order", c.zn_filter_order);
        }
        if (j.contains("safety")) {
            c.safety.abort_amplitude =
                j["safety"].value("abort_amplitude", c.safety.abort_amplitude);
            c.safety.max_experiments =
                j["safety"].value("max_experiments", c.safety.max_experiments);
        }
        if (j.contains("detector")) {
            const json& d = j["detector"];
            c.detector.transient_skip = d.value("transient_skip", c.detector.transient_skip);
            c.detector.ratio_lo = d.value("ratio_lo", c.detector.ratio_lo);
            c.detector.ratio_hi = d.value("ratio_hi", c.detector.ratio_hi);
            c.detector.min_peaks = d.value("min_peaks", c.detector.min_peaks);
            c.detector.prominence_factor =
                d.value("prominence_factor", c.detector.prominence_factor);
        }
        if (j.contains("experiment")) {
            json sc = j["experiment"];
            sc["ut_schema"] = kSchemaVersion;
            sc["type"] = "scenario";
            c.experiment = scenario_from_json(sc);
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string{"bad tune config: "} + e.what());
    }
    return c;
}

// --- controller documents --------------------------------------------------

inline json controller_to_json(const TransferFunction& tf) {
    json j = stamp("controller");
    j.update(tf_to_json(tf));
    return j;
}

inline TransferFunction controller_from_json(const json& j) {
    require_schema(j, "controller");
    return tf_from_json(j);
}

// --- files -----------------------------------------------------------------

inline json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for read: " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for write: " + path);
    f << j.dump(2) << '\n';
}

} // namespace jio

} // namespace ut
