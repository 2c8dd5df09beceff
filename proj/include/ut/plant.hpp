#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ut/errors.hpp"
#include "ut/lti.hpp"

namespace ut {

/// Monotone piecewise-linear map, extrapolated with the end-segment slopes.
struct PwlTable {
    std::vector<double> in;
    std::vector<double> out;

    void validate() const {
        if (in.size() != out.size() || in.size() < 2)
            throw BadPlantSpec("pwl table needs >= 2 matched points");
        for (std::size_t i = 1; i < in.size(); ++i) {
            if (!(in[i] > in[i - 1])) throw BadPlantSpec("pwl inputs must increase");
            if (out[i] < out[i - 1]) throw BadPlantSpec("pwl outputs must not decrease");
        }
    }

    [[nodiscard]] double operator()(double v) const {
        std::size_t i = 1;
        while (i + 1 < in.size() && v > in[i]) ++i;
        const double t = (v - in[i - 1]) / (in[i] - in[i - 1]);
        return out[i - 1] + t * (out[i] - out[i - 1]);
    }
};

/// Flexible appendage: a spring-damper-mass riding on the main mass.
struct ResonanceParams {
    double stiffness = 0.0;      // N/m
    double damping = 0.0;        // N s/m
    double appendage_mass = 0.0; // kg
};

/// Voice-coil-motor-like mechanics: mass under a nonlinear input gain with
/// viscous and Coulomb friction, constant gravity load, and input delay.
struct VcmParams {
    double mass = 1.0;      // kg
    double viscous = 25.0;  // N s/m
    double coulomb = 0.5;   // N
    PwlTable input_gain;    // drive signal -> force, N
    double delay = 0.0;     // s, on the drive signal
    double gravity = 0.0;   // N, constant load on the mass
    std::optional<ResonanceParams> resonance;
};

/// Rational plant model; the artifact only targets type-one behavior
/// (exactly one pole at the origin).
struct LinearTfParams {
    TransferFunction tf;
};

struct PlantSpec {
    std::variant<LinearTfParams, VcmParams> model;
    double noise_sigma = 0.0; // measurement noise, output units
    std::uint64_t seed = 0;

    [[nodiscard]] bool is_linear() const {
        return std::holds_alternative<LinearTfParams>(model);
    }

    void validate() const {
        if (noise_sigma < 0.0) throw BadPlantSpec("noise_sigma must be >= 0");
        if (const auto* lin = std::get_if<LinearTfParams>(&model)) {
            const auto& den = lin->tf.den;
            if (den.size() < 2 || den.back() != 0.0 || den[den.size() - 2] == 0.0)
                throw BadPlantSpec("linear plant must have exactly one pole at the origin");
            if (!lin->tf.proper())
                throw BadPlantSpec("linear plant must be proper");
        } else {
            const auto& v = std::get<VcmParams>(model);
            if (!(v.mass > 0.0)) throw BadPlantSpec("mass must be > 0");
            if (v.viscous < 0.0 || v.coulomb < 0.0 || v.delay < 0.0)
                throw BadPlantSpec("viscous, coulomb and delay must be >= 0");
            v.input_gain.validate();
            if (v.resonance) {
                if (!(v.resonance->appendage_mass > 0.0) || !(v.resonance->stiffness > 0.0) ||
                    v.resonance->damping < 0.0)
                    throw BadPlantSpec("resonance needs positive stiffness and mass");
            }
        }
    }
};

/// Drive-to-force table with a nominal 2 N/V slope and a +/-2% asymmetric
/// bow, the kind of gain variation a real coil shows over its stroke.
[[nodiscard]] inline PwlTable default_vcm_input_gain() {
    PwlTable t;
    for (int i = -10; i <= 10; ++i) {
        const double u = static_cast<double>(i);
        t.in.push_back(u);
        t.out.push_back(2.0 * u * (1.0 + 0.02 * std::sin(std::numbers::pi * u / 20.0)));
    }
    return t;
}

/// Named example plants. Seeds default to 0; callers may override.
[[nodiscard]] inline PlantSpec catalog(const std::string& name) {
    PlantSpec p;
    if (name == "pure_integrator") {
        p.model = LinearTfParams{TransferFunction{{1.0}, {1.0, 0.0}}};
    } else if (name == "second_order_type_one") {
        p.model = LinearTfParams{TransferFunction{{1.0}, {0.1, 1.0, 0.0}}};
    } else if (name == "fourth_order_resonant") {
        // integrator chain with a lightly damped mode at 180 rad/s
        const TransferFunction base{{1.0}, {0.05, 1.0, 0.0}};
        const double wr = 180.0, zr = 0.1;
        const TransferFunction mode{{wr * wr}, {1.0, 2.0 * zr * wr, wr * wr}};
        p.model = LinearTfParams{series(base, mode)};
    } else if (name == "delayed_type_one") {
        p.model = LinearTfParams{TransferFunction{{1.0}, {0.1, 1.0, 0.0}, 5e-3}};
    } else if (name == "vcm_like") {
        VcmParams v;
        v.mass = 1.0;
        v.viscous = 25.0;
        v.coulomb = 0.5;
        v.input_gain = default_vcm_input_gain();
        v.delay = 1e-3;
        v.gravity = 9.81;
        p.model = v;
        p.noise_sigma = 5e-5;
    } else {
        throw UnknownPlant("no catalog plant named '" + name + "'");
    }
    p.validate();
    return p;
}

[[nodiscard]] inline std::vector<std::string> catalog_names() {
    return {"pure_integrator", "second_order_type_one", "fourth_order_resonant",
            "delayed_type_one", "vcm_like"};
}

/// Operator-side defaults that pair with a catalog plant: the reference
/// amplitude and the gravity feedforward a lab user would dial in. This is
/// bench knowledge, not something the tuner reads from the model.
struct CatalogScenarioHints {
    double x_ref = 1.0;
    double gravity_feedforward = 0.0;
};

[[nodiscard]] inline CatalogScenarioHints catalog_hints(const std::string& name) {
    CatalogScenarioHints h;
    if (name == "vcm_like") {
        h.x_ref = 0.009;
        h.gravity_feedforward = 9.81 / 2.0; // gravity over nominal drive gain
    }
    return h;
}

} // namespace ut
