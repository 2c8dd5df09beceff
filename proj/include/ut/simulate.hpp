#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ut/discrete.hpp"
#include "ut/errors.hpp"
#include "ut/plant.hpp"
#include "ut/session.hpp"
#include "ut/trace.hpp"

namespace ut {

/// Regularized signum for Coulomb friction: linear through zero within a
/// +/-eps velocity band so near-rest states creep instead of chattering.
[[nodiscard]] inline double sgn_with_stiction(double v, double eps = 1e-5) {
    const double s = v / eps;
    return s > 1.0 ? 1.0 : (s < -1.0 ? -1.0 : s);
}

namespace detail {

[[nodiscard]] inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derived stream for the k-th run of a session seeded with `seed`.
[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t seed, std::uint64_t k) {
    return splitmix64(seed ^ (0xD1B54A32D192ED03ull * (k + 1)));
}

/// Gaussian stream built from splitmix64 and an explicit Box-Muller map,
/// so that generated values do not depend on any library's distribution
/// internals and runs reproduce bit-for-bit.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) : state_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    double uniform() {
        state_ = splitmix64(state_);
        return static_cast<double>(state_ >> 11) * 0x1.0p-53;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Whole-sample ring delay on a scalar stream.
class SampleDelay {
public:
    explicit SampleDelay(std::size_t n) : buf_(n, 0.0) {}

    double step(double v) {
        if (buf_.empty()) return v;
        const double head = buf_[pos_];
        buf_[pos_] = v;
        pos_ = (pos_ + 1) % buf_.size();
        return head;
    }

private:
    std::vector<double> buf_;
    std::size_t pos_ = 0;
};

struct VcmState {
    std::array<double, 4> s{0.0, 0.0, 0.0, 0.0}; // x, v, x_app, v_app
};

/// Right-hand side of the mechanics; force and disturbance are held constant
/// across the step (zero-order hold).
inline std::array<double, 4> vcm_deriv(const VcmParams& p, const std::array<double, 4>& s,
                                       double force, double disturbance) {
    const double x = s[0], v = s[1];
    double coupling = 0.0;
    std::array<double, 4> ds{v, 0.0, 0.0, 0.0};
    if (p.resonance) {
        const double xa = s[2], va = s[3];
        const double f_link = p.resonance->stiffness * (xa - x) +
                              p.resonance->damping * (va - v);
        coupling = f_link;
        ds[2] = va;
        ds[3] = -f_link / p.resonance->appendage_mass;
    }
    ds[1] = (force - p.viscous * v - p.coulomb * sgn_with_stiction(v) - p.gravity +
             disturbance + coupling) / p.mass;
    return ds;
}

inline void vcm_rk4_step(const VcmParams& p, std::array<double, 4>& s, double force,
                         double disturbance, double dt) {
    const auto k1 = vcm_deriv(p, s, force, disturbance);
    std::array<double, 4> tmp;
    for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
    const auto k2 = vcm_deriv(p, tmp, force, disturbance);
    for (int i = 0; i < 4; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
    const auto k3 = vcm_deriv(p, tmp, force, disturbance);
    for (int i = 0; i < 4; ++i) tmp[i] = s[i] + dt * k3[i];
    const auto k4 = vcm_deriv(p, tmp, force, disturbance);
    for (int i = 0; i < 4; ++i)
        s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace detail

/// Run one closed-loop experiment from rest. The loop is sampled: at each
/// step the measurement is taken, the control u = C(r - x) + feedforward is
/// computed, and the plant integrates over the next dt with u held. Linear
/// plants see the disturbance at their input; mechanical plants see it as a
/// force on the mass. Output runaway beyond 1e6 times the reference aborts
/// the run and returns the partial trace flagged as diverged.
[[nodiscard]] inline Trace simulate_closed_loop(const PlantSpec& plant,
                                                const TransferFunction& controller,
                                                const ScenarioSpec& sc,
                                                std::optional<std::uint64_t> noise_seed = {}) {
    plant.validate();
    sc.validate();

    const double dt = sc.dt;
    const auto n = static_cast<std::size_t>(std::llround(sc.t_end / dt)) + 1;
    DiscreteFilter ctrl = discretize(controller, dt);

    detail::NoiseStream rng(noise_seed ? *noise_seed : plant.seed);
    const double sigma = plant.noise_sigma;
    const double ref_scale = sc.x_ref != 0.0 ? std::abs(sc.x_ref) : 1.0;
    const double blowup = 1e6 * ref_scale;

    Trace tr;
    tr.dt = dt;
    tr.t0 = 0.0;
    tr.r.reserve(n);
    tr.u.reserve(n);
    tr.x.reserve(n);
    tr.d.reserve(n);
    tr.x_clean.reserve(n);

    // Plant state, one of the two variants.
    DiscreteFilter lin_filter;
    double lin_out = 0.0;
    detail::VcmState mech;
    const VcmParams* vcm = std::get_if<VcmParams>(&plant.model);
    std::unique_ptr<detail::SampleDelay> drive_delay;
    if (vcm) {
        drive_delay = std::make_unique<detail::SampleDelay>(
            static_cast<std::size_t>(std::llround(vcm->delay / dt)));
    } else {
        lin_filter = discretize(std::get<LinearTfParams>(plant.model).tf, dt);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double r = sc.x_ref;
        double d = 0.0;
        if (sc.disturbance && t >= sc.disturbance->t_on && t < sc.disturbance->t_off)
            d = sc.disturbance->force;

        const double xc = vcm ? mech.s[0] : lin_out;
        double noise = 0.0;
        if (sigma > 0.0) {
            noise = sigma * rng.next();
            noise = std::clamp(noise, -4.0 * sigma, 4.0 * sigma);
        }
        const double x = xc + noise;
        const double u = ctrl.step(r - x) + sc.gravity_feedforward;

        tr.r.push_back(r);
        tr.u.push_back(u);
        tr.x.push_back(x);
        tr.d.push_back(d);
        tr.x_clean.push_back(xc);

        if (!std::isfinite(x) || std::abs(x) > blowup) {
            tr.diverged = true;
            break;
        }

        if (vcm) {
            const double force = vcm->input_gain(drive_delay->step(u));
            detail::vcm_rk4_step(*vcm, mech.s, force, d, dt);
        } else {
            lin_out = lin_filter.step(u + d);
        }
    }
    return tr;
}

/// Local session wrapping the simulator. Each run draws a fresh stretch of
/// the noise stream derived from the plant seed; reset() rewinds it. Traces
/// leave without x_clean: experiments only ever reveal measurements.
class SimulatedSession final : public PlantSession {
public:
    explicit SimulatedSession(PlantSpec plant, std::string label = "spec")
        : plant_(std::move(plant)), label_(std::move(label)) {
        plant_.validate();
    }

    Trace run(const TransferFunction& controller, const ScenarioSpec& scenario) override {
        const std::uint64_t seed = detail::run_seed(plant_.seed, run_index_++);
        return simulate_closed_loop(plant_, controller, scenario, seed).without_clean();
    }

    void reset() override { run_index_ = 0; }

    [[nodiscard]] std::string label() const override { return label_; }

private:
    PlantSpec plant_;
    std::string label_;
    std::uint64_t run_index_ = 0;
};

[[nodiscard]] inline std::unique_ptr<PlantSession> make_session(PlantSpec plant,
                                                                std::string label = "spec") {
    return std::make_unique<SimulatedSession>(std::move(plant), std::move(label));
}

/// Session over a named catalog plant; the label in reports is the name.
[[nodiscard]] inline std::unique_ptr<PlantSession> make_catalog_session(
    const std::string& name, std::optional<std::uint64_t> seed = {}) {
    PlantSpec p = catalog(name);
    if (seed) p.seed = *seed;
    return std::make_unique<SimulatedSession>(std::move(p), name);
}

} // namespace ut
