#pragma once

#include <memory>
#include <optional>
#include <string>

#include "ut/errors.hpp"
#include "ut/lti.hpp"
#include "ut/trace.hpp"

namespace ut {

/// Disturbance force pulse, active on [t_on, t_off).
struct DisturbancePulse {
    double t_on = 0.0;
    double t_off = 0.0;
    double force = 0.0;
};

/// One closed-loop experiment: step the reference to x_ref at t = 0 and run
/// for t_end seconds at sample time dt. gravity_feedforward is a constant
/// added to the controller output, the operator's a-priori knowledge.
struct ScenarioSpec {
    double x_ref = 1.0;
    double t_end = 10.0;
    double dt = 1e-4;
    std::optional<DisturbancePulse> disturbance;
    double gravity_feedforward = 0.0;

    void validate() const {
        if (!(dt > 0.0)) throw BadScenario("scenario dt must be > 0");
        if (!(t_end >= dt)) throw BadScenario("scenario t_end must be >= dt");
        if (disturbance && !(disturbance->t_off > disturbance->t_on))
            throw BadScenario("disturbance must have t_off > t_on");
    }
};

/// A plant under test, reachable only through experiments. Implementations
/// never expose model internals, which is what keeps the tuner model-free:
/// it compiles against this interface alone.
class PlantSession {
public:
    virtual ~PlantSession() = default;

    /// Run one experiment and return the record. Successive runs consume
    /// successive stretches of the session's noise stream.
    virtual Trace run(const TransferFunction& controller, const ScenarioSpec& scenario) = 0;

    /// Rewind the noise stream to the state of a fresh session.
    virtual void reset() = 0;

    /// Short descriptor for reports ("external" when nothing is known).
    [[nodiscard]] virtual std::string label() const { return "external"; }
};

} // namespace ut
