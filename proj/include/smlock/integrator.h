#pragma once

#include "smlock/controller.h"
#include "smlock/models.h"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace smlock
{

struct IntegratorConfig {
    double dt        = 0.01;
    double horizon   = 400.0;
    int record_stride = 10;

    void validate() const;
};

struct SwitchEvent {
    double time;
    Regime from;
    Regime to;
    double residual; ///< residual that triggered the switch
};

/// Logged closed-loop run. Sample i holds the state at times[i], the regime in force over
/// the following step, the corresponding contact rate and the residual evaluated at that state.
struct Trajectory {
    ModelKind kind = ModelKind::SEIR;
    std::vector<double> times;
    std::vector<State> states;
    std::vector<Regime> regimes;
    std::vector<double> betas;
    std::vector<double> residuals;
    std::vector<SwitchEvent> switch_events;
    std::vector<std::string> warnings;

    std::size_t size() const
    {
        return times.size();
    }
    bool empty() const
    {
        return times.empty();
    }

    /// Values of one compartment across all samples.
    std::vector<double> series(Compartment c) const;
};

/// One classical Runge-Kutta step at fixed beta and vaccination input.
/// If the step would push S below zero the vaccination flux is truncated so S lands at 0.
/// A conservation drift above 1e-12 is removed by rescaling to sum 1.
/// Throws NumericalError on non-finite values.
State rk4_step(ModelKind kind, const State& state, const ModelParams& params, double beta, double v, double dt);

/// Closed-loop simulation. At every step the residual is evaluated from the model's own
/// derivatives under the incumbent regime, the hysteresis law decides the regime, and the
/// state advances with the resulting contact rate.
///
/// Throws ValidationError for invalid inputs and NumericalError if the population sum drifts
/// by more than 1e-6.
Trajectory simulate(ModelKind kind, const ModelParams& params, const ControllerConfig& controller,
                    const VaccinationSchedule& vaccination, const State& init, const IntegratorConfig& integ);

/// Open-loop run at a constant contact rate (no switching).
Trajectory simulate_open_loop(ModelKind kind, const ModelParams& params, double beta,
                              const VaccinationSchedule& vaccination, const State& init,
                              const IntegratorConfig& integ, double i_target = 0.002);

/// Warning text if beta_F > beta0(S) > beta_L fails at susceptible fraction `s`.
std::optional<std::string> controllability_warning(ModelKind kind, const ModelParams& params, double s);

/// First logged time with S <= S_herd, if any.
std::optional<double> detect_herd_crossing(const Trajectory& traj, ModelKind kind, const ModelParams& params);

/// CSV with header t,S,E,A,I,R,regime,beta,residual; absent compartments are empty fields.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

} // namespace smlock
