#include "smlock/integrator.h"
#include "smlock/error.h"

#include <array>
#include <cmath>
#include <ostream>
#include <string>

namespace smlock
{

namespace
{

constexpr double renormalize_tol = 1e-12;
constexpr double abort_tol       = 1e-6;

// Raw RK4 advance plus the S >= 0 clamp; returns the conservation drift before any rescaling.
State advance(ModelKind kind, const State& x, const ModelParams& p, double beta, double v, double dt, double t,
              double& drift)
{
    const State k1 = rhs(kind, x, p, beta, v);
    const State k2 = rhs(kind, x + (0.5 * dt) * k1, p, beta, v);
    const State k3 = rhs(kind, x + (0.5 * dt) * k2, p, beta, v);
    const State k4 = rhs(kind, x + dt * k3, p, beta, v);

    State next = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(next[i])) {
            throw NumericalError("non-finite compartment " + std::string(to_string(layout(kind)[i])) +
                                 " after step at t=" + std::to_string(t) + " (dt=" + std::to_string(dt) + ")");
        }
    }
    if (next[0] < 0.0) {
        // vaccination exhausted the susceptibles within the step; truncate the flux so S lands at 0
        next[x.size() - 1] += next[0];
        next[0] = 0.0;
    }
    drift = next.sum() - 1.0;
    return next;
}

void renormalize(State& x, double drift)
{
    if (std::abs(drift) > renormalize_tol) {
        x *= 1.0 / (1.0 + drift);
    }
}

void validate_common(ModelKind kind, const ModelParams& params, const VaccinationSchedule& vaccination,
                     const State& init, const IntegratorConfig& integ)
{
    params.validate(kind);
    vaccination.validate();
    integ.validate();
    if (init.kind() != kind) {
        throw ValidationError("initial", "initial state kind does not match model kind");
    }
    init.validate();
}

Trajectory run(ModelKind kind, const ModelParams& params, const ControllerConfig& controller,
               const VaccinationSchedule& vaccination, const State& init, const IntegratorConfig& integ,
               std::optional<double> fixed_beta)
{
    const auto steps = static_cast<long>(std::llround(integ.horizon / integ.dt));
    const auto stride = static_cast<long>(integ.record_stride);

    Trajectory traj;
    traj.kind = kind;
    const auto samples = static_cast<std::size_t>(steps / stride + 1);
    traj.times.reserve(samples);
    traj.states.reserve(samples);
    traj.regimes.reserve(samples);
    traj.betas.reserve(samples);
    traj.residuals.reserve(samples);

    if (!fixed_beta) {
        if (auto warning = controllability_warning(kind, params, init[0])) {
            traj.warnings.push_back(*warning);
        }
    }

    ControllerState ctrl;
    State x = init;
    for (long k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * integ.dt;

        // decision precedes motion: derivatives under the incumbent regime
        const double incumbent = fixed_beta ? *fixed_beta : contact_rate(ctrl.regime, params);
        const auto derivs      = observable_derivatives(kind, x, params, incumbent);
        const double r = surface_residual(controller, x.get(Compartment::I), derivs.i_dot, derivs.i_ddot.value_or(0.0));

        if (!fixed_beta) {
            const ControllerState next = switch_decision(controller, ctrl, r, t);
            if (next.regime != ctrl.regime) {
                traj.switch_events.push_back({t, ctrl.regime, next.regime, r});
            }
            ctrl = next;
        }
        const double beta = fixed_beta ? *fixed_beta : contact_rate(ctrl.regime, params);

        if (k % stride == 0) {
            traj.times.push_back(t);
            traj.states.push_back(x);
            traj.regimes.push_back(ctrl.regime);
            traj.betas.push_back(beta);
            traj.residuals.push_back(r);
        }
        if (k == steps) {
            break;
        }

        const double v = vaccination.input(t, x[0]);
        double drift   = 0.0;
        x              = advance(kind, x, params, beta, v, integ.dt, t, drift);
        if (std::abs(drift) > abort_tol) {
            throw NumericalError("population sum drifted by " + std::to_string(drift) + " at t=" + std::to_string(t));
        }
        renormalize(x, drift);
    }
    return traj;
}

} // namespace

void IntegratorConfig::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("integrator.dt", "must be positive");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw ValidationError("integrator.horizon", "must be positive");
    }
    if (record_stride < 1) {
        throw ValidationError("integrator.record_stride", "must be at least 1");
    }
}

std::vector<double> Trajectory::series(Compartment c) const
{
    const auto idx = index_of(kind, c);
    if (!idx) {
        throw ShapeError(std::string(to_string(kind)) + " trajectory has no compartment " +
                         std::string(to_string(c)));
    }
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) {
        out.push_back(s[*idx]);
    }
    return out;
}

State rk4_step(ModelKind kind, const State& state, const ModelParams& params, double beta, double v, double dt)
{
    if (!(dt > 0.0)) {
        throw DomainError("rk4_step needs dt > 0");
    }
    double drift = 0.0;
    State next   = advance(kind, state, params, beta, v, dt, 0.0, drift);
    renormalize(next, drift);
    return next;
}

Trajectory simulate(ModelKind kind, const ModelParams& params, const ControllerConfig& controller,
                    const VaccinationSchedule& vaccination, const State& init, const IntegratorConfig& integ)
{
    validate_common(kind, params, vaccination, init, integ);
    controller.validate(kind);
    return run(kind, params, controller, vaccination, init, integ, std::nullopt);
}

Trajectory simulate_open_loop(ModelKind kind, const ModelParams& params, double beta,
                              const VaccinationSchedule& vaccination, const State& init,
                              const IntegratorConfig& integ, double i_target)
{
    validate_common(kind, params, vaccination, init, integ);
    if (!(beta >= 0.0)) {
        throw ValidationError("beta", "must be nonnegative");
    }
    ControllerConfig logging;
    logging.i_target = i_target;
    return run(kind, params, logging, vaccination, init, integ, beta);
}

std::optional<std::string> controllability_warning(ModelKind kind, const ModelParams& params, double s)
{
    if (!(s > 0.0)) {
        return "no susceptibles left; the contact rate has no effect";
    }
    const double beta0 = critical_contact_rate(kind, params, s);
    if (params.beta_freedom > beta0 && beta0 > params.beta_lockdown) {
        return std::nullopt;
    }
    return "beta_freedom > beta0(S) > beta_lockdown does not hold at S=" + std::to_string(s) +
           " (beta0=" + std::to_string(beta0) + "); the switching law cannot hold the target";
}

std::optional<double> detect_herd_crossing(const Trajectory& traj, ModelKind kind, const ModelParams& params)
{
    const double threshold = herd_threshold(kind, params);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.states[i][0] <= threshold) {
            return traj.times[i];
        }
    }
    return std::nullopt;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    static constexpr std::array<Compartment, 5> columns{Compartment::S, Compartment::E, Compartment::A,
                                                        Compartment::I, Compartment::R};
    std::array<std::optional<std::size_t>, 5> idx;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        idx[c] = index_of(traj.kind, columns[c]);
    }

    const auto old_precision = out.precision(17);
    out << "t,S,E,A,I,R,regime,beta,residual\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << traj.times[i];
        for (const auto& j : idx) {
            out << ',';
            if (j) {
                out << traj.states[i][*j];
            }
        }
        out << ',' << regime_code(traj.regimes[i]) << ',' << traj.betas[i] << ',' << traj.residuals[i] << '\n';
    }
    out.precision(old_precision);
}

} // namespace smlock
