#include "smlock/controller.h"
#include "smlock/error.h"

#include <cmath>
#include <string>

namespace smlock
{

void ControllerConfig::validate(ModelKind kind) const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("controller.lambda", "must be positive");
    }
    if (!(phi >= 0.0) || !std::isfinite(phi)) {
        throw ValidationError("controller.phi", "must be nonnegative");
    }
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
        throw ValidationError("controller.mu", "must be nonnegative");
    }
    if (mu != 0.0 && kind != ModelKind::SEAIR) {
        throw ValidationError("controller.mu", "only the SEAIR model uses the second derivative; set mu = 0");
    }
    if (!(i_target > 0.0) || !(i_target < 1.0)) {
        throw ValidationError("controller.i_target", "must lie in (0,1)");
    }
}

std::string_view to_string(Regime regime)
{
    return regime == Regime::Freedom ? "freedom" : "lockdown";
}

char regime_code(Regime regime)
{
    return regime == Regime::Freedom ? 'F' : 'L';
}

SurfaceGains gains_from_lambda(ModelKind kind, double lambda, const ModelParams& p)
{
    if (!(lambda > 0.0)) {
        throw DomainError("lambda must be positive");
    }
    switch (kind) {
    case ModelKind::SEIR:
        return {(lambda - (p.gamma + p.epsilon)) / p.epsilon, std::nullopt, std::nullopt, std::nullopt};
    case ModelKind::SAIR:
        return {(lambda - p.gamma) / p.epsilon1, std::nullopt, std::nullopt, std::nullopt};
    case ModelKind::SEAIR:
        break;
    }
    throw DomainError("SEAIR surfaces have two gains; use gains_from_deltas");
}

SurfaceGains gains_from_deltas(double delta1, double delta0, const ModelParams& p)
{
    if (!(delta1 > 0.0) || !(delta0 > 0.0)) {
        throw DomainError("closed-loop polynomial coefficients must be positive for stability");
    }
    // delta1 = gamma + eps1 + eps2 + eps k
    // delta0 = gamma (eps1 + eps2) + gamma eps k + eps1 eps h
    const double e12 = p.epsilon1 + p.epsilon2;
    const double a   = delta1 - (p.gamma + e12);
    const double b   = delta0 - p.gamma * e12;
    const double k   = a / p.epsilon;
    const double h   = (b - p.gamma * a) / (p.epsilon1 * p.epsilon);
    return {h, k, delta1, delta0};
}

SurfaceGains gains_from_lambda_mu(double lambda, double mu, const ModelParams& p)
{
    if (!(mu > 0.0)) {
        throw DomainError("a SEAIR surface needs mu > 0; mu = 0 drops the second derivative");
    }
    return gains_from_deltas(1.0 / mu, lambda / mu, p);
}

double surface_residual(const ControllerConfig& config, double i, double i_dot, double i_ddot)
{
    return config.lambda * (i - config.i_target) + i_dot + config.mu * i_ddot;
}

double surface_residual_statespace(ModelKind kind, const SurfaceGains& gains, const ControllerConfig& config,
                                   const State& state, const ModelParams& p)
{
    const double lambda = config.lambda;
    const double i0     = config.i_target;
    switch (kind) {
    case ModelKind::SEIR:
        return p.epsilon * state.get(Compartment::E) + (lambda - p.gamma) * state.get(Compartment::I) - lambda * i0;
    case ModelKind::SAIR:
        return p.epsilon1 * state.get(Compartment::A) + (lambda - p.gamma) * state.get(Compartment::I) -
               lambda * i0;
    case ModelKind::SEAIR: {
        if (!gains.delta1 || !gains.delta0) {
            throw DomainError("SEAIR state-space residual needs delta1 and delta0");
        }
        const double d1 = *gains.delta1, d0 = *gains.delta0;
        const double e12 = p.epsilon1 + p.epsilon2;
        return (d0 - p.gamma * d1 + p.gamma * p.gamma) * state.get(Compartment::I) +
               p.epsilon1 * (d1 - p.gamma - e12) * state.get(Compartment::A) +
               p.epsilon1 * p.epsilon * state.get(Compartment::E) - d0 * i0;
    }
    }
    return 0.0;
}

Eigen::VectorXd deviation_coordinates(ModelKind kind, const State& state, const ModelParams& p, double i0)
{
    const Equilibrium eq = equilibrium_state(kind, p, i0);
    switch (kind) {
    case ModelKind::SEIR: {
        Eigen::VectorXd x(2);
        x << state.get(Compartment::I) - i0,
            state.get(Compartment::E) + state.get(Compartment::I) - (*eq.e + i0);
        return x;
    }
    case ModelKind::SAIR: {
        Eigen::VectorXd x(2);
        x << state.get(Compartment::I) - i0, state.get(Compartment::A) - *eq.a;
        return x;
    }
    case ModelKind::SEAIR: {
        Eigen::VectorXd x(3);
        x << state.get(Compartment::I) - i0, state.get(Compartment::A) - *eq.a, state.get(Compartment::E) - *eq.e;
        return x;
    }
    }
    return {};
}

Eigen::RowVectorXd surface_row(ModelKind kind, const SurfaceGains& gains)
{
    if (kind == ModelKind::SEAIR) {
        if (!gains.k) {
            throw DomainError("SEAIR surface needs the k gain");
        }
        Eigen::RowVectorXd K(3);
        K << -gains.h, -*gains.k, -1.0;
        return K;
    }
    Eigen::RowVectorXd K(2);
    K << -gains.h, -1.0;
    return K;
}

double sliding_coordinate(ModelKind kind, const SurfaceGains& gains, const Eigen::VectorXd& x)
{
    return surface_row(kind, gains).dot(x);
}

ReducedSystem reduced_system(ModelKind kind, const ModelParams& p)
{
    ReducedSystem sys;
    switch (kind) {
    case ModelKind::SEIR:
        sys.F.resize(2, 2);
        sys.F << -(p.gamma + p.epsilon), p.epsilon, 0.0, 0.0;
        sys.g = Eigen::Vector2d(0.0, 1.0);
        break;
    case ModelKind::SAIR: {
        const double e12 = p.epsilon1 + p.epsilon2;
        const double c   = p.gamma * e12 / (p.gamma + p.epsilon1);
        sys.F.resize(2, 2);
        sys.F << -p.gamma, p.epsilon1, c, -p.epsilon1 * e12 / (p.gamma + p.epsilon1);
        sys.g = Eigen::Vector2d(0.0, 1.0);
        break;
    }
    case ModelKind::SEAIR: {
        const double e12 = p.epsilon1 + p.epsilon2;
        const double c   = p.gamma * e12 / (p.gamma + p.epsilon1);
        sys.F.resize(3, 3);
        sys.F << -p.gamma, p.epsilon1, 0.0, 0.0, -e12, p.epsilon, c, c, -p.epsilon;
        sys.g = Eigen::Vector3d(0.0, 0.0, 1.0);
        break;
    }
    }
    return sys;
}

double equivalent_input(ModelKind kind, const SurfaceGains& gains, const ModelParams& p, const Eigen::VectorXd& x)
{
    const ReducedSystem sys = reduced_system(kind, p);
    if (x.size() != sys.F.cols()) {
        throw ShapeError("deviation vector has wrong dimension for " + std::string(to_string(kind)));
    }
    return (surface_row(kind, gains) * sys.F * x)(0);
}

Eigen::MatrixXd closed_loop_matrix(ModelKind kind, const SurfaceGains& gains, const ModelParams& p)
{
    const ReducedSystem sys = reduced_system(kind, p);
    return sys.F + sys.g * (surface_row(kind, gains) * sys.F);
}

ControllerState switch_decision(const ControllerConfig& config, const ControllerState& ctrl, double r, double t)
{
    ControllerState next = ctrl;
    if (ctrl.regime == Regime::Freedom && r > config.phi) {
        next.regime = Regime::Lockdown;
    }
    else if (ctrl.regime == Regime::Lockdown && r < -config.phi) {
        next.regime = Regime::Freedom;
    }
    if (next.regime != ctrl.regime) {
        next.last_switch_time = t;
        ++next.switch_count;
    }
    return next;
}

} // namespace smlock
