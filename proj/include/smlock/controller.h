#pragma once

#include "smlock/models.h"

#include <Eigen/Core>

#include <optional>
#include <string_view>

namespace smlock
{

/// Lockdown/freedom switching law.
///
/// The controller watches the residual r = lambda (I - I0) + dI/dt (+ mu d2I/dt2 for SEAIR).
/// Under freedom a lockdown is set when r > phi, under lockdown it is lifted when r < -phi;
/// inside the dead band |r| <= phi the previous regime is kept.
struct ControllerConfig {
    double lambda   = 0.2;
    double phi      = 1e-4;
    double mu       = 0.0;
    double i_target = 0.002;

    /// Throws ValidationError. mu must be 0 unless `kind` is SEAIR.
    void validate(ModelKind kind) const;
};

enum class Regime
{
    Freedom,
    Lockdown,
};

std::string_view to_string(Regime regime);

/// 'F' or 'L'.
char regime_code(Regime regime);

inline double contact_rate(Regime regime, const ModelParams& params)
{
    return regime == Regime::Freedom ? params.beta_freedom : params.beta_lockdown;
}

struct ControllerState {
    Regime regime           = Regime::Freedom;
    double last_switch_time = 0.0;
    int switch_count        = 0;
};

/// Coefficients of the sliding surface K x = 0 with K = (-h, -1) or (-h, -k, -1).
struct SurfaceGains {
    double h = 0.0;
    std::optional<double> k;      ///< SEAIR only
    std::optional<double> delta1; ///< SEAIR only
    std::optional<double> delta0; ///< SEAIR only
};

/// h such that motion on the sliding line decays with rate lambda. SEIR and SAIR only;
/// SEAIR throws DomainError (use gains_from_deltas).
SurfaceGains gains_from_lambda(ModelKind kind, double lambda, const ModelParams& params);

/// (h, k) realising the SEAIR closed-loop polynomial s (s^2 + delta1 s + delta0).
/// Throws DomainError unless both coefficients are positive.
SurfaceGains gains_from_deltas(double delta1, double delta0, const ModelParams& params);

/// Polynomial coefficients whose residual is a positive multiple (1/mu) of the (lambda, mu) residual:
/// delta1 = 1/mu, delta0 = lambda/mu. Requires mu > 0.
SurfaceGains gains_from_lambda_mu(double lambda, double mu, const ModelParams& params);

/// r = lambda (I - I0) + i_dot + mu i_ddot.
double surface_residual(const ControllerConfig& config, double i, double i_dot, double i_ddot = 0.0);

/// The same residual written in the state variables:
///   SEIR   eps E + (lambda - gamma) I - lambda I0
///   SAIR   eps1 A + (lambda - gamma) I - lambda I0
///   SEAIR  (delta0 - gamma delta1 + gamma^2) I + eps1 (delta1 - gamma - eps1 - eps2) A + eps1 eps E - delta0 I0
/// For SEIR/SAIR this equals surface_residual exactly; for SEAIR it equals
/// delta0 (I - I0) + delta1 i_dot + i_ddot.
double surface_residual_statespace(ModelKind kind, const SurfaceGains& gains, const ControllerConfig& config,
                                   const State& state, const ModelParams& params);

/// Deviation coordinates from the equilibrium at I0:
/// (I-I0, W-W0) for SEIR with W = E+I, (I-I0, A-A0) for SAIR, (I-I0, A-A0, E-E0) for SEAIR.
Eigen::VectorXd deviation_coordinates(ModelKind kind, const State& state, const ModelParams& params, double i0);

/// Sliding coordinate K x. Equals -r/eps (SEIR), -r/eps1 (SAIR), -r_delta/(eps1 eps) (SEAIR).
double sliding_coordinate(ModelKind kind, const SurfaceGains& gains, const Eigen::VectorXd& x);

/// Linear model dx/dt = F x + g u around the equilibrium, u = delta(t) times the infectious load.
struct ReducedSystem {
    Eigen::MatrixXd F;
    Eigen::VectorXd g;
};

ReducedSystem reduced_system(ModelKind kind, const ModelParams& params);

/// Row vector K of the surface.
Eigen::RowVectorXd surface_row(ModelKind kind, const SurfaceGains& gains);

/// Input keeping K x = 0: u_eq = K F x.
double equivalent_input(ModelKind kind, const SurfaceGains& gains, const ModelParams& params,
                        const Eigen::VectorXd& x);

/// Closed-loop matrix P = F + g K F obtained when u = u_eq.
Eigen::MatrixXd closed_loop_matrix(ModelKind kind, const SurfaceGains& gains, const ModelParams& params);

/// Hysteresis switch. The regime flips only when the strict inequality for the opposite regime holds.
ControllerState switch_decision(const ControllerConfig& config, const ControllerState& ctrl, double r, double t);

} // namespace smlock
