#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace smlock
{

enum class ModelKind
{
    SEIR,
    SAIR,
    SEAIR,
};

enum class Compartment
{
    S,
    E,
    A,
    I,
    R,
};

std::string_view to_string(ModelKind kind);
std::string_view to_string(Compartment c);

/// Parses "SEIR", "SAIR" or "SEAIR" (case-insensitive). Throws ValidationError otherwise.
ModelKind parse_model_kind(std::string_view name);

/// Epidemiological rates, all per day.
///
/// `epsilon` is used by SEIR and SEAIR, `epsilon1`/`epsilon2` by SAIR and SEAIR.
/// Fields not used by a model kind are ignored by `validate`.
struct ModelParams {
    double gamma         = 0.05;
    double epsilon       = 0.2;
    double epsilon1      = 0.2;
    double epsilon2      = 0.07;
    double beta_freedom  = 0.065;
    double beta_lockdown = 0.01;

    /// Throws ValidationError naming the first offending field.
    void validate(ModelKind kind) const;
};

/// Compartment fractions of one model kind.
///
/// Storage order is S,E,I,R (SEIR), S,A,I,R (SAIR) and S,E,A,I,R (SEAIR).
/// The same type carries time derivatives, so the sum-to-one invariant is checked
/// by `validate`, not by the constructor.
class State
{
public:
    static constexpr std::size_t max_size = 5;

    State() = default;

    /// Throws ShapeError if `values.size()` does not match the layout of `kind`.
    State(ModelKind kind, std::span<const double> values);

    static State zero(ModelKind kind);

    ModelKind kind() const
    {
        return m_kind;
    }
    std::size_t size() const
    {
        return m_size;
    }
    std::span<const double> values() const
    {
        return {m_values.data(), m_size};
    }
    std::span<double> values()
    {
        return {m_values.data(), m_size};
    }
    double operator[](std::size_t i) const
    {
        return m_values[i];
    }
    double& operator[](std::size_t i)
    {
        return m_values[i];
    }

    bool has(Compartment c) const;
    /// Throws ShapeError if the compartment is absent for this kind.
    double get(Compartment c) const;
    double& at(Compartment c);
    std::optional<double> find(Compartment c) const;

    double sum() const;

    /// Infectious aggregate W: E+I for SEIR, A+I for SAIR, E+A+I for SEAIR.
    double infectious() const;

    /// Throws ValidationError unless all compartments are in [0,1] and sum to 1 within `tol`.
    void validate(double tol = 1e-9) const;

    State& operator+=(const State& other);
    State& operator*=(double factor);

private:
    ModelKind m_kind = ModelKind::SEIR;
    std::size_t m_size = 4;
    std::array<double, max_size> m_values{};
};

State operator+(State a, const State& b);
State operator*(double factor, State a);

/// Compartment layout of a model kind, in storage order.
std::span<const Compartment> layout(ModelKind kind);

/// Storage index of a compartment, or nullopt if the kind does not have it.
std::optional<std::size_t> index_of(ModelKind kind, Compartment c);

struct VaccinationSchedule {
    double start_time       = 60.0;
    double activation_delay = 60.0;
    double daily_rate       = 0.0;

    void validate() const;

    /// Vaccination input V(t): `daily_rate` once active and while susceptibles remain.
    double input(double t, double susceptible) const
    {
        return (t >= start_time + activation_delay && susceptible > 0.0) ? daily_rate : 0.0;
    }
};

/// Right-hand side of the model equations at contact rate `beta` and vaccination input `v`.
/// Vaccination moves mass from S to R. Throws ShapeError if `state.kind() != kind`.
State rhs(ModelKind kind, const State& state, const ModelParams& params, double beta, double v = 0.0);

/// RN = beta / gamma. Throws DomainError for gamma <= 0.
double reproduction_number(double beta, double gamma);

/// Contact rate beta0(S) at which a nonzero infected equilibrium exists.
/// SEIR: gamma/S. SAIR and SEAIR: gamma(eps1+eps2) / ((gamma+eps1) S).
double critical_contact_rate(ModelKind kind, const ModelParams& params, double s);

/// Susceptible fraction below which full freedom no longer grows the infectious load,
/// i.e. the S with critical_contact_rate(kind, params, S) == beta_freedom.
double herd_threshold(ModelKind kind, const ModelParams& params);

/// Contact rate whose next-generation reproduction number at S = 1 equals `rn`.
/// For SEIR this is rn * gamma.
double contact_rate_from_rn(ModelKind kind, const ModelParams& params, double rn);

/// Nonzero equilibrium of the infectious compartments for a target I = i0.
struct Equilibrium {
    double i;
    std::optional<double> e;
    std::optional<double> a;
};

/// Values of E and/or A that make the infectious block stationary at I = i0.
Equilibrium equilibrium_state(ModelKind kind, const ModelParams& params, double i0);

/// Shortest epidemic length achievable with I(t) <= i0: (1 - S_herd) / (gamma i0).
double epidemic_duration_bound(const ModelParams& params, ModelKind kind, double i0);

struct ObservableDerivatives {
    double i_dot;
    std::optional<double> i_ddot; ///< SEAIR only
};

/// First (and for SEAIR second) time derivative of I implied by the model at `beta`.
ObservableDerivatives observable_derivatives(ModelKind kind, const State& state, const ModelParams& params,
                                             double beta);

/// Initial state with `prevalence` in every infectious compartment (E, A, I as present),
/// R = 0 and the remainder in S.
State initial_state_from_prevalence(ModelKind kind, double prevalence);

} // namespace smlock
