#include "smlock/models.h"
#include "smlock/error.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace smlock
{

namespace
{

constexpr std::array<Compartment, 4> seir_layout{Compartment::S, Compartment::E, Compartment::I, Compartment::R};
constexpr std::array<Compartment, 4> sair_layout{Compartment::S, Compartment::A, Compartment::I, Compartment::R};
constexpr std::array<Compartment, 5> seair_layout{Compartment::S, Compartment::E, Compartment::A, Compartment::I,
                                                  Compartment::R};

void require_positive(double value, const char* field)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be a finite positive rate, got " + std::to_string(value));
    }
}

} // namespace

std::string_view to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::SEIR:
        return "SEIR";
    case ModelKind::SAIR:
        return "SAIR";
    case ModelKind::SEAIR:
        return "SEAIR";
    }
    return "?";
}

std::string_view to_string(Compartment c)
{
    static constexpr std::array<std::string_view, 5> names{"S", "E", "A", "I", "R"};
    return names[static_cast<std::size_t>(c)];
}

ModelKind parse_model_kind(std::string_view name)
{
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) {
        return static_cast<char>(std::toupper(ch));
    });
    if (upper == "SEIR") {
        return ModelKind::SEIR;
    }
    if (upper == "SAIR") {
        return ModelKind::SAIR;
    }
    if (upper == "SEAIR") {
        return ModelKind::SEAIR;
    }
    throw ValidationError("model", "unknown model kind '" + std::string(name) + "'");
}

void ModelParams::validate(ModelKind kind) const
{
    require_positive(gamma, "params.gamma");
    if (kind != ModelKind::SAIR) {
        require_positive(epsilon, "params.epsilon");
    }
    if (kind != ModelKind::SEIR) {
        require_positive(epsilon1, "params.epsilon1");
        require_positive(epsilon2, "params.epsilon2");
    }
    require_positive(beta_freedom, "params.beta_freedom");
    require_positive(beta_lockdown, "params.beta_lockdown");
    // equality is the degenerate case where the actuator has no effect
    if (!(beta_lockdown <= beta_freedom)) {
        throw ValidationError("params.beta_lockdown", "must not exceed beta_freedom");
    }
}

std::span<const Compartment> layout(ModelKind kind)
{
    switch (kind) {
    case ModelKind::SEIR:
        return seir_layout;
    case ModelKind::SAIR:
        return sair_layout;
    case ModelKind::SEAIR:
        return seair_layout;
    }
    return {};
}

std::optional<std::size_t> index_of(ModelKind kind, Compartment c)
{
    auto l  = layout(kind);
    auto it = std::find(l.begin(), l.end(), c);
    if (it == l.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - l.begin());
}

State::State(ModelKind kind, std::span<const double> values)
    : m_kind(kind)
    , m_size(layout(kind).size())
{
    if (values.size() != m_size) {
        throw ShapeError(std::string(to_string(kind)) + " state needs " + std::to_string(m_size) +
                         " compartments, got " + std::to_string(values.size()));
    }
    std::copy(values.begin(), values.end(), m_values.begin());
}

State State::zero(ModelKind kind)
{
    State s;
    s.m_kind = kind;
    s.m_size = layout(kind).size();
    return s;
}

bool State::has(Compartment c) const
{
    return index_of(m_kind, c).has_value();
}

double State::get(Compartment c) const
{
    auto idx = index_of(m_kind, c);
    if (!idx) {
        throw ShapeError(std::string(to_string(m_kind)) + " has no compartment " + std::string(to_string(c)));
    }
    return m_values[*idx];
}

double& State::at(Compartment c)
{
    auto idx = index_of(m_kind, c);
    if (!idx) {
        throw ShapeError(std::string(to_string(m_kind)) + " has no compartment " + std::string(to_string(c)));
    }
    return m_values[*idx];
}

std::optional<double> State::find(Compartment c) const
{
    auto idx = index_of(m_kind, c);
    if (!idx) {
        return std::nullopt;
    }
    return m_values[*idx];
}

double State::sum() const
{
    double total = 0.0;
    for (double v : values()) {
        total += v;
    }
    return total;
}

double State::infectious() const
{
    // everything except S (first) and R (last)
    double w = 0.0;
    for (std::size_t i = 1; i + 1 < m_size; ++i) {
        w += m_values[i];
    }
    return w;
}

void State::validate(double tol) const
{
    auto l = layout(m_kind);
    for (std::size_t i = 0; i < m_size; ++i) {
        double v = m_values[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw ValidationError(std::string(to_string(l[i])), "compartment fraction must lie in [0,1], got " +
                                                                    std::to_string(v));
        }
    }
    double drift = sum() - 1.0;
    if (std::abs(drift) > tol) {
        throw ValidationError("state", "compartments must sum to 1, deviation " + std::to_string(drift));
    }
}

State& State::operator+=(const State& other)
{
    if (other.m_kind != m_kind) {
        throw ShapeError("cannot add states of different model kinds");
    }
    for (std::size_t i = 0; i < m_size; ++i) {
        m_values[i] += other.m_values[i];
    }
    return *this;
}

State& State::operator*=(double factor)
{
    for (std::size_t i = 0; i < m_size; ++i) {
        m_values[i] *= factor;
    }
    return *this;
}

State operator+(State a, const State& b)
{
    a += b;
    return a;
}

State operator*(double factor, State a)
{
    a *= factor;
    return a;
}

void VaccinationSchedule::validate() const
{
    if (!(start_time >= 0.0)) {
        throw ValidationError("vaccination.start_time", "must be nonnegative");
    }
    if (!(activation_delay >= 0.0)) {
        throw ValidationError("vaccination.activation_delay", "must be nonnegative");
    }
    if (!(daily_rate >= 0.0)) {
        throw ValidationError("vaccination.daily_rate", "must be nonnegative");
    }
}

State rhs(ModelKind kind, const State& state, const ModelParams& p, double beta, double v)
{
    if (state.kind() != kind) {
        throw ShapeError("state of kind " + std::string(to_string(state.kind())) + " passed to " +
                         std::string(to_string(kind)) + " right-hand side");
    }
    State d = State::zero(kind);
    switch (kind) {
    case ModelKind::SEIR: {
        const double s = state[0], e = state[1], i = state[2];
        const double infection = beta * s * i;
        const double onset     = p.epsilon * e;
        const double removal   = p.gamma * i;
        d[0] = -infection - v;
        d[1] = infection - onset;
        d[2] = onset - removal;
        d[3] = removal + v;
        break;
    }
    case ModelKind::SAIR: {
        const double s = state[0], a = state[1], i = state[2];
        const double infection = beta * s * (a + i);
        const double onset     = p.epsilon1 * a;
        const double recovery  = p.epsilon2 * a;
        const double removal   = p.gamma * i;
        d[0] = -infection - v;
        d[1] = infection - onset - recovery;
        d[2] = onset - removal;
        d[3] = recovery + removal + v;
        break;
    }
    case ModelKind::SEAIR: {
        const double s = state[0], e = state[1], a = state[2], i = state[3];
        const double infection  = beta * s * (a + i);
        const double incubation = p.epsilon * e;
        const double onset      = p.epsilon1 * a;
        const double recovery   = p.epsilon2 * a;
        const double removal    = p.gamma * i;
        d[0] = -infection - v;
        d[1] = infection - incubation;
        d[2] = incubation - onset - recovery;
        d[3] = onset - removal;
        d[4] = recovery + removal + v;
        break;
    }
    }
    return d;
}

double reproduction_number(double beta, double gamma)
{
    if (!(gamma > 0.0)) {
        throw DomainError("reproduction number needs gamma > 0");
    }
    return beta / gamma;
}

double critical_contact_rate(ModelKind kind, const ModelParams& p, double s)
{
    if (!(s > 0.0)) {
        throw DomainError("critical contact rate needs a positive susceptible fraction");
    }
    if (kind == ModelKind::SEIR) {
        return p.gamma / s;
    }
    return p.gamma * (p.epsilon1 + p.epsilon2) / ((p.gamma + p.epsilon1) * s);
}

double herd_threshold(ModelKind kind, const ModelParams& p)
{
    // beta0(S) = beta0(1) / S, so beta0(S_herd) = beta_F gives S_herd = beta0(1) / beta_F
    return critical_contact_rate(kind, p, 1.0) / p.beta_freedom;
}

double contact_rate_from_rn(ModelKind kind, const ModelParams& p, double rn)
{
    if (!(rn > 0.0)) {
        throw DomainError("reproduction number must be positive");
    }
    return rn * critical_contact_rate(kind, p, 1.0);
}

Equilibrium equilibrium_state(ModelKind kind, const ModelParams& p, double i0)
{
    if (!(i0 > 0.0)) {
        throw DomainError("equilibrium needs a positive target infected fraction");
    }
    Equilibrium eq{i0, std::nullopt, std::nullopt};
    switch (kind) {
    case ModelKind::SEIR:
        eq.e = p.gamma * i0 / p.epsilon;
        break;
    case ModelKind::SAIR:
        eq.a = p.gamma * i0 / p.epsilon1;
        break;
    case ModelKind::SEAIR:
        eq.a = p.gamma * i0 / p.epsilon1;
        eq.e = p.gamma * (p.epsilon1 + p.epsilon2) * i0 / (p.epsilon1 * p.epsilon);
        break;
    }
    return eq;
}

double epidemic_duration_bound(const ModelParams& p, ModelKind kind, double i0)
{
    if (!(i0 > 0.0)) {
        throw DomainError("epidemic duration bound needs a positive target infected fraction");
    }
    return (1.0 - herd_threshold(kind, p)) / (p.gamma * i0);
}

// İ and Ï never contain the infection term for the supported kinds, so beta is unused.
ObservableDerivatives observable_derivatives(ModelKind kind, const State& state, const ModelParams& p,
                                             [[maybe_unused]] double beta)
{
    if (state.kind() != kind) {
        throw ShapeError("observable derivatives: state kind does not match model kind");
    }
    switch (kind) {
    case ModelKind::SEIR:
        return {p.epsilon * state[1] - p.gamma * state[2], std::nullopt};
    case ModelKind::SAIR:
        return {p.epsilon1 * state[1] - p.gamma * state[2], std::nullopt};
    case ModelKind::SEAIR: {
        const double e = state[1], a = state[2], i = state[3];
        const double i_dot = p.epsilon1 * a - p.gamma * i;
        const double a_dot = p.epsilon * e - (p.epsilon1 + p.epsilon2) * a;
        return {i_dot, p.epsilon1 * a_dot - p.gamma * i_dot};
    }
    }
    return {0.0, std::nullopt};
}

State initial_state_from_prevalence(ModelKind kind, double prevalence)
{
    auto l = layout(kind);
    const std::size_t infectious = l.size() - 2;
    if (!(prevalence >= 0.0) || prevalence * static_cast<double>(infectious) >= 1.0) {
        throw ValidationError("initial_prevalence", "must be nonnegative and leave room for susceptibles");
    }
    State x = State::zero(kind);
    for (std::size_t i = 1; i + 1 < l.size(); ++i) {
        x[i] = prevalence;
    }
    x[0] = 1.0 - prevalence * static_cast<double>(infectious);
    return x;
}

} // namespace smlock
