#include "smlock/config.h"
#include "smlock/error.h"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace smlock
{

using nlohmann::json;

namespace
{

// Object view that remembers its dotted path and rejects keys nobody asked for.
class Section
{
public:
    Section(const json& node, std::string path)
        : m_node(node)
        , m_path(std::move(path))
    {
        if (!m_node.is_object()) {
            throw ValidationError(m_path.empty() ? "<root>" : m_path, "expected an object");
        }
    }

    std::string child_path(const std::string& key) const
    {
        return m_path.empty() ? key : m_path + "." + key;
    }

    bool has(const std::string& key)
    {
        m_known.insert(key);
        return m_node.contains(key);
    }

    const json& raw(const std::string& key)
    {
        m_known.insert(key);
        return m_node.at(key);
    }

    Section section(const std::string& key)
    {
        return Section(raw(key), child_path(key));
    }

    void number(const std::string& key, double& out)
    {
        if (!has(key)) {
            return;
        }
        const auto& v = m_node.at(key);
        if (!v.is_number()) {
            throw ValidationError(child_path(key), "expected a number");
        }
        out = v.get<double>();
    }

    void integer(const std::string& key, int& out)
    {
        if (!has(key)) {
            return;
        }
        const auto& v = m_node.at(key);
        if (!v.is_number_integer()) {
            throw ValidationError(child_path(key), "expected an integer");
        }
        out = v.get<int>();
    }

    void string(const std::string& key, std::string& out)
    {
        if (!has(key)) {
            return;
        }
        const auto& v = m_node.at(key);
        if (!v.is_string()) {
            throw ValidationError(child_path(key), "expected a string");
        }
        out = v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key)
    {
        const auto& v = raw(key);
        if (!v.is_array()) {
            throw ValidationError(child_path(key), "expected an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ValidationError(child_path(key) + "[" + std::to_string(i) + "]", "expected a number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    void reject_unknown() const
    {
        for (const auto& item : m_node.items()) {
            if (!m_known.count(item.key())) {
                throw ValidationError(child_path(item.key()), "unknown key");
            }
        }
    }

private:
    const json& m_node;
    std::string m_path;
    std::set<std::string> m_known;
};

// Rethrows ValidationError under the field path `field`.
template <class F>
void rethrow_as(const std::string& field, F&& f)
{
    try {
        f();
    }
    catch (const ValidationError& e) {
        const std::string what = std::string(e.what()).substr(e.field().empty() ? 0 : e.field().size() + 2);
        throw ValidationError(field, what);
    }
}

void read_params(Section s, ModelKind kind, ModelParams& p)
{
    s.number("gamma", p.gamma);
    s.number("epsilon", p.epsilon);
    s.number("epsilon1", p.epsilon1);
    s.number("epsilon2", p.epsilon2);
    const bool explicit_bf = s.has("beta_freedom");
    const bool explicit_bl = s.has("beta_lockdown");
    s.number("beta_freedom", p.beta_freedom);
    s.number("beta_lockdown", p.beta_lockdown);

    struct RnKey {
        const char* key;
        double* target;
        bool has_explicit;
    };
    for (auto [key, target, has_explicit] :
         {RnKey{"rn_freedom", &p.beta_freedom, explicit_bf}, RnKey{"rn_lockdown", &p.beta_lockdown, explicit_bl}}) {
        if (!s.has(key)) {
            continue;
        }
        if (has_explicit) {
            throw ValidationError(s.child_path(key), "give either the reproduction number or the contact rate");
        }
        double rn = 0.0;
        s.number(key, rn);
        if (!(rn > 0.0)) {
            throw ValidationError(s.child_path(key), "must be positive");
        }
        *target = contact_rate_from_rn(kind, p, rn);
    }
    s.reject_unknown();
}

State read_initial(Section s, ModelKind kind)
{
    State state = State::zero(kind);
    for (auto c : layout(kind)) {
        const std::string key(to_string(c));
        double v = 0.0;
        if (!s.has(key)) {
            throw ValidationError(s.child_path(key), "missing compartment");
        }
        s.number(key, v);
        state.at(c) = v;
    }
    s.reject_unknown();
    return state;
}

AxisValues read_axis(Section s)
{
    std::string name;
    if (!s.has("axis")) {
        throw ValidationError(s.child_path("axis"), "missing");
    }
    s.string("axis", name);
    AxisValues axis{};
    rethrow_as(s.child_path("axis"), [&] { axis.axis = parse_sweep_axis(name); });

    const bool has_values = s.has("values");
    const bool has_range  = s.has("range");
    if (has_values == has_range) {
        throw ValidationError(s.child_path("values"), "give exactly one of 'values' or 'range'");
    }
    if (has_values) {
        axis.values = s.numbers("values");
    }
    else {
        const auto range = s.numbers("range");
        if (range.size() != 2) {
            throw ValidationError(s.child_path("range"), "expected [lo, hi]");
        }
        int count = 0;
        if (!s.has("count")) {
            throw ValidationError(s.child_path("count"), "required with 'range'");
        }
        s.integer("count", count);
        if (count < 1) {
            throw ValidationError(s.child_path("count"), "must be at least 1");
        }
        axis.values = linspace(range[0], range[1], static_cast<std::size_t>(count));
    }
    s.reject_unknown();
    return axis;
}

} // namespace

void ReplayConfig::validate() const
{
    if (!(population > 0.0)) {
        throw ValidationError("replay.population", "must be positive");
    }
    if (!(h_factor >= 1.0)) {
        throw ValidationError("replay.h_factor", "must be at least 1");
    }
    if (degree < 0) {
        throw ValidationError("replay.degree", "must be nonnegative");
    }
    if (window % 2 == 0 || window < degree + 2) {
        throw ValidationError("replay.window", "must be odd and at least degree + 2");
    }
}

void ScenarioConfig::validate() const
{
    scenario.validate();
    if (output_dir.empty()) {
        throw ValidationError("output_dir", "must not be empty");
    }
    for (std::size_t i = 0; i < sweep_axes.size(); ++i) {
        rethrow_as("sweep.axes[" + std::to_string(i) + "]", [&] {
            SweepSpec spec{{sweep_axes[i]}, scenario};
            spec.validate();
        });
    }
    for (std::size_t i = 0; i < vaccinate_rates.size(); ++i) {
        const double r = vaccinate_rates[i];
        if (!(r >= 0.0 && r < 1.0)) {
            throw ValidationError("vaccinate.rates[" + std::to_string(i) + "]", "must be in [0, 1)");
        }
    }
    replay.validate();
}

ScenarioConfig parse_config(std::string_view text)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    }
    catch (const json::parse_error& e) {
        // nlohmann reports a byte offset; convert it to a line number
        const auto offset = std::min<std::size_t>(e.byte, text.size());
        const auto line   = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
        throw ParseError(line, e.what());
    }

    ScenarioConfig cfg;
    Section top(root, "");
    Scenario& sc = cfg.scenario;

    std::string model = "SEIR";
    top.string("model", model);
    rethrow_as("model", [&] { sc.kind = parse_model_kind(model); });

    if (top.has("params")) {
        read_params(top.section("params"), sc.kind, sc.params);
    }
    if (top.has("controller")) {
        auto s = top.section("controller");
        s.number("lambda", sc.controller.lambda);
        s.number("phi", sc.controller.phi);
        s.number("mu", sc.controller.mu);
        s.number("i_target", sc.controller.i_target);
        s.reject_unknown();
    }
    if (top.has("vaccination")) {
        auto s = top.section("vaccination");
        s.number("start_time", sc.vaccination.start_time);
        s.number("activation_delay", sc.vaccination.activation_delay);
        s.number("daily_rate", sc.vaccination.daily_rate);
        s.reject_unknown();
    }
    if (top.has("integrator")) {
        auto s = top.section("integrator");
        s.number("dt", sc.integrator.dt);
        s.number("horizon", sc.integrator.horizon);
        s.integer("record_stride", sc.integrator.record_stride);
        s.reject_unknown();
    }

    const bool has_prevalence = top.has("initial_prevalence");
    const bool has_initial    = top.has("initial");
    if (has_prevalence && has_initial) {
        throw ValidationError("initial", "give either 'initial' or 'initial_prevalence'");
    }
    double prevalence = 0.001;
    top.number("initial_prevalence", prevalence);
    if (has_initial) {
        sc.initial = read_initial(top.section("initial"), sc.kind);
    }
    else {
        if (!(prevalence > 0.0)) {
            throw ValidationError("initial_prevalence", "must be positive");
        }
        rethrow_as("initial_prevalence", [&] { sc.initial = initial_state_from_prevalence(sc.kind, prevalence); });
    }

    top.string("output_dir", cfg.output_dir);

    if (top.has("sweep")) {
        auto s = top.section("sweep");
        if (s.has("axes")) {
            const auto& axes = s.raw("axes");
            if (!axes.is_array()) {
                throw ValidationError("sweep.axes", "expected an array");
            }
            for (std::size_t i = 0; i < axes.size(); ++i) {
                cfg.sweep_axes.push_back(read_axis(Section(axes[i], "sweep.axes[" + std::to_string(i) + "]")));
            }
        }
        s.reject_unknown();
    }
    if (top.has("vaccinate")) {
        auto s = top.section("vaccinate");
        if (s.has("rates")) {
            cfg.vaccinate_rates = s.numbers("rates");
        }
        s.reject_unknown();
    }
    if (top.has("replay")) {
        auto s = top.section("replay");
        auto& r = cfg.replay;
        s.string("data", r.data);
        s.number("population", r.population);
        std::string kind(to_string(r.series_kind));
        s.string("series_kind", kind);
        r.series_kind = parse_series_kind(kind);
        s.number("h_factor", r.h_factor);
        s.integer("window", r.window);
        s.integer("degree", r.degree);
        s.reject_unknown();
    }
    top.reject_unknown();

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("--config", "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string to_json(const ScenarioConfig& cfg)
{
    const Scenario& sc = cfg.scenario;
    json root;
    root["model"]  = std::string(to_string(sc.kind));
    root["params"] = {
        {"gamma", sc.params.gamma},
        {"epsilon", sc.params.epsilon},
        {"epsilon1", sc.params.epsilon1},
        {"epsilon2", sc.params.epsilon2},
        {"beta_freedom", sc.params.beta_freedom},
        {"beta_lockdown", sc.params.beta_lockdown},
    };
    root["controller"] = {
        {"lambda", sc.controller.lambda},
        {"phi", sc.controller.phi},
        {"mu", sc.controller.mu},
        {"i_target", sc.controller.i_target},
    };
    root["vaccination"] = {
        {"start_time", sc.vaccination.start_time},
        {"activation_delay", sc.vaccination.activation_delay},
        {"daily_rate", sc.vaccination.daily_rate},
    };
    root["integrator"] = {
        {"dt", sc.integrator.dt},
        {"horizon", sc.integrator.horizon},
        {"record_stride", sc.integrator.record_stride},
    };
    json initial = json::object();
    for (auto c : layout(sc.kind)) {
        initial[std::string(to_string(c))] = sc.initial.get(c);
    }
    root["initial"]    = initial;
    root["output_dir"] = cfg.output_dir;

    json axes = json::array();
    for (const auto& a : cfg.sweep_axes) {
        axes.push_back({{"axis", std::string(to_string(a.axis))}, {"values", a.values}});
    }
    root["sweep"]     = {{"axes", axes}};
    root["vaccinate"] = {{"rates", cfg.vaccinate_rates}};
    root["replay"]    = {
        {"data", cfg.replay.data},
        {"population", cfg.replay.population},
        {"series_kind", std::string(to_string(cfg.replay.series_kind))},
        {"h_factor", cfg.replay.h_factor},
        {"window", cfg.replay.window},
        {"degree", cfg.replay.degree},
    };
    return root.dump(2) + "\n";
}

} // namespace smlock
