#include "smlock/scenario.h"
#include "smlock/error.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <functional>
#include <ostream>
#include <thread>

namespace smlock
{

namespace
{

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body)
{
    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::thread::hardware_concurrency();
    workers             = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                body(i);
            }
        });
    }
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_optional(std::ostream& out, const std::optional<double>& value)
{
    if (value) {
        out << *value;
    }
}

} // namespace

void Scenario::validate() const
{
    params.validate(kind);
    controller.validate(kind);
    vaccination.validate();
    integrator.validate();
    if (initial.kind() != kind) {
        throw ValidationError("initial", "initial state kind does not match model kind");
    }
    try {
        initial.validate();
    }
    catch (const ValidationError& e) {
        const std::string what = std::string(e.what()).substr(e.field().size() + 2);
        throw ValidationError(e.field() == "state" ? "initial" : "initial." + e.field(), what);
    }
}

Trajectory run_scenario(const Scenario& s)
{
    return simulate(s.kind, s.params, s.controller, s.vaccination, s.initial, s.integrator);
}

double default_transient_cutoff(const Trajectory& traj)
{
    if (traj.switch_events.size() >= 2) {
        return traj.switch_events[1].time;
    }
    return traj.empty() ? 0.0 : traj.times.back();
}

CycleMeasurement measure_cycles(const Trajectory& traj, double transient_cutoff)
{
    std::vector<SwitchEvent> events;
    std::copy_if(traj.switch_events.begin(), traj.switch_events.end(), std::back_inserter(events),
                 [&](const SwitchEvent& e) {
                     return e.time >= transient_cutoff;
                 });

    CycleMeasurement out;
    if (events.size() < 2) {
        out.insufficient_switches = true;
        return out;
    }
    for (std::size_t i = 0; i + 2 < events.size(); ++i) {
        const auto& f_start = events[i];
        const auto& l_start = events[i + 1];
        const auto& f_next  = events[i + 2];
        if (f_start.to == Regime::Freedom && l_start.to == Regime::Lockdown && f_next.to == Regime::Freedom) {
            out.cycles.push_back({f_start.time, l_start.time - f_start.time, f_next.time - l_start.time});
        }
    }
    return out;
}

double max_deviation_pct(const Trajectory& traj, double i_target, double transient_cutoff)
{
    const auto idx = index_of(traj.kind, Compartment::I);
    double worst   = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.times[k] >= transient_cutoff) {
            worst = std::max(worst, std::abs(traj.states[k][*idx] - i_target));
        }
    }
    return 100.0 * worst / i_target;
}

std::optional<double> extinction_time(const Trajectory& traj, double threshold, double hold)
{
    std::optional<double> run_start;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.states[k].infectious() < threshold) {
            if (!run_start) {
                run_start = traj.times[k];
            }
            if (traj.times[k] - *run_start >= hold) {
                return run_start;
            }
        }
        else {
            run_start.reset();
        }
    }
    return std::nullopt;
}

std::optional<SteadyCycle> steady_cycle(const std::vector<CycleRecord>& cycles, std::optional<double> until)
{
    std::vector<CycleRecord> done;
    for (const auto& c : cycles) {
        const double end = c.cycle_start + c.freedom_duration + c.lockdown_duration;
        if (!until || end <= *until) {
            done.push_back(c);
        }
    }
    if (done.empty()) {
        return std::nullopt;
    }
    const std::size_t first = done.size() > 3 ? done.size() - 3 : 0;
    std::vector<double> freedom, lockdown;
    for (std::size_t i = first; i < done.size(); ++i) {
        freedom.push_back(done[i].freedom_duration);
        lockdown.push_back(done[i].lockdown_duration);
    }
    return SteadyCycle{median(freedom), median(lockdown)};
}

MetricsReport compute_metrics(const Trajectory& traj, const Scenario& scenario,
                              std::optional<double> transient_cutoff)
{
    MetricsReport m;
    m.transient_cutoff = transient_cutoff.value_or(default_transient_cutoff(traj));
    m.cycles           = measure_cycles(traj, m.transient_cutoff).cycles;
    m.herd_time        = detect_herd_crossing(traj, scenario.kind, scenario.params);
    m.extinction_time  = extinction_time(traj);
    m.switch_count     = static_cast<int>(traj.switch_events.size());

    if (auto steady = steady_cycle(m.cycles, m.herd_time)) {
        m.steady_freedom  = steady->freedom;
        m.steady_lockdown = steady->lockdown;
    }
    for (const auto& c : m.cycles) {
        m.duty_cycles.push_back(c.lockdown_duration / (c.freedom_duration + c.lockdown_duration));
    }

    const double i0 = scenario.controller.i_target;
    m.max_deviation_pct = max_deviation_pct(traj, i0, m.transient_cutoff);
    const auto idx      = index_of(traj.kind, Compartment::I);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.times[k] >= m.transient_cutoff) {
            m.peak_infected = std::max(m.peak_infected, traj.states[k][*idx]);
        }
    }
    if (m.herd_time) {
        m.lockdowns_after_herd = static_cast<int>(
            std::count_if(traj.switch_events.begin(), traj.switch_events.end(), [&](const SwitchEvent& e) {
                return e.to == Regime::Lockdown && e.time > *m.herd_time;
            }));
    }
    return m;
}

std::string_view to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::RN:
        return "RN";
    case SweepAxis::Gamma:
        return "gamma";
    case SweepAxis::Epsilon:
        return "epsilon";
    case SweepAxis::Epsilon1:
        return "epsilon1";
    case SweepAxis::Epsilon2:
        return "epsilon2";
    case SweepAxis::VaccinationRate:
        return "vaccination_rate";
    }
    return "?";
}

SweepAxis parse_sweep_axis(std::string_view name)
{
    for (auto axis : {SweepAxis::RN, SweepAxis::Gamma, SweepAxis::Epsilon, SweepAxis::Epsilon1, SweepAxis::Epsilon2,
                      SweepAxis::VaccinationRate}) {
        const auto known = to_string(axis);
        if (std::equal(known.begin(), known.end(), name.begin(), name.end(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
            })) {
            return axis;
        }
    }
    throw ValidationError("sweep.axes", "unknown axis '" + std::string(name) + "'");
}

void SweepSpec::validate() const
{
    if (axes.empty()) {
        throw ValidationError("sweep.axes", "at least one axis is required");
    }
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const auto& ax   = axes[a];
        const auto field = "sweep.axes[" + std::to_string(a) + "]";
        if (ax.values.empty()) {
            throw ValidationError(field, "values must not be empty");
        }
        for (double v : ax.values) {
            const bool ok = ax.axis == SweepAxis::VaccinationRate ? (v >= 0.0 && v < 1.0)
                            : ax.axis == SweepAxis::RN            ? (v > 0.0 && v <= 10.0)
                                                                  : (v > 0.0 && v <= 1.0);
            if (!ok || !std::isfinite(v)) {
                throw ValidationError(field, "value " + std::to_string(v) + " outside the admissible range of " +
                                                 std::string(to_string(ax.axis)));
            }
        }
    }
    base.validate();
}

double reproduction_number_of(ModelKind kind, const ModelParams& params, double beta)
{
    return beta / critical_contact_rate(kind, params, 1.0);
}

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value)
{
    Scenario s            = base;
    const double base_rn  = reproduction_number_of(base.kind, base.params, base.params.beta_freedom);
    switch (axis) {
    case SweepAxis::RN:
        s.params.beta_freedom = contact_rate_from_rn(s.kind, s.params, value);
        return s;
    case SweepAxis::VaccinationRate:
        s.vaccination.daily_rate = value;
        return s;
    case SweepAxis::Gamma:
        s.params.gamma = value;
        break;
    case SweepAxis::Epsilon:
        s.params.epsilon = value;
        break;
    case SweepAxis::Epsilon1:
        s.params.epsilon1 = value;
        break;
    case SweepAxis::Epsilon2:
        s.params.epsilon2 = value;
        break;
    }
    s.params.beta_freedom = contact_rate_from_rn(s.kind, s.params, base_rn);
    return s;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs)
{
    spec.validate();

    std::size_t cells = 1;
    for (const auto& ax : spec.axes) {
        cells *= ax.values.size();
    }
    std::vector<SweepRow> rows(cells);
    parallel_for(cells, jobs, [&](std::size_t cell) {
        SweepRow& row = rows[cell];
        row.run_id    = cell;
        // last axis varies fastest
        std::size_t rest = cell;
        row.axis_values.resize(spec.axes.size());
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            const auto& values = spec.axes[a].values;
            row.axis_values[a] = values[rest % values.size()];
            rest /= values.size();
        }
        try {
            Scenario s = spec.base;
            for (std::size_t a = 0; a < spec.axes.size(); ++a) {
                s = apply_axis(s, spec.axes[a].axis, row.axis_values[a]);
            }
            row.metrics = compute_metrics(run_scenario(s), s);
        }
        catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return v;
}

std::vector<SweepRow> robustness_grid(const Scenario& base, std::pair<double, double> gamma_range,
                                      std::pair<double, double> epsilon_range, std::size_t grid_size, int jobs)
{
    if (grid_size == 0) {
        throw ValidationError("grid_size", "must be at least 1");
    }
    if (base.kind == ModelKind::SAIR) {
        throw ValidationError("model", "the gamma x epsilon grid needs a model with an exposed class");
    }
    SweepSpec spec;
    spec.base = base;
    spec.axes = {{SweepAxis::Gamma, linspace(gamma_range.first, gamma_range.second, grid_size)},
                 {SweepAxis::Epsilon, linspace(epsilon_range.first, epsilon_range.second, grid_size)}};
    return run_sweep(spec, jobs);
}

std::vector<RnPoint> rn_sweep(const Scenario& base, const std::vector<double>& rn_values, int jobs)
{
    SweepSpec spec;
    spec.base = base;
    spec.axes = {{SweepAxis::RN, rn_values}};
    std::vector<RnPoint> points;
    for (const auto& row : run_sweep(spec, jobs)) {
        RnPoint p{row.axis_values[0], std::nullopt, std::nullopt};
        if (row.metrics) {
            p.steady_freedom  = row.metrics->steady_freedom;
            p.steady_lockdown = row.metrics->steady_lockdown;
        }
        points.push_back(p);
    }
    return points;
}

std::vector<SweepRow> vaccination_scenarios(const Scenario& base, const std::vector<double>& rates,
                                            const VaccinationSchedule& schedule, int jobs)
{
    SweepSpec spec;
    spec.base             = base;
    spec.base.vaccination = schedule;
    spec.axes             = {{SweepAxis::VaccinationRate, rates}};
    return run_sweep(spec, jobs);
}

DurationDelta beta_lockdown_sensitivity(const Scenario& base, double alternative_beta_lockdown)
{
    Scenario alt             = base;
    alt.params.beta_lockdown = alternative_beta_lockdown;

    const auto reference = compute_metrics(run_scenario(base), base);
    const auto changed   = compute_metrics(run_scenario(alt), alt);
    if (!reference.steady_freedom || !changed.steady_freedom) {
        throw Error("beta_lockdown sensitivity: a run produced no complete cycle");
    }
    return {*changed.steady_freedom - *reference.steady_freedom,
            *changed.steady_lockdown - *reference.steady_lockdown};
}

void write_metrics_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows)
{
    const auto old_precision = out.precision(10);
    out << "run_id";
    for (auto axis : axes) {
        out << ',' << to_string(axis);
    }
    out << ",steady_freedom,steady_lockdown,max_dev_pct,peak_I,herd_time,extinction_time\n";
    for (const auto& row : rows) {
        out << row.run_id;
        for (double v : row.axis_values) {
            out << ',' << v;
        }
        if (row.metrics) {
            const auto& m = *row.metrics;
            out << ',';
            write_optional(out, m.steady_freedom);
            out << ',';
            write_optional(out, m.steady_lockdown);
            out << ',' << m.max_deviation_pct << ',' << m.peak_infected << ',';
            write_optional(out, m.herd_time);
            out << ',';
            write_optional(out, m.extinction_time);
        }
        else {
            out << ",,,,,,";
        }
        out << '\n';
    }
    out.precision(old_precision);
}

} // namespace smlock
