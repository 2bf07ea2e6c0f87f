#pragma once

#include "smlock/controller.h"
#include "smlock/integrator.h"
#include "smlock/models.h"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smlock
{

/// Everything `simulate` needs for one closed-loop run.
struct Scenario {
    ModelKind kind = ModelKind::SEIR;
    ModelParams params;
    ControllerConfig controller;
    VaccinationSchedule vaccination;
    State initial = initial_state_from_prevalence(ModelKind::SEIR, 0.001);
    IntegratorConfig integrator;

    void validate() const;
};

Trajectory run_scenario(const Scenario& scenario);

/// One freedom period followed by the lockdown that ends it.
struct CycleRecord {
    double cycle_start;
    double freedom_duration;
    double lockdown_duration;
};

struct CycleMeasurement {
    std::vector<CycleRecord> cycles;
    bool insufficient_switches = false;
};

/// Time of the second switch event (end of the initial approach), or the last logged time
/// if the run switches fewer than twice.
double default_transient_cutoff(const Trajectory& traj);

/// Pairs freedom-start -> lockdown-start -> next freedom-start switch events at or after the cutoff.
CycleMeasurement measure_cycles(const Trajectory& traj, double transient_cutoff);

/// 100 max |I(t) - I0| / I0 over logged samples with t >= cutoff.
double max_deviation_pct(const Trajectory& traj, double i_target, double transient_cutoff);

/// Start of the first stretch of at least `hold` days with the infectious load below `threshold`.
std::optional<double> extinction_time(const Trajectory& traj, double threshold = 1e-6, double hold = 30.0);

struct SteadyCycle {
    double freedom;
    double lockdown;
};

/// Median of the last three completed cycles that end no later than `until` (herd crossing or horizon).
std::optional<SteadyCycle> steady_cycle(const std::vector<CycleRecord>& cycles,
                                        std::optional<double> until = std::nullopt);

struct MetricsReport {
    std::vector<CycleRecord> cycles;
    std::optional<double> steady_freedom;
    std::optional<double> steady_lockdown;
    double max_deviation_pct = 0.0;
    double peak_infected     = 0.0;
    std::vector<double> duty_cycles;
    std::optional<double> herd_time;
    std::optional<double> extinction_time;
    double transient_cutoff = 0.0;
    int switch_count        = 0;
    int lockdowns_after_herd = 0;
};

MetricsReport compute_metrics(const Trajectory& traj, const Scenario& scenario,
                              std::optional<double> transient_cutoff = std::nullopt);

enum class SweepAxis
{
    RN,
    Gamma,
    Epsilon,
    Epsilon1,
    Epsilon2,
    VaccinationRate,
};

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

struct AxisValues {
    SweepAxis axis;
    std::vector<double> values;
};

/// Cartesian product of one or more axes applied to a base scenario.
///
/// Rate axes keep the freedom reproduction number of the base scenario fixed, i.e. beta_F is
/// recomputed from the new rates; beta_L is never changed by an axis.
struct SweepSpec {
    std::vector<AxisValues> axes;
    Scenario base;

    void validate() const;
};

/// Reproduction number of `beta` for the model's own next-generation matrix at S = 1.
double reproduction_number_of(ModelKind kind, const ModelParams& params, double beta);

/// Base scenario with one axis set to `value`.
Scenario apply_axis(const Scenario& base, SweepAxis axis, double value);

struct SweepRow {
    std::size_t run_id = 0;
    std::vector<double> axis_values;
    std::optional<MetricsReport> metrics;
    std::string error;
};

/// Runs every grid cell, `jobs` at a time. Failed cells carry the error text and no metrics.
/// Rows are ordered by run_id regardless of `jobs`.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, int jobs = 0);

std::vector<double> linspace(double lo, double hi, std::size_t count);

/// gamma x epsilon grid with `grid_size` points per axis.
std::vector<SweepRow> robustness_grid(const Scenario& base, std::pair<double, double> gamma_range,
                                      std::pair<double, double> epsilon_range, std::size_t grid_size, int jobs = 0);

struct RnPoint {
    double rn;
    std::optional<double> steady_freedom;
    std::optional<double> steady_lockdown;
};

std::vector<RnPoint> rn_sweep(const Scenario& base, const std::vector<double>& rn_values, int jobs = 0);

/// One run per vaccination rate, with `schedule` providing start time and activation delay.
std::vector<SweepRow> vaccination_scenarios(const Scenario& base, const std::vector<double>& rates,
                                            const VaccinationSchedule& schedule, int jobs = 0);

struct DurationDelta {
    double freedom;
    double lockdown;
};

/// Change of the steady cycle when beta_L is replaced by `alternative_beta_lockdown`.
/// Throws Error if either run has no steady cycle.
DurationDelta beta_lockdown_sensitivity(const Scenario& base, double alternative_beta_lockdown);

/// run_id,<axis names...>,steady_freedom,steady_lockdown,max_dev_pct,peak_I,herd_time,extinction_time
void write_metrics_csv(std::ostream& out, const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows);

} // namespace smlock
