#pragma once

#include "smlock/scenario.h"
#include "smlock/signal.h"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace smlock
{

struct ReplayConfig {
    std::string data; ///< input CSV; the --data flag overrides it
    double population      = 6e7;
    SeriesKind series_kind = SeriesKind::CriticalCare;
    double h_factor        = 50.0;
    int window             = 7;
    int degree             = 3;

    void validate() const;
};

/// One configuration file drives every subcommand; sections not used by a subcommand are ignored.
///
/// Keys (all optional, defaults in parentheses):
///   model ("SEIR")
///   params.{gamma, epsilon, epsilon1, epsilon2, beta_freedom, beta_lockdown}
///   params.rn_freedom / params.rn_lockdown   set beta from a reproduction number instead
///   controller.{lambda, phi, mu, i_target}
///   vaccination.{start_time, activation_delay, daily_rate}
///   integrator.{dt, horizon, record_stride}
///   initial_prevalence (0.001)  or  initial.{S, E, A, I, R}
///   output_dir ("out")
///   sweep.axes[] = {axis, values[]} or {axis, range: [lo, hi], count}
///   vaccinate.rates[]
///   replay.{data, population, series_kind, h_factor, window, degree}
struct ScenarioConfig {
    Scenario scenario;
    std::string output_dir = "out";
    std::vector<AxisValues> sweep_axes;
    std::vector<double> vaccinate_rates;
    ReplayConfig replay;

    /// Throws ValidationError with a dotted field path.
    void validate() const;
};

/// Throws ParseError for malformed JSON and ValidationError (with field path) for bad values
/// or unknown keys.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Effective configuration with all defaults applied and betas resolved.
/// parse_config(to_json(c)) reproduces c exactly.
std::string to_json(const ScenarioConfig& config);

} // namespace smlock
