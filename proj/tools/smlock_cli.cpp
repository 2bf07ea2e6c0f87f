// Command-line driver: simulate, sweep, vaccinate and replay, each configured by one JSON file.

#include "smlock/config.h"
#include "smlock/error.h"
#include "smlock/integrator.h"
#include "smlock/scenario.h"
#include "smlock/signal.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace smlock;

namespace
{

constexpr int exit_validation = 1;
constexpr int exit_runtime    = 2;

struct Options {
    std::string config;
    std::string out;
    int jobs = 0;
    std::optional<long> seed; // reserved, every run is deterministic
    std::string data;
    std::vector<double> rates;
};

std::ofstream open_output(const fs::path& dir, const std::string& name)
{
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) {
        throw Error("cannot write " + (dir / name).string());
    }
    return out;
}

ScenarioConfig load(const Options& opt)
{
    auto cfg = load_config(opt.config);
    if (!opt.out.empty()) {
        cfg.output_dir = opt.out;
    }
    auto effective = open_output(cfg.output_dir, "effective_config.json");
    effective << to_json(cfg);
    return cfg;
}

void print_optional(const char* label, const std::optional<double>& v)
{
    std::cout << "  " << label << ": ";
    if (v) {
        std::cout << *v;
    }
    else {
        std::cout << "n/a";
    }
    std::cout << '\n';
}

int cmd_simulate(const Options& opt)
{
    const auto cfg  = load(opt);
    const auto traj = run_scenario(cfg.scenario);
    for (const auto& w : traj.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    const auto metrics = compute_metrics(traj, cfg.scenario);

    auto traj_out = open_output(cfg.output_dir, "trajectory.csv");
    write_trajectory_csv(traj_out, traj);

    SweepRow row;
    row.metrics      = metrics;
    auto metrics_out = open_output(cfg.output_dir, "metrics.csv");
    write_metrics_csv(metrics_out, {}, {row});

    auto cycles_out = open_output(cfg.output_dir, "cycles.csv");
    cycles_out.precision(10);
    cycles_out << "cycle_start,freedom,lockdown,duty_cycle\n";
    for (std::size_t i = 0; i < metrics.cycles.size(); ++i) {
        const auto& c = metrics.cycles[i];
        cycles_out << c.cycle_start << ',' << c.freedom_duration << ',' << c.lockdown_duration << ','
                   << metrics.duty_cycles[i] << '\n';
    }

    std::cout << "model " << to_string(cfg.scenario.kind) << ", " << traj.switch_events.size()
              << " switches, " << metrics.cycles.size() << " cycles after day " << metrics.transient_cutoff << '\n';
    print_optional("steady freedom [d]", metrics.steady_freedom);
    print_optional("steady lockdown [d]", metrics.steady_lockdown);
    std::cout << "  max deviation [%]: " << metrics.max_deviation_pct << '\n'
              << "  peak I: " << metrics.peak_infected << '\n';
    print_optional("herd crossing [d]", metrics.herd_time);
    print_optional("extinction [d]", metrics.extinction_time);
    std::cout << "wrote " << cfg.output_dir << "/{trajectory,metrics,cycles}.csv\n";
    return 0;
}

int report_rows(const std::vector<SweepRow>& rows)
{
    int failed = 0;
    for (const auto& r : rows) {
        if (!r.metrics) {
            std::cerr << "run " << r.run_id << " failed: " << r.error << '\n';
            ++failed;
        }
    }
    std::cout << rows.size() - static_cast<std::size_t>(failed) << " of " << rows.size() << " runs succeeded\n";
    return failed == 0 ? 0 : exit_runtime;
}

int cmd_sweep(const Options& opt)
{
    const auto cfg = load(opt);
    if (cfg.sweep_axes.empty()) {
        throw ValidationError("sweep.axes", "the sweep subcommand needs at least one axis");
    }
    const SweepSpec spec{cfg.sweep_axes, cfg.scenario};
    const auto rows = run_sweep(spec, opt.jobs);

    std::vector<SweepAxis> axes;
    for (const auto& a : spec.axes) {
        axes.push_back(a.axis);
    }
    auto out = open_output(cfg.output_dir, "sweep.csv");
    write_metrics_csv(out, axes, rows);
    std::cout << "wrote " << cfg.output_dir << "/sweep.csv\n";
    return report_rows(rows);
}

int cmd_vaccinate(const Options& opt)
{
    const auto cfg   = load(opt);
    const auto rates = opt.rates.empty() ? cfg.vaccinate_rates : opt.rates;
    if (rates.empty()) {
        throw ValidationError("vaccinate.rates", "at least one rate is required");
    }
    const auto rows = vaccination_scenarios(cfg.scenario, rates, cfg.scenario.vaccination, opt.jobs);
    auto out        = open_output(cfg.output_dir, "vaccinate.csv");
    write_metrics_csv(out, {SweepAxis::VaccinationRate}, rows);
    std::cout << "wrote " << cfg.output_dir << "/vaccinate.csv\n";
    return report_rows(rows);
}

int cmd_replay(const Options& opt)
{
    const auto cfg = load(opt);
    const auto& rc = cfg.replay;
    fs::path data  = opt.data.empty() ? fs::path(rc.data) : fs::path(opt.data);
    if (data.empty()) {
        throw ValidationError("replay.data", "no input CSV given (use --data or replay.data)");
    }
    if (opt.data.empty() && data.is_relative()) {
        data = fs::path(opt.config).parent_path() / data;
    }

    const auto series    = ingest_csv(data, rc.population, rc.series_kind);
    const auto fractions = scale_to_infected(series, rc.h_factor);
    const auto signal    = smooth_and_differentiate(fractions, rc.window, rc.degree);
    const auto steps     = replay_control(signal, cfg.scenario.controller);

    auto out = open_output(cfg.output_dir, "replay.csv");
    write_replay_csv(out, steps, series.start_date);

    int switches = 0;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        switches += steps[i].regime != steps[i - 1].regime;
    }
    switches += !steps.empty() && steps.front().regime == Regime::Lockdown;
    std::cout << steps.size() << " days replayed from " << format_iso_date(series.start_date) << ", " << switches
              << " switches" << (series.has_gaps() ? " (gaps interpolated)" : "") << '\n'
              << "wrote " << cfg.output_dir << "/replay.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sliding-mode lockdown controller for compartmental epidemic models"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
        sub->add_option("--jobs", opt.jobs, "parallel runs; 0 = hardware threads")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", opt.seed, "reserved; all runs are deterministic");
    };

    auto* simulate  = app.add_subcommand("simulate", "closed-loop run: trajectory.csv, metrics.csv, cycles.csv");
    auto* sweep     = app.add_subcommand("sweep", "parameter grid from sweep.axes: sweep.csv");
    auto* vaccinate = app.add_subcommand("vaccinate", "one run per vaccination rate: vaccinate.csv");
    auto* replay    = app.add_subcommand("replay", "switching law on measured daily counts: replay.csv");
    for (auto* sub : {simulate, sweep, vaccinate, replay}) {
        add_common(sub);
    }
    vaccinate->add_option("--rates", opt.rates, "daily vaccination rates as fractions (overrides vaccinate.rates)");
    replay->add_option("--data", opt.data, "date,count CSV (overrides replay.data)");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    try {
        if (*simulate) {
            return cmd_simulate(opt);
        }
        if (*sweep) {
            return cmd_sweep(opt);
        }
        if (*vaccinate) {
            return cmd_vaccinate(opt);
        }
        return cmd_replay(opt);
    }
    catch (const ValidationError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return exit_validation;
    }
    catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return exit_validation;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
}
