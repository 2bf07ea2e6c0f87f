#include "smlock/error.h"
#include "smlock/scenario.h"
#include "smlock/signal.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace smlock;

namespace
{

const std::string fixtures = SMLOCK_FIXTURES;

DailySeries series_of(const std::vector<double>& values, double population = 6e7)
{
    DailySeries s;
    s.start_date   = parse_iso_date("2020-03-01");
    s.values       = values;
    s.interpolated.assign(values.size(), false);
    s.population   = population;
    return s;
}

// Daily samples (t = 0, 1, 2, ...) of I and its exact derivative from a logged trajectory.
struct DailyTruth {
    std::vector<double> i, i_dot;
};

DailyTruth daily_samples(const Trajectory& traj, const Scenario& s)
{
    DailyTruth out;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (std::abs(traj.times[k] - std::round(traj.times[k])) < 1e-9) {
            out.i.push_back(traj.states[k].get(Compartment::I));
            out.i_dot.push_back(observable_derivatives(s.kind, traj.states[k], s.params, traj.betas[k]).i_dot);
        }
    }
    return out;
}

std::vector<double> switch_times(const std::vector<ReplayStep>& steps)
{
    std::vector<double> t;
    Regime r = Regime::Freedom;
    for (const auto& s : steps) {
        if (s.regime != r) {
            t.push_back(s.time);
            r = s.regime;
        }
    }
    return t;
}

} // namespace

TEST(Signal, IsoDates)
{
    const Date d = parse_iso_date("2020-02-29");
    EXPECT_EQ(format_iso_date(d), "2020-02-29");
    EXPECT_THROW(parse_iso_date("2021-02-29"), ParseError);
    EXPECT_THROW(parse_iso_date("2020/03/01"), ParseError);
    EXPECT_THROW(parse_iso_date("2020-3-1"), ParseError);
}

TEST(Signal, IngestThreeRows)
{
    const auto s = ingest_csv(fixtures + "/icu_three_days.csv", 6e7, SeriesKind::CriticalCare);
    ASSERT_EQ(s.values.size(), 3u);
    EXPECT_EQ(s.values[2], 2500.0);
    EXPECT_FALSE(s.has_gaps());
    EXPECT_EQ(format_iso_date(s.date_at(2)), "2020-03-03");
}

TEST(Signal, IngestFillsMissingDay)
{
    const auto s = ingest_csv(fixtures + "/icu_missing_day.csv", 6e7, SeriesKind::CriticalCare);
    ASSERT_EQ(s.values.size(), 5u);
    EXPECT_TRUE(s.has_gaps());
    EXPECT_TRUE(s.interpolated[2]);
    EXPECT_FALSE(s.interpolated[3]);
    EXPECT_DOUBLE_EQ(s.values[2], 2500.0);
}

TEST(Signal, IngestRejectsNegativeCountAtItsLine)
{
    try {
        ingest_csv(fixtures + "/icu_negative.csv", 6e7, SeriesKind::CriticalCare);
        FAIL();
    }
    catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "count");
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(Signal, IngestReportsMalformedLine)
{
    try {
        ingest_csv(fixtures + "/malformed.csv", 6e7, SeriesKind::CriticalCare);
        FAIL();
    }
    catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    std::istringstream backwards("2020-03-02,1\n2020-03-01,2\n");
    try {
        ingest_csv(backwards, 6e7, SeriesKind::CriticalCare);
        FAIL();
    }
    catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream bad_number("2020-03-01,abc\n");
    EXPECT_THROW(ingest_csv(bad_number, 6e7, SeriesKind::CriticalCare), ParseError);
    std::istringstream empty("date,count\n");
    EXPECT_THROW(ingest_csv(empty, 6e7, SeriesKind::CriticalCare), ParseError);
}

TEST(Signal, ScaleToInfected)
{
    EXPECT_NEAR(scale_to_infected(series_of({2400}), 50.0)[0], 0.002, 1e-18);
    EXPECT_NEAR(scale_to_infected(series_of({10000 * 0.35}), 50.0)[0], 0.0029166666666667, 1e-15);
    EXPECT_DOUBLE_EQ(scale_to_infected(series_of({3e6}), 1.0)[0], 0.05);
    EXPECT_THROW(scale_to_infected(series_of({2e6}), 50.0), ValidationError);
    EXPECT_THROW(scale_to_infected(series_of({1}), 0.5), ValidationError);
}

TEST(Signal, ScalingIsMultiplicativeAndOrderPreserving)
{
    const std::vector<double> counts{10, 2400, 50, 7000, 7000, 0};
    const auto f = scale_to_infected(series_of(counts), 50.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        EXPECT_DOUBLE_EQ(f[i], counts[i] * 50.0 / 6e7);
        for (std::size_t j = 0; j < counts.size(); ++j) {
            EXPECT_EQ(counts[i] < counts[j], f[i] < f[j]);
        }
    }
}

TEST(Signal, CubicIsReproducedExactly)
{
    auto y  = [](double t) { return 1e-3 + 2e-4 * t - 3e-5 * t * t + 1e-6 * t * t * t; };
    auto dy = [](double t) { return 2e-4 - 6e-5 * t + 3e-6 * t * t; };
    std::vector<double> samples;
    for (int k = 0; k < 40; ++k) {
        samples.push_back(y(k));
    }
    for (int window : {5, 7, 9, 11}) {
        const auto s = smooth_and_differentiate(samples, window, 3);
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const double t = static_cast<double>(k);
            EXPECT_NEAR(s.i_hat[k], y(t), 1e-10 * std::abs(y(t))) << "window " << window << " t " << t;
            EXPECT_NEAR(s.i_dot_hat[k], dy(t), 1e-10 * std::max(std::abs(dy(t)), 1e-4))
                << "window " << window << " t " << t;
        }
    }
}

TEST(Signal, SpacingScalesTheDerivative)
{
    std::vector<double> samples;
    for (int k = 0; k < 20; ++k) {
        samples.push_back(3.0 * (0.5 * k)); // y = 3 t sampled every half day
    }
    const auto s = smooth_and_differentiate(samples, 7, 3, 0.5, 10.0);
    EXPECT_DOUBLE_EQ(s.times[1], 10.5);
    for (double d : s.i_dot_hat) {
        EXPECT_NEAR(d, 3.0, 1e-10);
    }
}

TEST(Signal, SmoothingIsLinear)
{
    std::mt19937 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> x(50), y(50), combo(50);
    const double a = 2.5, b = -0.75;
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k]     = n(rng);
        y[k]     = n(rng);
        combo[k] = a * x[k] + b * y[k];
    }
    const auto sx = smooth_and_differentiate(x), sy = smooth_and_differentiate(y),
               sc = smooth_and_differentiate(combo);
    for (std::size_t k = 0; k < x.size(); ++k) {
        EXPECT_NEAR(sc.i_hat[k], a * sx.i_hat[k] + b * sy.i_hat[k], 1e-12);
        EXPECT_NEAR(sc.i_dot_hat[k], a * sx.i_dot_hat[k] + b * sy.i_dot_hat[k], 1e-12);
    }
}

TEST(Signal, ConstantSeriesHasZeroDerivative)
{
    const auto s = smooth_and_differentiate(std::vector<double>(30, 0.002));
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        EXPECT_NEAR(s.i_hat[k], 0.002, 1e-15);
        EXPECT_NEAR(s.i_dot_hat[k], 0.0, 1e-16);
    }
}

TEST(Signal, WindowValidation)
{
    const std::vector<double> y(10, 1.0);
    EXPECT_THROW(smooth_and_differentiate(y, 6, 3), ValidationError);
    EXPECT_THROW(smooth_and_differentiate(y, 3, 3), ValidationError);
    EXPECT_THROW(smooth_and_differentiate(y, 11, 3), ValidationError);
    EXPECT_NO_THROW(smooth_and_differentiate(y, 5, 3));
}

// 1% multiplicative noise on daily samples of the nominal run; the 11-day window keeps the
// derivative estimate within 25% relative RMS of the true derivative.
TEST(Signal, NoisyDerivativeEstimate)
{
    const Scenario s = Scenario{};
    const auto truth = daily_samples(run_scenario(s), s);
    std::mt19937 rng(2024);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> noisy;
    for (double i : truth.i) {
        noisy.push_back(i * (1.0 + noise(rng)));
    }
    auto relative_rms = [&](int window) {
        const auto est = smooth_and_differentiate(noisy, window, 3);
        double err = 0.0, ref = 0.0;
        for (std::size_t k = 0; k < truth.i_dot.size(); ++k) {
            err += std::pow(est.i_dot_hat[k] - truth.i_dot[k], 2);
            ref += std::pow(truth.i_dot[k], 2);
        }
        return std::sqrt(err / ref);
    };
    const double rms11 = relative_rms(11);
    RecordProperty("relative_rms_window7", std::to_string(relative_rms(7)));
    RecordProperty("relative_rms_window11", std::to_string(rms11));
    EXPECT_LT(rms11, 0.25);
}

TEST(Signal, ReplayOfConstantTargetStaysFree)
{
    const auto signal = smooth_and_differentiate(std::vector<double>(60, 0.002));
    for (const auto& step : replay_control(signal, ControllerConfig{})) {
        EXPECT_EQ(step.regime, Regime::Freedom);
        EXPECT_NEAR(step.residual, 0.0, 1e-15);
    }
}

TEST(Signal, ReplayOfRisingSignalSwitchesOnce)
{
    std::vector<double> y;
    for (int k = 0; k < 60; ++k) {
        y.push_back(0.001 + 4e-5 * k);
    }
    const auto steps = replay_control(smooth_and_differentiate(y), ControllerConfig{});
    const auto t     = switch_times(steps);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(steps.back().regime, Regime::Lockdown);
    // r = 0.2 (I - 0.002) + 4e-5 = 8e-6 k - 1.6e-4 exceeds 1e-4 for k > 32.5
    EXPECT_EQ(t[0], 33.0);
}

TEST(Signal, ReplayOfScaledIcuCounts)
{
    // 2640 ICU beds at H = 50 in 6e7 people is I = 0.0022
    const auto fractions = scale_to_infected(series_of(std::vector<double>(15, 2640.0)), 50.0);
    const auto steps     = replay_control(smooth_and_differentiate(fractions), ControllerConfig{});
    for (const auto& s : steps) {
        EXPECT_NEAR(s.i_hat, 0.0022, 1e-15);
        EXPECT_NEAR(s.residual, 4e-5, 1e-15);
        EXPECT_EQ(s.regime, Regime::Freedom);
    }
}

TEST(Signal, ReplayRequiresZeroMu)
{
    ControllerConfig c;
    c.mu = 0.1;
    EXPECT_THROW(replay_control(smooth_and_differentiate(std::vector<double>(10, 0.002)), c), ValidationError);
}

// Exact (I, dI/dt) from every integration step reproduce the simulated regime sequence.
TEST(Signal, ReplayOfExactSignalReproducesSimulation)
{
    Scenario s                 = Scenario{};
    s.integrator.record_stride = 1;
    const auto traj            = run_scenario(s);
    SmoothedSignal exact;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        exact.times.push_back(traj.times[k]);
        exact.i_hat.push_back(traj.states[k].get(Compartment::I));
        exact.i_dot_hat.push_back(observable_derivatives(s.kind, traj.states[k], s.params, traj.betas[k]).i_dot);
    }
    const auto steps = replay_control(exact, s.controller);
    ASSERT_EQ(steps.size(), traj.size());
    for (std::size_t k = 1; k + 1 < steps.size(); ++k) {
        const bool matches = steps[k].regime == traj.regimes[k] || steps[k].regime == traj.regimes[k - 1] ||
                             steps[k].regime == traj.regimes[k + 1];
        ASSERT_TRUE(matches) << "t=" << traj.times[k];
    }
}

// Daily samples of the nominal run, smoothed with the default window, replayed through the same
// controller: every simulated switch must be matched by a replayed one within two days.
TEST(Signal, ReplayOfDailySamplesMatchesSimulatedSwitchTimes)
{
    const Scenario s = Scenario{};
    const auto traj  = run_scenario(s);
    const auto truth = daily_samples(traj, s);
    const auto steps = replay_control(smooth_and_differentiate(truth.i), s.controller);
    const auto replayed = switch_times(steps);

    ASSERT_FALSE(traj.switch_events.empty());
    EXPECT_EQ(replayed.size(), traj.switch_events.size());
    for (const auto& e : traj.switch_events) {
        const bool matched = std::any_of(replayed.begin(), replayed.end(), [&](double t) {
            return std::abs(t - e.time) <= 2.0;
        });
        EXPECT_TRUE(matched) << "simulated switch at t=" << e.time << " has no replayed counterpart";
    }
}

TEST(Signal, ReplayCsvLayout)
{
    const std::vector<ReplayStep> steps{{0.0, 0.002, 0.0, 0.0, Regime::Freedom},
                                        {1.0, 0.0025, 1e-5, 1.1e-4, Regime::Lockdown}};
    std::ostringstream out;
    write_replay_csv(out, steps, parse_iso_date("2020-12-31"));
    EXPECT_EQ(out.str(), "date,I_hat,I_dot_hat,residual,regime\n"
                         "2020-12-31,0.002,0,0,F\n"
                         "2021-01-01,0.0025,1e-05,0.00011,L\n");
}

TEST(Signal, SeriesKindNames)
{
    EXPECT_EQ(parse_series_kind("critical_care"), SeriesKind::CriticalCare);
    EXPECT_EQ(to_string(SeriesKind::DiagnosedInfected), "diagnosed_infected");
    EXPECT_THROW(parse_series_kind("icu"), ValidationError);
}
