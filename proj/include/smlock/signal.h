#pragma once

#include "smlock/controller.h"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace smlock
{

enum class SeriesKind
{
    DiagnosedInfected,
    Hospitalized,
    CriticalCare,
};

std::string_view to_string(SeriesKind kind);
SeriesKind parse_series_kind(std::string_view name);

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws ParseError (line 0) on malformed input.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(Date date);

/// Daily counts, one value per calendar day starting at `start_date`.
struct DailySeries {
    Date start_date{};
    std::vector<double> values;
    std::vector<bool> interpolated; ///< true for days filled in between reported dates
    double population = 6e7;
    SeriesKind kind   = SeriesKind::CriticalCare;

    bool has_gaps() const;
    Date date_at(std::size_t day) const;
};

/// Reads `date,count` rows (an optional header line is skipped). Dates must be strictly
/// increasing; missing days are filled by linear interpolation and flagged.
/// Throws ParseError carrying the 1-based line number for malformed rows and ValidationError
/// (field "count", line in the message) for negative counts.
DailySeries ingest_csv(std::istream& in, double population, SeriesKind kind);
DailySeries ingest_csv(const std::filesystem::path& path, double population, SeriesKind kind);

/// values * h_factor / population. Throws ValidationError if a fraction exceeds 1 or h_factor < 1.
std::vector<double> scale_to_infected(const DailySeries& series, double h_factor);

/// Local polynomial fit of an evenly spaced series (one sample per day).
struct SmoothedSignal {
    std::vector<double> times;
    std::vector<double> i_hat;
    std::vector<double> i_dot_hat;
    int window = 7;
    int degree = 3;
};

/// Least-squares polynomial of `degree` over a `window` of samples around each point
/// (shifted inwards at the ends); value and slope of the fit at the point.
/// Throws ValidationError for an even window, window < degree + 2 or a series shorter than the window.
SmoothedSignal smooth_and_differentiate(const std::vector<double>& fractions, int window = 7, int degree = 3,
                                        double spacing = 1.0, double t0 = 0.0);

struct ReplayStep {
    double time;
    double i_hat;
    double i_dot_hat;
    double residual;
    Regime regime;
};

/// Applies the switching law to estimated (I, dI/dt), starting in freedom. Requires mu = 0.
std::vector<ReplayStep> replay_control(const SmoothedSignal& signal, const ControllerConfig& config);

/// date,I_hat,I_dot_hat,residual,regime. Row i is dated start_date + round(time).
void write_replay_csv(std::ostream& out, const std::vector<ReplayStep>& steps, Date start_date);

} // namespace smlock
