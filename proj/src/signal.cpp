#include "smlock/signal.h"
#include "smlock/error.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace smlock
{

namespace
{

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

template <class T>
bool parse_number(std::string_view text, T& out)
{
    text          = trim(text);
    const auto* b = text.data();
    const auto* e = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e && b != e;
}

int day_difference(Date a, Date b)
{
    return static_cast<int>((std::chrono::sys_days(b) - std::chrono::sys_days(a)).count());
}

} // namespace

std::string_view to_string(SeriesKind kind)
{
    switch (kind) {
    case SeriesKind::DiagnosedInfected:
        return "diagnosed_infected";
    case SeriesKind::Hospitalized:
        return "hospitalized";
    case SeriesKind::CriticalCare:
        return "critical_care";
    }
    return "?";
}

SeriesKind parse_series_kind(std::string_view name)
{
    for (auto k : {SeriesKind::DiagnosedInfected, SeriesKind::Hospitalized, SeriesKind::CriticalCare}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ValidationError("replay.series_kind", "unknown series kind '" + std::string(name) + "'");
}

Date parse_iso_date(std::string_view text)
{
    text = trim(text);
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_number(text.substr(0, 4), y) ||
        !parse_number(text.substr(5, 2), m) || !parse_number(text.substr(8, 2), d)) {
        throw ParseError(0, "expected an ISO-8601 date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    Date date{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
              std::chrono::day(static_cast<unsigned>(d))};
    if (!date.ok()) {
        throw ParseError(0, "invalid calendar date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_iso_date(Date date)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

bool DailySeries::has_gaps() const
{
    return std::find(interpolated.begin(), interpolated.end(), true) != interpolated.end();
}

Date DailySeries::date_at(std::size_t day) const
{
    return std::chrono::sys_days(start_date) + std::chrono::days(static_cast<long>(day));
}

DailySeries ingest_csv(std::istream& in, double population, SeriesKind kind)
{
    if (!(population > 0.0)) {
        throw ValidationError("population", "must be positive");
    }
    DailySeries series;
    series.population = population;
    series.kind       = kind;

    std::string raw;
    std::size_t line_no = 0;
    std::optional<Date> last_date;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected two comma-separated fields 'date,count'");
        }
        const auto date_field  = trim(line.substr(0, comma));
        const auto count_field = trim(line.substr(comma + 1));
        if (!last_date && date_field == "date") {
            continue; // header
        }

        Date date;
        try {
            date = parse_iso_date(date_field);
        }
        catch (const ParseError& e) {
            throw ParseError(line_no, std::string(e.what()).substr(std::string("line 0: ").size()));
        }
        double count = 0.0;
        if (!parse_number(count_field, count) || !std::isfinite(count)) {
            throw ParseError(line_no, "count '" + std::string(count_field) + "' is not a number");
        }
        if (count < 0.0) {
            throw ValidationError("count", "line " + std::to_string(line_no) + ": negative count " +
                                               std::string(count_field));
        }

        if (!last_date) {
            series.start_date = date;
        }
        else {
            const int gap = day_difference(*last_date, date);
            if (gap <= 0) {
                throw ParseError(line_no, "dates must be strictly increasing");
            }
            const double previous = series.values.back();
            for (int d = 1; d < gap; ++d) {
                series.values.push_back(previous + (count - previous) * d / gap);
                series.interpolated.push_back(true);
            }
        }
        series.values.push_back(count);
        series.interpolated.push_back(false);
        last_date = date;
    }
    if (series.values.empty()) {
        throw ParseError(line_no, "no data rows");
    }
    return series;
}

DailySeries ingest_csv(const std::filesystem::path& path, double population, SeriesKind kind)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open " + path.string());
    }
    return ingest_csv(in, population, kind);
}

std::vector<double> scale_to_infected(const DailySeries& series, double h_factor)
{
    if (!(h_factor >= 1.0)) {
        throw ValidationError("h_factor", "must be at least 1");
    }
    std::vector<double> out;
    out.reserve(series.values.size());
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const double f = series.values[i] * h_factor / series.population;
        if (f > 1.0) {
            throw ValidationError("h_factor", "scaled fraction exceeds 1 on day " + std::to_string(i));
        }
        out.push_back(f);
    }
    return out;
}

SmoothedSignal smooth_and_differentiate(const std::vector<double>& y, int window, int degree, double spacing,
                                        double t0)
{
    if (degree < 0) {
        throw ValidationError("replay.degree", "must be nonnegative");
    }
    if (window % 2 == 0 || window < degree + 2) {
        throw ValidationError("replay.window", "must be odd and at least degree + 2");
    }
    if (static_cast<std::size_t>(window) > y.size()) {
        throw ValidationError("replay.window", "series has " + std::to_string(y.size()) +
                                                   " samples, shorter than the window");
    }
    if (!(spacing > 0.0)) {
        throw ValidationError("spacing", "must be positive");
    }

    const auto w    = static_cast<std::size_t>(window);
    const auto n    = y.size();
    const int terms = degree + 1;

    // Row `offset` of value/slope weights for an evaluation point `offset` samples into the window.
    Eigen::MatrixXd value_weights(w, w), slope_weights(w, w);
    for (std::size_t offset = 0; offset < w; ++offset) {
        Eigen::MatrixXd V(w, terms);
        for (std::size_t j = 0; j < w; ++j) {
            const double u = static_cast<double>(j) - static_cast<double>(offset);
            double power   = 1.0;
            for (int m = 0; m < terms; ++m) {
                V(static_cast<Eigen::Index>(j), m) = power;
                power *= u;
            }
        }
        // coefficients = pinv(V) y; only the first two rows are needed
        const Eigen::MatrixXd pinv = V.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(w, w));
        value_weights.row(static_cast<Eigen::Index>(offset)) = pinv.row(0);
        slope_weights.row(static_cast<Eigen::Index>(offset)) =
            terms > 1 ? Eigen::RowVectorXd(pinv.row(1) / spacing) : Eigen::RowVectorXd::Zero(w);
    }

    SmoothedSignal out;
    out.window = window;
    out.degree = degree;
    out.times.resize(n);
    out.i_hat.resize(n);
    out.i_dot_hat.resize(n);
    const std::size_t half = w / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t start  = std::min(i > half ? i - half : 0, n - w);
        const std::size_t offset = i - start;
        double value = 0.0, slope = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            value += value_weights(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(j)) * y[start + j];
            slope += slope_weights(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(j)) * y[start + j];
        }
        out.times[i]     = t0 + static_cast<double>(i) * spacing;
        out.i_hat[i]     = value;
        out.i_dot_hat[i] = slope;
    }
    return out;
}

std::vector<ReplayStep> replay_control(const SmoothedSignal& signal, const ControllerConfig& config)
{
    if (config.mu != 0.0) {
        throw ValidationError("controller.mu", "replay has no second-derivative estimate; mu must be 0");
    }
    if (signal.i_hat.size() != signal.times.size() || signal.i_dot_hat.size() != signal.times.size()) {
        throw ValidationError("signal", "arrays are not aligned");
    }
    std::vector<ReplayStep> steps;
    steps.reserve(signal.times.size());
    ControllerState ctrl;
    for (std::size_t i = 0; i < signal.times.size(); ++i) {
        const double r = surface_residual(config, signal.i_hat[i], signal.i_dot_hat[i]);
        ctrl           = switch_decision(config, ctrl, r, signal.times[i]);
        steps.push_back({signal.times[i], signal.i_hat[i], signal.i_dot_hat[i], r, ctrl.regime});
    }
    return steps;
}

void write_replay_csv(std::ostream& out, const std::vector<ReplayStep>& steps, Date start_date)
{
    const auto old_precision = out.precision(12);
    out << "date,I_hat,I_dot_hat,residual,regime\n";
    for (const auto& s : steps) {
        const auto day = std::chrono::days(std::lround(s.time));
        out << format_iso_date(std::chrono::sys_days(start_date) + day) << ',' << s.i_hat << ',' << s.i_dot_hat
            << ',' << s.residual << ',' << regime_code(s.regime) << '\n';
    }
    out.precision(old_precision);
}

} // namespace smlock
