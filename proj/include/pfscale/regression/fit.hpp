#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace pfscale::reg {

class RegressionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double n = 0.0;
    double t = 0.0;
};

/// Slope of log10 t against log10 n over one window of abscissae.
struct WindowSlope {
    double log10_n_lo = 0.0;
    double log10_n_hi = 0.0;
    int count = 0;
    double slope = 0.0;
};

struct FitReport {
    double alpha = 0.0;
    double intercept = 0.0;  // log10 t at n = 1
    double sigma = 0.0;
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
    double r2 = 0.0;
    int sample_count = 0;
    std::vector<WindowSlope> windows;
};

inline constexpr double kZ95 = 1.96;
inline constexpr double kWindowDecades = 0.5;
inline constexpr double kWindowStepDecades = 0.25;
/// Spread of windowed slopes above which a single exponent is reported as
/// only locally valid (see locally_valid_only).
inline constexpr double kLocalSlopeSpread = 0.2;

/// Ordinary least squares on (log10 n, log10 t) with
/// sigma = sqrt((SSE / (N - 2)) / Sxx), r2 = 1 - SSE / SST and
/// ci95 = alpha -/+ 1.96 sigma. Windowed slopes are filled in as well.
FitReport fit_loglog(std::span<const Point> points);

/// alpha -/+ 1.96 sigma.
std::pair<double, double> ci95(double alpha, double sigma);

/// True iff value lies outside [ci95_lo, ci95_hi].
bool hypothesis_excluded(const FitReport& report, double value);

/// Slopes over sliding windows kWindowDecades wide, advanced by
/// kWindowStepDecades from the smallest n. Windows holding fewer than three
/// points or fewer than two distinct n are skipped.
std::vector<WindowSlope> windowed_slopes(std::span<const Point> points,
                                         double width_decades = kWindowDecades,
                                         double step_decades = kWindowStepDecades);

bool slopes_nondecreasing(std::span<const WindowSlope> windows, double slack = 0.0);

/// max - min of the windowed slopes (0 with fewer than two windows).
double slope_spread(std::span<const WindowSlope> windows);

/// True when the windowed slopes drift monotonically by more than
/// kLocalSlopeSpread. Timing noise moves them by similar amounts but not
/// in one direction.
bool locally_valid_only(const FitReport& report);

/// OLS slope of t against log10 n (change in t per decade of n).
double slope_per_decade(std::span<const Point> points);

/// Lower median: the middle order statistic for odd counts and the lower of
/// the two middle values for even counts.
double lower_median(std::vector<double> values);

nlohmann::json to_json(const FitReport& report);
FitReport fit_report_from_json(const nlohmann::json& doc);

/// One row of a complexity summary table.
struct SummaryRow {
    std::string label;
    FitReport report;
};

/// Aligned text table with alpha, sigma, CI95, r2 and the alpha = 1 and
/// alpha = 3 hypothesis outcomes.
void write_summary_text(std::ostream& os, std::span<const SummaryRow> rows);
void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows);

}  // namespace pfscale::reg
