#include "pfscale/regression/fit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

namespace pfscale::reg {

namespace {

struct Ols {
    double slope = 0.0;
    double intercept = 0.0;
    double sse = 0.0;
    double sst = 0.0;
    double sxx = 0.0;
};

Ols ols(std::span<const double> x, std::span<const double> y) {
    const auto count = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= count;
    my /= count;
    Ols r;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        r.sst += (y[i] - my) * (y[i] - my);
    }
    r.slope = sxy / r.sxx;
    r.intercept = my - r.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (r.intercept + r.slope * x[i]);
        r.sse += e * e;
    }
    return r;
}

bool distinct_abscissae(std::span<const double> x) {
    return std::any_of(x.begin(), x.end(), [&](double v) { return v != x.front(); });
}

}  // namespace

std::pair<double, double> ci95(double alpha, double sigma) {
    return {alpha - kZ95 * sigma, alpha + kZ95 * sigma};
}

FitReport fit_loglog(std::span<const Point> points) {
    if (points.size() < 3) {
        throw RegressionError(fmt::format("fit needs at least 3 points, got {}", points.size()));
    }
    std::vector<double> x;
    std::vector<double> y;
    for (const Point& p : points) {
        if (!(p.n > 0.0) || !(p.t > 0.0) || !std::isfinite(p.n) || !std::isfinite(p.t)) {
            throw RegressionError(
                fmt::format("fit needs positive finite n and t, got n={} t={}", p.n, p.t));
        }
        x.push_back(std::log10(p.n));
        y.push_back(std::log10(p.t));
    }
    if (!distinct_abscissae(x)) {
        throw RegressionError("fit is degenerate: all n are equal");
    }
    const Ols r = ols(x, y);
    FitReport rep;
    rep.alpha = r.slope;
    rep.intercept = r.intercept;
    rep.sample_count = static_cast<int>(points.size());
    rep.sigma = std::sqrt(r.sse / static_cast<double>(points.size() - 2) / r.sxx);
    std::tie(rep.ci95_lo, rep.ci95_hi) = ci95(rep.alpha, rep.sigma);
    rep.r2 = r.sst > 0.0 ? std::clamp(1.0 - r.sse / r.sst, 0.0, 1.0) : 1.0;
    rep.windows = windowed_slopes(points);
    return rep;
}

bool hypothesis_excluded(const FitReport& report, double value) {
    return value < report.ci95_lo || value > report.ci95_hi;
}

std::vector<WindowSlope> windowed_slopes(std::span<const Point> points, double width_decades,
                                         double step_decades) {
    if (!(width_decades > 0.0) || !(step_decades > 0.0)) {
        throw RegressionError("window width and step must be positive");
    }
    std::vector<std::pair<double, double>> xy;
    for (const Point& p : points) {
        xy.emplace_back(std::log10(p.n), std::log10(p.t));
    }
    std::sort(xy.begin(), xy.end());
    std::vector<WindowSlope> out;
    if (xy.empty()) {
        return out;
    }
    const double x_min = xy.front().first;
    const double x_max = xy.back().first;
    // tolerance keeps points sitting on a window edge from dropping out by rounding
    constexpr double kEdge = 1e-9;
    for (double lo = x_min; lo + width_decades <= x_max + step_decades - kEdge; lo += step_decades) {
        const double hi = std::min(lo + width_decades, x_max);
        std::vector<double> x;
        std::vector<double> y;
        for (const auto& [px, py] : xy) {
            if (px >= lo - kEdge && px <= hi + kEdge) {
                x.push_back(px);
                y.push_back(py);
            }
        }
        if (x.size() < 3 || !distinct_abscissae(x)) {
            continue;
        }
        out.push_back({lo, hi, static_cast<int>(x.size()), ols(x, y).slope});
        if (hi >= x_max) {
            break;
        }
    }
    return out;
}

bool slopes_nondecreasing(std::span<const WindowSlope> windows, double slack) {
    for (std::size_t i = 1; i < windows.size(); ++i) {
        if (windows[i].slope < windows[i - 1].slope - slack) {
            return false;
        }
    }
    return true;
}

double slope_spread(std::span<const WindowSlope> windows) {
    if (windows.size() < 2) {
        return 0.0;
    }
    const auto [lo, hi] = std::minmax_element(
        windows.begin(), windows.end(),
        [](const WindowSlope& a, const WindowSlope& b) { return a.slope < b.slope; });
    return hi->slope - lo->slope;
}

bool locally_valid_only(const FitReport& report) {
    if (slope_spread(report.windows) <= kLocalSlopeSpread) {
        return false;
    }
    std::vector<WindowSlope> reversed(report.windows.rbegin(), report.windows.rend());
    return slopes_nondecreasing(report.windows) || slopes_nondecreasing(reversed);
}

double slope_per_decade(std::span<const Point> points) {
    std::vector<double> x;
    std::vector<double> y;
    for (const Point& p : points) {
        if (!(p.n > 0.0)) {
            throw RegressionError("slope per decade needs positive n");
        }
        x.push_back(std::log10(p.n));
        y.push_back(p.t);
    }
    if (x.size() < 2 || !distinct_abscissae(x)) {
        throw RegressionError("slope per decade needs at least two distinct n");
    }
    return ols(x, y).slope;
}

double lower_median(std::vector<double> values) {
    if (values.empty()) {
        throw RegressionError("median of an empty group");
    }
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

nlohmann::json to_json(const FitReport& report) {
    nlohmann::json windows = nlohmann::json::array();
    for (const WindowSlope& w : report.windows) {
        windows.push_back({{"log10_n_lo", w.log10_n_lo},
                           {"log10_n_hi", w.log10_n_hi},
                           {"count", w.count},
                           {"slope", w.slope}});
    }
    return {{"alpha", report.alpha},
            {"intercept", report.intercept},
            {"sigma", report.sigma},
            {"ci95", {report.ci95_lo, report.ci95_hi}},
            {"r2", report.r2},
            {"sample_count", report.sample_count},
            {"windowed_slopes", std::move(windows)}};
}

FitReport fit_report_from_json(const nlohmann::json& doc) {
    try {
        FitReport r;
        r.alpha = doc.at("alpha").get<double>();
        r.intercept = doc.at("intercept").get<double>();
        r.sigma = doc.at("sigma").get<double>();
        r.ci95_lo = doc.at("ci95").at(0).get<double>();
        r.ci95_hi = doc.at("ci95").at(1).get<double>();
        r.r2 = doc.at("r2").get<double>();
        r.sample_count = doc.at("sample_count").get<int>();
        if (doc.contains("windowed_slopes")) {
            for (const auto& w : doc["windowed_slopes"]) {
                r.windows.push_back({w.at("log10_n_lo").get<double>(),
                                     w.at("log10_n_hi").get<double>(), w.at("count").get<int>(),
                                     w.at("slope").get<double>()});
            }
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw RegressionError(fmt::format("malformed fit report: {}", e.what()));
    }
}

namespace {

const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

void write_summary_text(std::ostream& os, std::span<const SummaryRow> rows) {
    std::size_t width = 6;
    for (const SummaryRow& r : rows) {
        width = std::max(width, r.label.size());
    }
    fmt::print(os, "{:<{}}  {:>7}  {:>7}  {:>17}  {:>6}  {:>4}  {:>10}  {:>10}\n", "method", width,
               "alpha", "sigma", "CI95", "r2", "N", "reject a=1", "reject a=3");
    for (const SummaryRow& r : rows) {
        const FitReport& f = r.report;
        fmt::print(os, "{:<{}}  {:>7.3f}  {:>7.3f}  {:>17}  {:>6.3f}  {:>4}  {:>10}  {:>10}\n",
                   r.label, width, f.alpha, f.sigma,
                   fmt::format("({:.4f}, {:.4f})", f.ci95_lo, f.ci95_hi), f.r2, f.sample_count,
                   yes_no(hypothesis_excluded(f, 1.0)), yes_no(hypothesis_excluded(f, 3.0)));
    }
}

void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
    os << "method,alpha,sigma,ci95_lo,ci95_hi,r2,sample_count,reject_alpha_1,reject_alpha_3\n";
    for (const SummaryRow& r : rows) {
        const FitReport& f = r.report;
        fmt::print(os, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{}\n", r.label, f.alpha,
                   f.sigma, f.ci95_lo, f.ci95_hi, f.r2, f.sample_count,
                   int(hypothesis_excluded(f, 1.0)), int(hypothesis_excluded(f, 3.0)));
    }
}

}  // namespace pfscale::reg
