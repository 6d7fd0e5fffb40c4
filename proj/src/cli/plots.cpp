#include "pfscale/cli/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace pfscale::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 56.0;
constexpr std::array<const char*, 6> kColours{"#1f3b8f", "#c0392b", "#27813a",
                                              "#8e44ad", "#d35400", "#2c3e50"};

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '&':
                out += "&amp;";
                break;
            case '"':
                out += "&quot;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

/// Maps data coordinates (already logged where the axis is logarithmic)
/// into the plot frame.
struct Frame {
    Range x;
    Range y;

    double px(double v) const {
        return kLeft + (v - x.lo) / (x.hi - x.lo) * (kWidth - kLeft - kRight);
    }
    double py(double v) const {
        return kHeight - kBottom - (v - y.lo) / (y.hi - y.lo) * (kHeight - kTop - kBottom);
    }
};

Range decade_range(double lo, double hi) {
    Range r{std::floor(lo), std::ceil(hi)};
    if (r.hi <= r.lo) {
        r.hi = r.lo + 1.0;
    }
    return r;
}

Range linear_range(double lo, double hi) {
    Range r{0.0, std::max(1.0, std::ceil(hi * 1.1))};
    if (lo < 0.0) {
        r.lo = std::floor(lo);
    }
    return r;
}

std::string header(const AxisLabels& labels) {
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
        "viewBox=\"0 0 {0:.0f} {1:.0f}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        kWidth, kHeight);
    if (!labels.title.empty()) {
        out += fmt::format(
            "<text x=\"{:.1f}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" "
            "text-anchor=\"middle\">{}</text>\n",
            kWidth / 2, escape(labels.title));
    }
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"middle\">{}</text>\n",
        (kLeft + kWidth - kRight) / 2, kHeight - 14, escape(labels.x));
    out += fmt::format(
        "<text x=\"16\" y=\"{0:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
        "text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.1f})\">{1}</text>\n",
        (kTop + kHeight - kBottom) / 2, escape(labels.y));
    return out;
}

std::string frame_box() {
    return fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
        "stroke=\"black\" stroke-width=\"0.8\"/>\n",
        kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
}

std::string x_decade_ticks(const Frame& f) {
    std::string out;
    for (double d = f.x.lo; d <= f.x.hi + 1e-9; d += 1.0) {
        const double x = f.px(d);
        out += fmt::format(
            "<line x1=\"{0:.2f}\" y1=\"{1:.1f}\" x2=\"{0:.2f}\" y2=\"{2:.1f}\" stroke=\"#cccccc\" "
            "stroke-width=\"0.5\"/>\n"
            "<text x=\"{0:.2f}\" y=\"{3:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
            "text-anchor=\"middle\">1e{4:.0f}</text>\n",
            x, kTop, kHeight - kBottom, kHeight - kBottom + 16, d);
    }
    return out;
}

std::string y_ticks(const Frame& f, bool log) {
    std::string out;
    const double step = log ? 1.0 : std::max(1.0, std::ceil((f.y.hi - f.y.lo) / 8.0));
    for (double d = f.y.lo; d <= f.y.hi + 1e-9; d += step) {
        const double y = f.py(d);
        const std::string text = log ? fmt::format("1e{:.0f}", d) : fmt::format("{:.0f}", d);
        out += fmt::format(
            "<line x1=\"{1:.1f}\" y1=\"{0:.2f}\" x2=\"{2:.1f}\" y2=\"{0:.2f}\" stroke=\"#cccccc\" "
            "stroke-width=\"0.5\"/>\n"
            "<text x=\"{3:.1f}\" y=\"{4:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
            "text-anchor=\"end\">{5}</text>\n",
            y, kLeft, kWidth - kRight, kLeft - 6, y + 4, text);
    }
    return out;
}

std::string legend(std::span<const Series> series, std::string extra) {
    std::string out;
    double y = kTop + 14;
    for (std::size_t k = 0; k < series.size(); ++k) {
        out += fmt::format(
            "<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n"
            "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            kLeft + 12, y - 4, kColours[k % kColours.size()], kLeft + 20, y,
            escape(series[k].label));
        y += 15;
    }
    if (!extra.empty()) {
        out += fmt::format(
            "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            kLeft + 12, y, escape(extra));
    }
    return out;
}

std::string markers(std::span<const Series> series, const Frame& f, bool log_y) {
    std::string out;
    for (std::size_t k = 0; k < series.size(); ++k) {
        out += fmt::format("<g fill=\"{}\" class=\"points\">\n", kColours[k % kColours.size()]);
        for (const reg::Point& p : series[k].points) {
            const double y = log_y ? std::log10(p.t) : p.t;
            out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\"/>\n",
                               f.px(std::log10(p.n)), f.py(y));
        }
        out += "</g>\n";
    }
    return out;
}

void check_points(std::span<const Series> series, bool log_y) {
    for (const Series& s : series) {
        for (const reg::Point& p : s.points) {
            if (!(p.n > 0.0) || (log_y && !(p.t > 0.0))) {
                throw reg::RegressionError(
                    fmt::format("series '{}': plotted values must be positive", s.label));
            }
        }
    }
}

}  // namespace

std::string scatter_fit_svg(std::span<const Series> series, const std::optional<reg::FitReport>& fit,
                            const AxisLabels& labels) {
    check_points(series, true);
    double xlo = INFINITY;
    double xhi = -INFINITY;
    double ylo = INFINITY;
    double yhi = -INFINITY;
    for (const Series& s : series) {
        for (const reg::Point& p : s.points) {
            xlo = std::min(xlo, std::log10(p.n));
            xhi = std::max(xhi, std::log10(p.n));
            ylo = std::min(ylo, std::log10(p.t));
            yhi = std::max(yhi, std::log10(p.t));
        }
    }
    if (!std::isfinite(xlo)) {
        xlo = ylo = 0.0;
        xhi = yhi = 1.0;
    }
    const Frame f{decade_range(xlo, xhi), decade_range(ylo, yhi)};
    std::string out = header(labels);
    out += x_decade_ticks(f);
    out += y_ticks(f, true);
    out += frame_box();
    std::string note;
    if (fit) {
        const double y0 = fit->alpha * xlo + fit->intercept;
        const double y1 = fit->alpha * xhi + fit->intercept;
        out += fmt::format(
            "<line class=\"fit\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
            "stroke=\"black\" stroke-width=\"1.2\" stroke-dasharray=\"6 4\"/>\n",
            f.px(xlo), f.py(y0), f.px(xhi), f.py(y1));
        note = fmt::format("fit: alpha = {:.3f}, r2 = {:.3f}", fit->alpha, fit->r2);
    }
    out += markers(series, f, true);
    out += legend(series, note);
    out += "</svg>\n";
    return out;
}

std::string iterations_svg(std::span<const Series> series, const AxisLabels& labels) {
    check_points(series, false);
    double xlo = INFINITY;
    double xhi = -INFINITY;
    double ylo = 0.0;
    double yhi = 1.0;
    for (const Series& s : series) {
        for (const reg::Point& p : s.points) {
            xlo = std::min(xlo, std::log10(p.n));
            xhi = std::max(xhi, std::log10(p.n));
            ylo = std::min(ylo, p.t);
            yhi = std::max(yhi, p.t);
        }
    }
    if (!std::isfinite(xlo)) {
        xlo = 0.0;
        xhi = 1.0;
    }
    const Frame f{decade_range(xlo, xhi), linear_range(ylo, yhi)};
    std::string out = header(labels);
    out += x_decade_ticks(f);
    out += y_ticks(f, false);
    out += frame_box();
    out += markers(series, f, false);
    out += legend(series, {});
    out += "</svg>\n";
    return out;
}

}  // namespace pfscale::cli
