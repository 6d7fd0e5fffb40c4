#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfscale/regression/fit.hpp"

namespace pfscale::cli {

enum class PlotKind { ScatterFit, Spy, IterationsScatter };

struct Series {
    std::string label;
    std::vector<reg::Point> points;
};

struct AxisLabels {
    std::string title;
    std::string x = "number of nodes n";
    std::string y = "median time t (s)";
};

/// Log-log scatter; with a fit, overlays the dashed line
/// log10 t = alpha log10 n + intercept across the data range.
std::string scatter_fit_svg(std::span<const Series> series, const std::optional<reg::FitReport>& fit,
                            const AxisLabels& labels);

/// Median iteration count against n on a logarithmic n axis.
std::string iterations_svg(std::span<const Series> series, const AxisLabels& labels);

}  // namespace pfscale::cli
