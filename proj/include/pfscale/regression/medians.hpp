#pragma once

#include <span>
#include <string>
#include <vector>

#include "pfscale/bench/sample.hpp"
#include "pfscale/regression/fit.hpp"

namespace pfscale::reg {

struct CaseMedian {
    std::string case_id;
    bench::Subject subject = bench::Subject::YbusSolve;
    std::int64_t n = 0;
    double t_median = 0.0;  // per iteration for per-iteration subjects
    double iterations_median = 0.0;
    int runs = 0;
};

/// Per-case lower medians of t (each sample divided by its iteration count
/// first for per-iteration subjects) and of the iteration count. Failed
/// rows are skipped; cases keep their first-appearance order.
std::vector<CaseMedian> median_per_case(std::span<const bench::BenchSample> samples);

std::vector<Point> to_points(std::span<const CaseMedian> medians);

}  // namespace pfscale::reg
