#include "pfscale/regression/medians.hpp"

#include <map>

#include <fmt/format.h>

namespace pfscale::reg {

std::vector<CaseMedian> median_per_case(std::span<const bench::BenchSample> samples) {
    struct Group {
        CaseMedian head;
        std::vector<double> t;
        std::vector<double> it;
    };
    std::vector<Group> groups;
    std::map<std::string, std::size_t> index;
    for (const bench::BenchSample& s : samples) {
        if (s.failed) {
            continue;
        }
        auto [it, inserted] = index.try_emplace(s.case_id, groups.size());
        if (inserted) {
            groups.push_back({{s.case_id, s.subject, s.n, 0.0, 0.0, 0}, {}, {}});
        }
        Group& g = groups[it->second];
        if (g.head.n != s.n || g.head.subject != s.subject) {
            throw RegressionError(
                fmt::format("case '{}' mixes sizes or subjects across samples", s.case_id));
        }
        const double iters = std::max(s.iterations, 1);
        g.t.push_back(bench::per_iteration(s.subject) ? s.t_seconds / iters : s.t_seconds);
        g.it.push_back(iters);
    }
    std::vector<CaseMedian> out;
    out.reserve(groups.size());
    for (Group& g : groups) {
        g.head.runs = static_cast<int>(g.t.size());
        g.head.t_median = lower_median(std::move(g.t));
        g.head.iterations_median = lower_median(std::move(g.it));
        out.push_back(std::move(g.head));
    }
    return out;
}

std::vector<Point> to_points(std::span<const CaseMedian> medians) {
    std::vector<Point> pts;
    pts.reserve(medians.size());
    for (const CaseMedian& m : medians) {
        pts.push_back({static_cast<double>(m.n), m.t_median});
    }
    return pts;
}

}  // namespace pfscale::reg
