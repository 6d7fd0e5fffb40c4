#include "pfscale/ybus/upsilon.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include <fmt/format.h>

#include "pfscale/common/rng.hpp"

namespace pfscale::ybus {

using sparse::Index;
using sparse::SparseError;
using sparse::SparseMatrix;
using sparse::Triplet;

std::int64_t UpsilonSpec::pair_count() const {
    return std::llround(static_cast<double>(n) * (3.0 * p - 1.0) / 2.0);
}

SparseMatrix<double> generate_upsilon(const UpsilonSpec& spec) {
    const Index n = spec.n;
    if (n < 2) {
        throw SparseError("upsilon: dimension must be at least 2");
    }
    const double d = spec.density();
    if (!(d > 0.0 && d < 1.0)) {
        throw SparseError(fmt::format("upsilon: density (3p-1)/n = {} outside (0, 1)", d));
    }
    if (!(spec.upsilon0_margin > 0.0)) {
        throw SparseError("upsilon: diagonal margin must be positive");
    }
    const std::int64_t pairs = spec.pair_count();
    const std::int64_t capacity = static_cast<std::int64_t>(n) * (n - 1) / 2;
    if (pairs > capacity) {
        throw SparseError("upsilon: more off-diagonal pairs requested than exist");
    }

    Rng rng(spec.seed);
    std::unordered_set<std::uint64_t> taken;
    taken.reserve(static_cast<std::size_t>(pairs) * 2);
    std::vector<Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(2 * pairs + n));
    std::vector<double> rowsum(static_cast<std::size_t>(n), 0.0);

    while (static_cast<std::int64_t>(taken.size()) < pairs) {
        auto i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        if (i == j) {
            continue;
        }
        if (i > j) {
            std::swap(i, j);
        }
        const std::uint64_t key = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + j;
        if (!taken.insert(key).second) {
            continue;
        }
        double v = 0.0;
        while (v == 0.0) {
            v = rng.uniform(-1.0, 1.0);
        }
        entries.push_back({i, j, v});
        entries.push_back({j, i, v});
        rowsum[i] += std::abs(v);
        rowsum[j] += std::abs(v);
    }

    const double shift = *std::max_element(rowsum.begin(), rowsum.end()) + spec.upsilon0_margin;
    for (Index i = 0; i < n; ++i) {
        entries.push_back({i, i, shift});
    }
    return SparseMatrix<double>::from_triplets(n, n, entries);
}

}  // namespace pfscale::ybus
