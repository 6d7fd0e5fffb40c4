#pragma once

#include <cstdint>

#include "pfscale/sparsekit/csc.hpp"

namespace pfscale::ybus {

/// Random symmetric, strictly diagonally dominant contrast matrix with the
/// same size and roughly the same density as a bus admittance matrix.
struct UpsilonSpec {
    sparse::Index n = 0;
    double p = 2.0;  // equivalent phases per branch, in [1, 3]
    std::uint64_t seed = 1;
    double upsilon0_margin = 1.0;

    double density() const { return (3.0 * p - 1.0) / static_cast<double>(n); }
    /// Unordered off-diagonal pairs drawn: round(n (3p - 1) / 2).
    std::int64_t pair_count() const;
};

/// Off-diagonal values uniform on [-1, 1] at distinct random positions of the
/// strict upper triangle, mirrored; diagonal set to
/// max_i sum_{j != i} |U_ij| + margin. nnz = 2 * pair_count() + n.
sparse::SparseMatrix<double> generate_upsilon(const UpsilonSpec& spec);

}  // namespace pfscale::ybus
