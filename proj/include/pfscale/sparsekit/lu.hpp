#pragma once

#include <span>
#include <vector>

#include "pfscale/sparsekit/csc.hpp"
#include "pfscale/sparsekit/ordering.hpp"

namespace pfscale::sparse {

inline constexpr double kDefaultPivotTolerance = 1e-3;

struct LuOptions {
    /// Threshold partial pivoting: the diagonal is kept unless its magnitude
    /// is below pivot_tol times the largest candidate in its column.
    double pivot_tol = kDefaultPivotTolerance;
    /// Once a computed column of L fills at least this fraction of the
    /// remaining rows, the trailing block is finished as a dense LU with
    /// partial pivoting. Values above 1 disable the switch.
    double dense_switch_fill = 0.4;
    /// Smallest trailing block worth switching to dense.
    Index dense_switch_min = 512;
};

/// Raised when no acceptable pivot exists. `column()` is zero-based.
class SingularMatrixError : public SparseError {
  public:
    SingularMatrixError(Index column, bool structural);
    Index column() const { return column_; }
    bool structural() const { return structural_; }

  private:
    Index column_;
    bool structural_;
};

/// Factors with P_r A P_c^T = L U, where (P_r A P_c^T)(i, j) = A(row_perm[i], col_perm[j]).
/// L is unit lower triangular (diagonal stored), U upper triangular.
template <class T>
struct LuFactors {
    Index n = 0;
    SparseMatrix<T> L;
    SparseMatrix<T> U;
    std::vector<Index> row_perm;
    std::vector<Index> col_perm;

    /// First column finished by the dense kernel, or n when it never ran.
    Index dense_from = 0;

    Offset factor_nnz() const { return L.nnz() + U.nnz(); }
};

/// Left-looking sparse LU (Gilbert-Peierls). Columns are processed in the
/// order given by `ord`, applied symmetrically; within a column the diagonal
/// is kept as pivot unless its magnitude is below pivot_tol times the
/// largest candidate.
template <class T>
LuFactors<T> lu_factorize(const SparseMatrix<T>& a, const Ordering& ord,
                          const LuOptions& options);

template <class T>
LuFactors<T> lu_factorize(const SparseMatrix<T>& a, const Ordering& ord,
                          double pivot_tol = kDefaultPivotTolerance) {
    LuOptions options;
    options.pivot_tol = pivot_tol;
    return lu_factorize(a, ord, options);
}

template <class T>
std::vector<T> lu_solve(const LuFactors<T>& f, std::span<const T> b);

template <class T>
std::vector<std::vector<T>> lu_solve_multi(const LuFactors<T>& f,
                                           std::span<const std::vector<T>> rhs);

/// In-place variant used by the timed kernels; `work` is resized as needed.
template <class T>
void lu_solve_into(const LuFactors<T>& f, std::span<const T> b, std::span<T> x,
                   std::vector<T>& work);

}  // namespace pfscale::sparse
