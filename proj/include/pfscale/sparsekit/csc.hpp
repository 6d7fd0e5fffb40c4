#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfscale::sparse {

using Index = std::int32_t;
using Offset = std::int64_t;
using Complex = std::complex<double>;

class SparseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

template <class T>
struct Triplet {
    Index row;
    Index col;
    T value;
};

/// Compressed sparse column matrix in canonical form: rows strictly
/// increasing within each column, no explicitly stored zeros.
///
/// Instantiated for `double` and `std::complex<double>`.
template <class T>
class SparseMatrix {
  public:
    using value_type = T;

    SparseMatrix() = default;
    SparseMatrix(Index nrows, Index ncols);

    /// Adopts raw CSC arrays. Throws SparseError if they are not canonical.
    SparseMatrix(Index nrows, Index ncols, std::vector<Offset> colptr,
                 std::vector<Index> rowidx, std::vector<T> values);

    /// Sums duplicates, sorts rows and drops entries whose sum is exactly zero.
    static SparseMatrix from_triplets(Index nrows, Index ncols,
                                      std::span<const Triplet<T>> entries);
    static SparseMatrix identity(Index n);
    static SparseMatrix diagonal(std::span<const T> diag);

    Index rows() const { return nrows_; }
    Index cols() const { return ncols_; }
    Offset nnz() const { return static_cast<Offset>(rowidx_.size()); }

    const std::vector<Offset>& colptr() const { return colptr_; }
    const std::vector<Index>& rowidx() const { return rowidx_; }
    const std::vector<T>& values() const { return values_; }
    std::vector<T>& values() { return values_; }

    /// Entry (i, j), or zero when not stored.
    T at(Index i, Index j) const;

    SparseMatrix transpose() const;

    /// Returns B with B(i, j) = A(rows[i], cols[j]).
    SparseMatrix permute(std::span<const Index> rows,
                         std::span<const Index> cols) const;

    /// Contiguous block [r0, r1) x [c0, c1).
    SparseMatrix block(Index r0, Index r1, Index c0, Index c1) const;

    std::vector<T> multiply(std::span<const T> x) const;

    /// A + B; entries that cancel exactly are dropped.
    SparseMatrix add(const SparseMatrix& other) const;

    double norm_inf() const;
    bool is_symmetric() const;

    /// Row-major dense copy. Test and debugging helper.
    std::vector<T> to_dense() const;

    bool operator==(const SparseMatrix&) const = default;

  private:
    void check_canonical() const;

    Index nrows_ = 0;
    Index ncols_ = 0;
    std::vector<Offset> colptr_{0};
    std::vector<Index> rowidx_;
    std::vector<T> values_;
};

template <class T>
Offset nnz(const SparseMatrix<T>& m) {
    return m.nnz();
}

/// Real matrix embedded as complex.
SparseMatrix<Complex> to_complex(const SparseMatrix<double>& m);

extern template class SparseMatrix<double>;
extern template class SparseMatrix<Complex>;

}  // namespace pfscale::sparse
