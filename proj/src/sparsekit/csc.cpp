#include "pfscale/sparsekit/csc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace pfscale::sparse {

template <class T>
SparseMatrix<T>::SparseMatrix(Index nrows, Index ncols)
    : nrows_(nrows), ncols_(ncols), colptr_(static_cast<std::size_t>(ncols) + 1, 0) {
    if (nrows < 0 || ncols < 0) {
        throw SparseError("negative matrix dimension");
    }
}

template <class T>
SparseMatrix<T>::SparseMatrix(Index nrows, Index ncols, std::vector<Offset> colptr,
                              std::vector<Index> rowidx, std::vector<T> values)
    : nrows_(nrows),
      ncols_(ncols),
      colptr_(std::move(colptr)),
      rowidx_(std::move(rowidx)),
      values_(std::move(values)) {
    check_canonical();
}

template <class T>
void SparseMatrix<T>::check_canonical() const {
    if (nrows_ < 0 || ncols_ < 0) {
        throw SparseError("negative matrix dimension");
    }
    if (colptr_.size() != static_cast<std::size_t>(ncols_) + 1 || colptr_.front() != 0 ||
        colptr_.back() != static_cast<Offset>(rowidx_.size()) ||
        rowidx_.size() != values_.size()) {
        throw SparseError("inconsistent CSC array lengths");
    }
    for (Index j = 0; j < ncols_; ++j) {
        if (colptr_[j + 1] < colptr_[j]) {
            throw SparseError(fmt::format("colptr decreases at column {}", j));
        }
        for (Offset p = colptr_[j]; p < colptr_[j + 1]; ++p) {
            const Index i = rowidx_[p];
            if (i < 0 || i >= nrows_) {
                throw SparseError(fmt::format("row index {} out of range in column {}", i, j));
            }
            if (p > colptr_[j] && rowidx_[p - 1] >= i) {
                throw SparseError(fmt::format("column {} rows not strictly increasing", j));
            }
        }
    }
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::from_triplets(Index nrows, Index ncols,
                                               std::span<const Triplet<T>> entries) {
    SparseMatrix m(nrows, ncols);
    std::vector<Offset> count(static_cast<std::size_t>(ncols) + 1, 0);
    for (const auto& e : entries) {
        if (e.row < 0 || e.row >= nrows || e.col < 0 || e.col >= ncols) {
            throw SparseError(fmt::format("triplet ({}, {}) out of range for {}x{} matrix",
                                          e.row, e.col, nrows, ncols));
        }
        ++count[e.col + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());

    // bucket by column, then sort each column by row and merge duplicates
    std::vector<std::pair<Index, T>> bucket(entries.size());
    std::vector<Offset> next(count.begin(), count.end() - 1);
    for (const auto& e : entries) {
        bucket[next[e.col]++] = {e.row, e.value};
    }

    m.rowidx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (Index j = 0; j < ncols; ++j) {
        auto first = bucket.begin() + count[j];
        auto last = bucket.begin() + count[j + 1];
        std::stable_sort(first, last,
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last;) {
            const Index row = it->first;
            T sum{};
            for (; it != last && it->first == row; ++it) {
                sum += it->second;
            }
            if (sum != T{}) {
                m.rowidx_.push_back(row);
                m.values_.push_back(sum);
            }
        }
        m.colptr_[j + 1] = static_cast<Offset>(m.rowidx_.size());
    }
    return m;
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::identity(Index n) {
    std::vector<T> ones(static_cast<std::size_t>(n), T{1});
    return diagonal(ones);
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::diagonal(std::span<const T> diag) {
    const auto n = static_cast<Index>(diag.size());
    SparseMatrix m(n, n);
    for (Index j = 0; j < n; ++j) {
        if (diag[j] != T{}) {
            m.rowidx_.push_back(j);
            m.values_.push_back(diag[j]);
        }
        m.colptr_[j + 1] = static_cast<Offset>(m.rowidx_.size());
    }
    return m;
}

template <class T>
T SparseMatrix<T>::at(Index i, Index j) const {
    if (i < 0 || i >= nrows_ || j < 0 || j >= ncols_) {
        throw SparseError(fmt::format("index ({}, {}) out of range", i, j));
    }
    const auto first = rowidx_.begin() + colptr_[j];
    const auto last = rowidx_.begin() + colptr_[j + 1];
    const auto it = std::lower_bound(first, last, i);
    if (it != last && *it == i) {
        return values_[static_cast<std::size_t>(it - rowidx_.begin())];
    }
    return T{};
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::transpose() const {
    SparseMatrix t(ncols_, nrows_);
    std::vector<Offset> next(static_cast<std::size_t>(nrows_) + 1, 0);
    for (const Index i : rowidx_) {
        ++next[i + 1];
    }
    std::partial_sum(next.begin(), next.end(), next.begin());
    t.colptr_ = next;
    t.rowidx_.resize(rowidx_.size());
    t.values_.resize(values_.size());
    for (Index j = 0; j < ncols_; ++j) {
        for (Offset p = colptr_[j]; p < colptr_[j + 1]; ++p) {
            const Offset q = next[rowidx_[p]]++;
            t.rowidx_[q] = j;
            t.values_[q] = values_[p];
        }
    }
    return t;
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::permute(std::span<const Index> rows,
                                         std::span<const Index> cols) const {
    if (rows.size() != static_cast<std::size_t>(nrows_) ||
        cols.size() != static_cast<std::size_t>(ncols_)) {
        throw SparseError("permutation length does not match matrix dimension");
    }
    std::vector<Index> rinv(static_cast<std::size_t>(nrows_), -1);
    for (Index i = 0; i < nrows_; ++i) {
        rinv[rows[i]] = i;
    }
    SparseMatrix b(nrows_, ncols_);
    b.rowidx_.reserve(rowidx_.size());
    b.values_.reserve(values_.size());
    std::vector<std::pair<Index, T>> col;
    for (Index j = 0; j < ncols_; ++j) {
        const Index src = cols[j];
        col.clear();
        for (Offset p = colptr_[src]; p < colptr_[src + 1]; ++p) {
            col.emplace_back(rinv[rowidx_[p]], values_[p]);
        }
        std::sort(col.begin(), col.end(),
                  [](const auto& a, const auto& c) { return a.first < c.first; });
        for (const auto& [r, v] : col) {
            b.rowidx_.push_back(r);
            b.values_.push_back(v);
        }
        b.colptr_[j + 1] = static_cast<Offset>(b.rowidx_.size());
    }
    return b;
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::block(Index r0, Index r1, Index c0, Index c1) const {
    if (r0 < 0 || r1 > nrows_ || r0 > r1 || c0 < 0 || c1 > ncols_ || c0 > c1) {
        throw SparseError("block bounds out of range");
    }
    SparseMatrix b(r1 - r0, c1 - c0);
    for (Index j = c0; j < c1; ++j) {
        for (Offset p = colptr_[j]; p < colptr_[j + 1]; ++p) {
            if (rowidx_[p] >= r0 && rowidx_[p] < r1) {
                b.rowidx_.push_back(rowidx_[p] - r0);
                b.values_.push_back(values_[p]);
            }
        }
        b.colptr_[j - c0 + 1] = static_cast<Offset>(b.rowidx_.size());
    }
    return b;
}

template <class T>
std::vector<T> SparseMatrix<T>::multiply(std::span<const T> x) const {
    if (x.size() != static_cast<std::size_t>(ncols_)) {
        throw SparseError(fmt::format("multiply: vector length {} != {} columns", x.size(),
                                      ncols_));
    }
    std::vector<T> y(static_cast<std::size_t>(nrows_), T{});
    for (Index j = 0; j < ncols_; ++j) {
        const T xj = x[j];
        for (Offset p = colptr_[j]; p < colptr_[j + 1]; ++p) {
            y[rowidx_[p]] += values_[p] * xj;
        }
    }
    return y;
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::add(const SparseMatrix& other) const {
    if (other.nrows_ != nrows_ || other.ncols_ != ncols_) {
        throw SparseError(fmt::format("add: {}x{} and {}x{} differ in shape", nrows_, ncols_,
                                      other.nrows_, other.ncols_));
    }
    SparseMatrix out(nrows_, ncols_);
    out.rowidx_.reserve(rowidx_.size() + other.rowidx_.size());
    out.values_.reserve(rowidx_.size() + other.rowidx_.size());
    const auto emit = [&](Index i, T v) {
        if (v != T{}) {
            out.rowidx_.push_back(i);
            out.values_.push_back(v);
        }
    };
    for (Index j = 0; j < ncols_; ++j) {
        Offset p = colptr_[j];
        Offset q = other.colptr_[j];
        while (p < colptr_[j + 1] || q < other.colptr_[j + 1]) {
            if (q == other.colptr_[j + 1] || (p < colptr_[j + 1] && rowidx_[p] < other.rowidx_[q])) {
                emit(rowidx_[p], values_[p]);
                ++p;
            } else if (p == colptr_[j + 1] || other.rowidx_[q] < rowidx_[p]) {
                emit(other.rowidx_[q], other.values_[q]);
                ++q;
            } else {
                emit(rowidx_[p], values_[p] + other.values_[q]);
                ++p;
                ++q;
            }
        }
        out.colptr_[j + 1] = static_cast<Offset>(out.rowidx_.size());
    }
    return out;
}

template <class T>
double SparseMatrix<T>::norm_inf() const {
    std::vector<double> rowsum(static_cast<std::size_t>(nrows_), 0.0);
    for (std::size_t p = 0; p < rowidx_.size(); ++p) {
        rowsum[rowidx_[p]] += std::abs(values_[p]);
    }
    return rowsum.empty() ? 0.0 : *std::max_element(rowsum.begin(), rowsum.end());
}

template <class T>
bool SparseMatrix<T>::is_symmetric() const {
    return nrows_ == ncols_ && transpose() == *this;
}

template <class T>
std::vector<T> SparseMatrix<T>::to_dense() const {
    std::vector<T> d(static_cast<std::size_t>(nrows_) * static_cast<std::size_t>(ncols_), T{});
    for (Index j = 0; j < ncols_; ++j) {
        for (Offset p = colptr_[j]; p < colptr_[j + 1]; ++p) {
            d[static_cast<std::size_t>(rowidx_[p]) * ncols_ + j] = values_[p];
        }
    }
    return d;
}

SparseMatrix<Complex> to_complex(const SparseMatrix<double>& m) {
    std::vector<Complex> values(m.values().begin(), m.values().end());
    return {m.rows(), m.cols(), m.colptr(), m.rowidx(), std::move(values)};
}

template class SparseMatrix<double>;
template class SparseMatrix<Complex>;

}  // namespace pfscale::sparse
