#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "pfscale/common/rng.hpp"
#include "pfscale/sparsekit/csc.hpp"

namespace testing {

using pfscale::Rng;
using pfscale::sparse::Complex;
using pfscale::sparse::Index;
using pfscale::sparse::SparseMatrix;
using pfscale::sparse::Triplet;

inline std::filesystem::path fixture(const char* name) {
    return std::filesystem::path(PFSCALE_FIXTURE_DIR) / name;
}

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(Complex x) { return std::abs(x); }

template <class T>
T draw(Rng& rng);
template <>
inline double draw<double>(Rng& rng) {
    return rng.uniform(-1.0, 1.0);
}
template <>
inline Complex draw<Complex>(Rng& rng) {
    const double re = rng.uniform(-1.0, 1.0);
    return {re, rng.uniform(-1.0, 1.0)};
}

/// Random pattern with about `per_row` off-diagonal entries per row and a
/// diagonal that dominates by `margin` (negative margin: no dominance).
template <class T>
SparseMatrix<T> random_matrix(Index n, int per_row, Rng& rng, double margin = 1.0,
                              bool symmetric_pattern = false) {
    std::vector<Triplet<T>> trips;
    std::vector<double> row_sum(n, 0.0);
    for (Index i = 0; i < n; ++i) {
        for (int k = 0; k < per_row; ++k) {
            const auto j = static_cast<Index>(rng.below(n));
            if (j == i) {
                continue;
            }
            const T v = draw<T>(rng);
            trips.push_back({i, j, v});
            row_sum[i] += magnitude(v);
            if (symmetric_pattern) {
                const T w = draw<T>(rng);
                trips.push_back({j, i, w});
                row_sum[j] += magnitude(w);
            }
        }
    }
    for (Index i = 0; i < n; ++i) {
        // duplicates may sum, so the row sum is an upper bound
        trips.push_back({i, i, T(margin >= 0 ? row_sum[i] + margin + 0.5 : 0.5 + rng.uniform())});
    }
    return SparseMatrix<T>::from_triplets(n, n, trips);
}

/// Gaussian elimination with partial pivoting on a dense row-major copy.
template <class T>
std::vector<T> dense_solve(std::vector<T> a, std::vector<T> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (magnitude(a[r * n + c]) > magnitude(a[piv * n + c])) {
                piv = r;
            }
        }
        if (magnitude(a[piv * n + c]) == 0.0) {
            throw std::runtime_error("dense_solve: singular");
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::swap(a[c * n + k], a[piv * n + k]);
        }
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const T f = a[r * n + c] / a[c * n + c];
            if (f == T(0)) {
                continue;
            }
            for (std::size_t k = c; k < n; ++k) {
                a[r * n + k] -= f * a[c * n + k];
            }
            b[r] -= f * b[c];
        }
    }
    std::vector<T> x(n);
    for (std::size_t i = n; i-- > 0;) {
        T acc = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            acc -= a[i * n + k] * x[k];
        }
        x[i] = acc / a[i * n + i];
    }
    return x;
}

template <class T>
double max_abs_diff(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) {
        return INFINITY;
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, magnitude(a[i] - b[i]));
    }
    return d;
}

template <class T>
double max_abs(const std::vector<T>& a) {
    double d = 0.0;
    for (const T& v : a) {
        d = std::max(d, magnitude(v));
    }
    return d;
}

}  // namespace testing
