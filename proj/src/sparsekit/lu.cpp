#include "pfscale/sparsekit/lu.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace pfscale::sparse {

SingularMatrixError::SingularMatrixError(Index column, bool structural)
    : SparseError(fmt::format("{} singular matrix: no acceptable pivot at column {}",
                              structural ? "structurally" : "numerically", column + 1)),
      column_(column),
      structural_(structural) {}

namespace {

template <class T>
class GilbertPeierls {
  public:
    explicit GilbertPeierls(const SparseMatrix<T>& b)
        : b_(b),
          n_(b.cols()),
          x_(static_cast<std::size_t>(n_), T{}),
          xi_(static_cast<std::size_t>(n_)),
          stack_(static_cast<std::size_t>(n_)),
          pstack_(static_cast<std::size_t>(n_)),
          mark_(static_cast<std::size_t>(n_), -1),
          pinv_(static_cast<std::size_t>(n_), -1) {
        lp_.reserve(static_cast<std::size_t>(n_) + 1);
        up_.reserve(static_cast<std::size_t>(n_) + 1);
        const auto guess = static_cast<std::size_t>(2 * b.nnz() + n_);
        li_.reserve(guess);
        lx_.reserve(guess);
        ui_.reserve(guess);
        ux_.reserve(guess);
    }

    void factor(const LuOptions& options) {
        dense_from_ = n_;
        for (Index k = 0; k < n_; ++k) {
            lp_.push_back(static_cast<Offset>(li_.size()));
            up_.push_back(static_cast<Offset>(ui_.size()));
            const Index top = solve_column(k);

            Index ipiv = -1;
            double amax = -1.0;
            for (Index px = top; px < n_; ++px) {
                const Index i = xi_[px];
                if (pinv_[i] < 0) {
                    const double t = std::abs(x_[i]);
                    if (t > amax) {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    ui_.push_back(pinv_[i]);
                    ux_.push_back(x_[i]);
                }
            }
            if (ipiv < 0) {
                throw SingularMatrixError(k, true);
            }
            if (!(amax > 0.0)) {
                throw SingularMatrixError(k, false);
            }
            if (pinv_[k] < 0 && mark_[k] == k) {
                const double d = std::abs(x_[k]);
                if (d > 0.0 && d >= amax * options.pivot_tol) {
                    ipiv = k;
                }
            }

            const T pivot = x_[ipiv];
            ui_.push_back(k);
            ux_.push_back(pivot);
            pinv_[ipiv] = k;
            li_.push_back(ipiv);
            lx_.push_back(T{1});
            for (Index px = top; px < n_; ++px) {
                const Index i = xi_[px];
                if (pinv_[i] < 0) {
                    li_.push_back(i);
                    lx_.push_back(x_[i] / pivot);
                }
            }

            const Index remaining = n_ - k - 1;
            const auto below = static_cast<double>(li_.size() - lp_.back() - 1);
            if (remaining >= options.dense_switch_min &&
                below >= options.dense_switch_fill * remaining) {
                dense_tail(k + 1);
                break;
            }
        }
        if (dense_from_ == n_) {
            lp_.push_back(static_cast<Offset>(li_.size()));
            up_.push_back(static_cast<Offset>(ui_.size()));
        }
        for (auto& r : li_) {
            r = pinv_[r];
        }
    }

    Index dense_from() const { return dense_from_; }
    const std::vector<Index>& pinv() const { return pinv_; }

    SparseMatrix<T> take_l() { return finish(lp_, li_, lx_); }
    SparseMatrix<T> take_u() { return finish(up_, ui_, ux_); }

  private:
    // x = L \ B(:, k) restricted to the reach of B(:, k) in the graph of L.
    // Returns top; the reach is xi_[top..n) in topological order.
    Index solve_column(Index k) {
        const auto& bp = b_.colptr();
        const auto& bi = b_.rowidx();
        const auto& bx = b_.values();
        Index top = n_;
        for (Offset p = bp[k]; p < bp[k + 1]; ++p) {
            if (mark_[bi[p]] != k) {
                top = reach(bi[p], top, k);
            }
        }
        for (Index px = top; px < n_; ++px) {
            x_[xi_[px]] = T{};
        }
        for (Offset p = bp[k]; p < bp[k + 1]; ++p) {
            x_[bi[p]] = bx[p];
        }
        for (Index px = top; px < n_; ++px) {
            const Index j = xi_[px];
            const Index col = pinv_[j];
            if (col < 0) {
                continue;
            }
            const T xj = x_[j];
            for (Offset p = lp_[col] + 1; p < lp_[col + 1]; ++p) {
                x_[li_[p]] -= lx_[p] * xj;
            }
        }
        return top;
    }

    // Columns k0..n-1: the sparse solves against the first k0 columns of L
    // give the U rows above k0 and the dense Schur complement, which is then
    // factored with partial pivoting.
    void dense_tail(Index k0) {
        using Dense = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
        dense_from_ = k0;
        const Index s = n_ - k0;
        std::vector<Index> local(static_cast<std::size_t>(n_), -1);
        std::vector<Index> global(static_cast<std::size_t>(s));
        for (Index i = 0, r = 0; i < n_; ++i) {
            if (pinv_[i] < 0) {
                local[i] = r;
                global[r++] = i;
            }
        }

        Dense schur = Dense::Zero(s, s);
        std::vector<Offset> upper_ptr{0};
        std::vector<Index> upper_i;
        std::vector<T> upper_x;
        lp_.push_back(static_cast<Offset>(li_.size()));
        for (Index j = k0; j < n_; ++j) {
            const Index top = solve_column(j);
            for (Index px = top; px < n_; ++px) {
                const Index i = xi_[px];
                if (pinv_[i] >= 0) {
                    upper_i.push_back(pinv_[i]);
                    upper_x.push_back(x_[i]);
                } else {
                    schur(local[i], j - k0) = x_[i];
                }
            }
            upper_ptr.push_back(static_cast<Offset>(upper_i.size()));
        }

        Eigen::PartialPivLU<Eigen::Ref<Dense>> lu(schur);
        const auto& moved = lu.permutationP().indices();
        std::vector<Index> at_position(static_cast<std::size_t>(s));
        for (Index r = 0; r < s; ++r) {
            at_position[moved(r)] = global[r];
            pinv_[global[r]] = k0 + moved(r);
        }
        for (Index t = 0; t < s; ++t) {
            if (!(std::abs(schur(t, t)) > 0.0)) {
                throw SingularMatrixError(k0 + t, false);
            }
        }

        up_.push_back(static_cast<Offset>(ui_.size()));
        for (Index t = 0; t < s; ++t) {
            for (Offset p = upper_ptr[t]; p < upper_ptr[t + 1]; ++p) {
                ui_.push_back(upper_i[p]);
                ux_.push_back(upper_x[p]);
            }
            for (Index r = 0; r <= t; ++r) {
                ui_.push_back(k0 + r);
                ux_.push_back(schur(r, t));
            }
            li_.push_back(at_position[t]);
            lx_.push_back(T{1});
            for (Index r = t + 1; r < s; ++r) {
                li_.push_back(at_position[r]);
                lx_.push_back(schur(r, t));
            }
            lp_.push_back(static_cast<Offset>(li_.size()));
            up_.push_back(static_cast<Offset>(ui_.size()));
        }
    }

    // Depth-first search from j over the columns of L computed so far;
    // appends the finished nodes to xi_[top..n) in topological order.
    Index reach(Index j, Index top, Index k) {
        Index head = 0;
        stack_[0] = j;
        while (head >= 0) {
            j = stack_[head];
            const Index col = pinv_[j];
            if (mark_[j] != k) {
                mark_[j] = k;
                pstack_[head] = col < 0 ? 0 : lp_[col] + 1;
            }
            bool done = true;
            if (col >= 0) {
                const Offset end = lp_[col + 1];
                for (Offset p = pstack_[head]; p < end; ++p) {
                    const Index i = li_[p];
                    if (mark_[i] == k) {
                        continue;
                    }
                    pstack_[head] = p + 1;
                    stack_[++head] = i;
                    done = false;
                    break;
                }
            }
            if (done) {
                --head;
                xi_[--top] = j;
            }
        }
        return top;
    }

    SparseMatrix<T> finish(std::vector<Offset>& ptr, std::vector<Index>& idx,
                           std::vector<T>& val) {
        std::vector<std::pair<Index, T>> col;
        for (Index j = 0; j < n_; ++j) {
            const Offset lo = ptr[j];
            const Offset hi = ptr[j + 1];
            if (std::is_sorted(idx.begin() + lo, idx.begin() + hi)) {
                continue;
            }
            col.clear();
            for (Offset p = lo; p < hi; ++p) {
                col.emplace_back(idx[p], val[p]);
            }
            std::sort(col.begin(), col.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (Offset p = lo; p < hi; ++p) {
                idx[p] = col[p - lo].first;
                val[p] = col[p - lo].second;
            }
        }
        return SparseMatrix<T>(n_, n_, std::move(ptr), std::move(idx), std::move(val));
    }

    const SparseMatrix<T>& b_;
    Index n_;
    std::vector<T> x_;
    std::vector<Index> xi_;
    std::vector<Index> stack_;
    std::vector<Offset> pstack_;
    std::vector<Index> mark_;
    std::vector<Index> pinv_;
    Index dense_from_ = 0;
    std::vector<Offset> lp_, up_;
    std::vector<Index> li_, ui_;
    std::vector<T> lx_, ux_;
};

}  // namespace

template <class T>
LuFactors<T> lu_factorize(const SparseMatrix<T>& a, const Ordering& ord,
                          const LuOptions& options) {
    if (a.rows() != a.cols()) {
        throw SparseError(fmt::format("lu_factorize: matrix is {}x{}, not square", a.rows(),
                                      a.cols()));
    }
    const Index n = a.rows();
    if (!is_permutation(ord.perm, n)) {
        throw SparseError("lu_factorize: ordering is not a permutation of the matrix dimension");
    }
    const SparseMatrix<T> b = a.permute(ord.perm, ord.perm);
    GilbertPeierls<T> gp(b);
    gp.factor(options);

    LuFactors<T> f;
    f.n = n;
    f.row_perm.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        f.row_perm[gp.pinv()[i]] = ord.perm[i];
    }
    f.col_perm = ord.perm;
    f.dense_from = gp.dense_from();
    f.L = gp.take_l();
    f.U = gp.take_u();
    return f;
}

template <class T>
void lu_solve_into(const LuFactors<T>& f, std::span<const T> b, std::span<T> x,
                   std::vector<T>& work) {
    const Index n = f.n;
    if (b.size() != static_cast<std::size_t>(n) || x.size() != static_cast<std::size_t>(n)) {
        throw SparseError(fmt::format("lu_solve: right-hand side length {} != dimension {}",
                                      b.size(), n));
    }
    work.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        work[i] = b[f.row_perm[i]];
    }

    const auto& lp = f.L.colptr();
    const auto& li = f.L.rowidx();
    const auto& lx = f.L.values();
    for (Index j = 0; j < n; ++j) {
        const T cj = work[j];
        for (Offset p = lp[j] + 1; p < lp[j + 1]; ++p) {
            work[li[p]] -= lx[p] * cj;
        }
    }

    const auto& up = f.U.colptr();
    const auto& ui = f.U.rowidx();
    const auto& ux = f.U.values();
    for (Index j = n - 1; j >= 0; --j) {
        const Offset diag = up[j + 1] - 1;
        work[j] /= ux[diag];
        const T cj = work[j];
        for (Offset p = up[j]; p < diag; ++p) {
            work[ui[p]] -= ux[p] * cj;
        }
    }

    for (Index j = 0; j < n; ++j) {
        x[f.col_perm[j]] = work[j];
    }
}

template <class T>
std::vector<T> lu_solve(const LuFactors<T>& f, std::span<const T> b) {
    std::vector<T> x(b.size());
    std::vector<T> work;
    lu_solve_into<T>(f, b, x, work);
    return x;
}

template <class T>
std::vector<std::vector<T>> lu_solve_multi(const LuFactors<T>& f,
                                           std::span<const std::vector<T>> rhs) {
    std::vector<std::vector<T>> out;
    out.reserve(rhs.size());
    std::vector<T> work;
    for (const auto& b : rhs) {
        std::vector<T> x(b.size());
        lu_solve_into<T>(f, b, x, work);
        out.push_back(std::move(x));
    }
    return out;
}

#define PFSCALE_INSTANTIATE_LU(T)                                                         \
    template LuFactors<T> lu_factorize(const SparseMatrix<T>&, const Ordering&,             \
                                      const LuOptions&);                                 \
    template std::vector<T> lu_solve(const LuFactors<T>&, std::span<const T>);           \
    template std::vector<std::vector<T>> lu_solve_multi(const LuFactors<T>&,             \
                                                        std::span<const std::vector<T>>); \
    template void lu_solve_into(const LuFactors<T>&, std::span<const T>, std::span<T>,   \
                                std::vector<T>&);

PFSCALE_INSTANTIATE_LU(double)
PFSCALE_INSTANTIATE_LU(Complex)

#undef PFSCALE_INSTANTIATE_LU

}  // namespace pfscale::sparse
