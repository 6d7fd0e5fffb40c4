#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "pfscale/sparsekit/csc.hpp"
#include "pfscale/sparsekit/lu.hpp"
#include "pfscale/sparsekit/matrix_io.hpp"
#include "pfscale/sparsekit/ordering.hpp"
#include "support.hpp"

using namespace pfscale::sparse;
using testing::max_abs;
using testing::max_abs_diff;
using testing::random_matrix;
using pfscale::Rng;

namespace {

using RMatrix = SparseMatrix<double>;
using CMatrix = SparseMatrix<Complex>;

RMatrix tridiagonal(Index n) {
    std::vector<Triplet<double>> t;
    for (Index i = 0; i < n; ++i) {
        t.push_back({i, i, 4.0});
        if (i + 1 < n) {
            t.push_back({i, i + 1, -1.0});
            t.push_back({i + 1, i, -1.0});
        }
    }
    return RMatrix::from_triplets(n, n, t);
}

RMatrix star(Index n, Index hub) {
    std::vector<Triplet<double>> t;
    for (Index i = 0; i < n; ++i) {
        t.push_back({i, i, static_cast<double>(n)});
        if (i != hub) {
            t.push_back({i, hub, 1.0});
            t.push_back({hub, i, 1.0});
        }
    }
    return RMatrix::from_triplets(n, n, t);
}

// Fill edges created by eliminating g's vertices in the given order.
int symbolic_fill(const PatternGraph& g, const std::vector<Index>& perm) {
    const Index n = g.n;
    std::vector<std::set<Index>> adj(n);
    for (Index v = 0; v < n; ++v) {
        for (const Index w : g.neighbours(v)) {
            adj[v].insert(w);
        }
    }
    std::vector<char> gone(n, 0);
    int fill = 0;
    for (const Index v : perm) {
        std::vector<Index> nb;
        for (const Index w : adj[v]) {
            if (!gone[w]) {
                nb.push_back(w);
            }
        }
        for (std::size_t a = 0; a < nb.size(); ++a) {
            for (std::size_t b = a + 1; b < nb.size(); ++b) {
                if (adj[nb[a]].insert(nb[b]).second) {
                    adj[nb[b]].insert(nb[a]);
                    ++fill;
                }
            }
        }
        gone[v] = 1;
    }
    return fill;
}

// max |P_r A P_c^T - L U| over all entries, dense.
template <class T>
double reconstruction_error(const SparseMatrix<T>& a, const LuFactors<T>& f) {
    const SparseMatrix<T> pa = a.permute(f.row_perm, f.col_perm);
    const auto dl = f.L.to_dense();
    const auto du = f.U.to_dense();
    const auto dp = pa.to_dense();
    const std::size_t n = static_cast<std::size_t>(f.n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            T acc{};
            for (std::size_t k = 0; k <= std::min(i, j); ++k) {
                acc += dl[i * n + k] * du[k * n + j];
            }
            err = std::max(err, testing::magnitude(acc - dp[i * n + j]));
        }
    }
    return err;
}

template <class T>
double relative_residual(const SparseMatrix<T>& a, const std::vector<T>& x,
                         const std::vector<T>& b) {
    auto ax = a.multiply(x);
    for (std::size_t i = 0; i < ax.size(); ++i) {
        ax[i] -= b[i];
    }
    return max_abs(ax) / (a.norm_inf() * max_abs(x) + max_abs(b));
}

template <class T>
std::vector<T> random_vector(Index n, Rng& rng) {
    std::vector<T> v(static_cast<std::size_t>(n));
    for (auto& x : v) {
        x = testing::draw<T>(rng);
    }
    return v;
}

}  // namespace

TEST_SUITE("sparsekit") {

TEST_CASE("from_triplets sums duplicates") {
    const std::vector<Triplet<double>> t{{0, 0, 1.0}, {0, 0, 2.0}};
    const auto m = RMatrix::from_triplets(1, 1, t);
    CHECK(m.nnz() == 1);
    CHECK(m.values()[0] == 3.0);
}

TEST_CASE("from_triplets on an empty list") {
    const auto m = RMatrix::from_triplets(3, 3, std::vector<Triplet<double>>{});
    CHECK(m.nnz() == 0);
    CHECK(m.colptr() == std::vector<Offset>{0, 0, 0, 0});
}

TEST_CASE("identity entries give canonical arrays") {
    const std::vector<Triplet<double>> t{{1, 1, 1.0}, {0, 0, 1.0}};
    const auto m = RMatrix::from_triplets(2, 2, t);
    CHECK(m.colptr() == std::vector<Offset>{0, 1, 2});
    CHECK(m.rowidx() == std::vector<Index>{0, 1});
    CHECK(m == RMatrix::identity(2));
    CHECK(nnz(RMatrix::identity(5)) == 5);
}

TEST_CASE("from_triplets drops cancelled entries and rejects bad indices") {
    const std::vector<Triplet<double>> t{{0, 1, 2.0}, {1, 0, 1.0}, {0, 1, -2.0}};
    const auto m = RMatrix::from_triplets(2, 2, t);
    CHECK(m.nnz() == 1);
    CHECK(m.at(0, 1) == 0.0);
    CHECK(m.at(1, 0) == 1.0);
    const std::vector<Triplet<double>> bad{{2, 0, 1.0}};
    CHECK_THROWS_AS(RMatrix::from_triplets(2, 2, bad), SparseError);
    const std::vector<Triplet<double>> neg{{0, -1, 1.0}};
    CHECK_THROWS_AS(RMatrix::from_triplets(2, 2, neg), SparseError);
}

TEST_CASE("canonical form holds for random assemblies") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<Index>(1 + rng.below(40));
        std::vector<Triplet<double>> t;
        const auto count = rng.below(200);
        for (std::uint64_t k = 0; k < count; ++k) {
            // small value set so that exact cancellations happen
            const double v = static_cast<double>(static_cast<int>(rng.below(5)) - 2);
            t.push_back({static_cast<Index>(rng.below(n)), static_cast<Index>(rng.below(n)), v});
        }
        const auto m = RMatrix::from_triplets(n, n, t);
        const auto& cp = m.colptr();
        REQUIRE(cp.front() == 0);
        REQUIRE(cp.back() == m.nnz());
        for (Index j = 0; j < n; ++j) {
            REQUIRE(cp[j] <= cp[j + 1]);
            for (Offset p = cp[j] + 1; p < cp[j + 1]; ++p) {
                REQUIRE(m.rowidx()[p - 1] < m.rowidx()[p]);
            }
        }
        for (const double v : m.values()) {
            REQUIRE(v != 0.0);
        }
        // dense accumulation oracle
        std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
        for (const auto& e : t) {
            dense[static_cast<std::size_t>(e.row) * n + e.col] += e.value;
        }
        CHECK(m.to_dense() == dense);
    }
}

TEST_CASE("raw CSC constructor validates") {
    CHECK_THROWS_AS(RMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), SparseError);
    CHECK_THROWS_AS(RMatrix(2, 2, {0, 1, 2}, {0, 2}, {1.0, 1.0}), SparseError);
    CHECK_NOTHROW(RMatrix(2, 2, {0, 1, 2}, {0, 1}, {1.0, 1.0}));
}

TEST_CASE("transpose, permute, block, add") {
    const std::vector<Triplet<double>> t{{0, 1, 2.0}, {2, 0, 3.0}, {1, 1, 5.0}};
    const auto m = RMatrix::from_triplets(3, 3, t);
    const auto mt = m.transpose();
    CHECK(mt.at(1, 0) == 2.0);
    CHECK(mt.at(0, 2) == 3.0);
    CHECK(mt.transpose() == m);

    const std::vector<Index> rows{2, 0, 1};
    const std::vector<Index> cols{1, 2, 0};
    const auto pm = m.permute(rows, cols);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
            CHECK(pm.at(i, j) == m.at(rows[i], cols[j]));
        }
    }
    const auto b = m.block(1, 3, 0, 2);
    CHECK(b.rows() == 2);
    CHECK(b.cols() == 2);
    CHECK(b.at(1, 0) == 3.0);
    CHECK(b.at(0, 1) == 5.0);

    const std::vector<Triplet<double>> u{{0, 1, -2.0}, {0, 0, 1.0}};
    const auto s = m.add(RMatrix::from_triplets(3, 3, u));
    CHECK(s.nnz() == 3);
    CHECK(s.at(0, 1) == 0.0);
    CHECK(s.at(0, 0) == 1.0);
    CHECK_THROWS_AS(m.add(RMatrix::identity(2)), SparseError);
}

TEST_CASE("multiply matches the dense product") {
    Rng rng(3);
    const auto a = random_matrix<Complex>(30, 3, rng);
    const auto x = random_vector<Complex>(30, rng);
    const auto y = a.multiply(x);
    const auto d = a.to_dense();
    for (std::size_t i = 0; i < 30; ++i) {
        Complex acc{};
        for (std::size_t j = 0; j < 30; ++j) {
            acc += d[i * 30 + j] * x[j];
        }
        CHECK(std::abs(acc - y[i]) < 1e-13);
    }
    CHECK_THROWS_AS(a.multiply(std::vector<Complex>(3)), SparseError);
}

TEST_CASE("natural ordering is the identity") {
    const auto m = RMatrix::identity(4);
    for (const auto kind : {OrderingKind::Natural, OrderingKind::MinimumDegree,
                            OrderingKind::LeafFirstTree}) {
        const auto o = order(m, kind);
        CHECK(is_permutation(o.perm, 4));
        CHECK(o.kind == kind);
    }
    CHECK(order(m, OrderingKind::Natural).perm == std::vector<Index>{0, 1, 2, 3});
}

TEST_CASE("leaf-first puts path endpoints before the midpoint") {
    const auto o = order(tridiagonal(3), OrderingKind::LeafFirstTree);
    CHECK(o.perm.back() == 1);
}

TEST_CASE("leaf-first refuses a cycle") {
    std::vector<Triplet<double>> t;
    for (Index i = 0; i < 3; ++i) {
        t.push_back({i, i, 3.0});
        t.push_back({i, (i + 1) % 3, 1.0});
    }
    const auto m = RMatrix::from_triplets(3, 3, t);
    CHECK_FALSE(is_forest(pattern_graph(m)));
    CHECK_THROWS_WITH_AS(order(m, OrderingKind::LeafFirstTree), doctest::Contains("not a forest"),
                         SparseError);
    CHECK(default_ordering(m).kind == OrderingKind::MinimumDegree);
    CHECK(default_ordering(tridiagonal(5)).kind == OrderingKind::LeafFirstTree);
}

TEST_CASE("minimum degree on a star eliminates the hub last with optimal fill") {
    for (Index n = 3; n <= 6; ++n) {
        for (Index hub = 0; hub < n; ++hub) {
            const auto m = star(n, hub);
            const PatternGraph g = pattern_graph(m);
            std::vector<Index> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            int best = 1 << 30;
            do {
                best = std::min(best, symbolic_fill(g, perm));
            } while (std::next_permutation(perm.begin(), perm.end()));
            const auto o = order(m, OrderingKind::MinimumDegree);
            CAPTURE(n);
            CAPTURE(hub);
            CHECK(symbolic_fill(g, o.perm) == best);
            CHECK(o.perm.back() == hub);
        }
    }
}

TEST_CASE("orderings are permutations on random patterns") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto n = static_cast<Index>(1 + rng.below(120));
        const auto m = random_matrix<double>(n, 1 + static_cast<int>(rng.below(4)), rng);
        const auto g = pattern_graph(m);
        CHECK(is_permutation(order(g, OrderingKind::MinimumDegree).perm, n));
        CHECK(is_permutation(default_ordering(m).perm, n));
    }
    CHECK_FALSE(is_permutation(std::vector<Index>{0, 0, 1}, 3));
    CHECK_FALSE(is_permutation(std::vector<Index>{0, 1}, 3));
    CHECK_FALSE(is_permutation(std::vector<Index>{0, 3, 1}, 3));
}

TEST_CASE("identity factors with zero fill") {
    const auto a = RMatrix::identity(4);
    const auto f = lu_factorize(a, order(a, OrderingKind::Natural));
    CHECK(f.L == RMatrix::identity(4));
    CHECK(f.U == RMatrix::identity(4));
    CHECK(f.factor_nnz() == a.nnz() + 4);
}

TEST_CASE("tridiagonal with leaf-first order has no fill beyond the pattern") {
    for (const Index n : {2, 5, 17, 50}) {
        const auto a = tridiagonal(n);
        const auto f = lu_factorize(a, order(a, OrderingKind::LeafFirstTree), 0.0);
        CHECK(f.factor_nnz() == a.nnz() + n);
        CHECK(reconstruction_error(a, f) <= 1e-12 * a.norm_inf());
        // factor patterns agree with the pattern of dense elimination
        const auto pa = a.permute(f.row_perm, f.col_perm).to_dense();
        const std::size_t m = static_cast<std::size_t>(n);
        std::vector<double> w = pa;
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t i = k + 1; i < m; ++i) {
                const double l = w[i * m + k] / w[k * m + k];
                for (std::size_t j = k + 1; j < m; ++j) {
                    w[i * m + j] -= l * w[k * m + j];
                }
            }
        }
        std::size_t dense_nnz = m;  // unit diagonal of L
        for (const double v : w) {
            dense_nnz += v != 0.0;
        }
        CHECK(static_cast<Offset>(dense_nnz) == f.factor_nnz());
    }
}

TEST_CASE("random forests factor with zero fill") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const auto n = static_cast<Index>(2 + rng.below(300));
        std::vector<Triplet<Complex>> t;
        for (Index v = 0; v < n; ++v) {
            t.push_back({v, v, Complex(10.0, 1.0)});
            // roughly one in ten vertices starts a new tree
            if (v > 0 && rng.below(10) != 0) {
                const auto parent = static_cast<Index>(rng.below(v));
                t.push_back({v, parent, testing::draw<Complex>(rng)});
                t.push_back({parent, v, testing::draw<Complex>(rng)});
            }
        }
        const auto a = CMatrix::from_triplets(n, n, t);
        REQUIRE(is_forest(pattern_graph(a)));
        const auto f = lu_factorize(a, default_ordering(a), 0.0);
        CHECK(f.factor_nnz() == a.nnz() + n);
    }
}

TEST_CASE("singular matrices report the failing column") {
    const std::vector<Triplet<double>> t{{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
    const auto a = RMatrix::from_triplets(2, 2, t);
    try {
        (void)lu_factorize(a, order(a, OrderingKind::Natural));
        FAIL("expected a singularity error");
    } catch (const SingularMatrixError& e) {
        CHECK(e.column() == 1);
        CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
    const auto empty_col = RMatrix::from_triplets(2, 2, std::vector<Triplet<double>>{{0, 0, 1.0}});
    CHECK_THROWS_AS(lu_factorize(empty_col, order(empty_col, OrderingKind::Natural)),
                    SingularMatrixError);
    CHECK_THROWS_AS(lu_factorize(RMatrix(2, 3), Ordering{{0, 1}, OrderingKind::Natural}),
                    SparseError);
}

TEST_CASE("small solves") {
    const auto i3 = RMatrix::identity(3);
    const auto fi = lu_factorize(i3, default_ordering(i3));
    const std::vector<double> b{1.5, -2.0, 7.0};
    CHECK(lu_solve<double>(fi, b) == b);

    const std::vector<double> d{2.0, 4.0};
    const auto a = RMatrix::diagonal(d);
    const auto f = lu_factorize(a, default_ordering(a));
    CHECK(lu_solve<double>(f, std::vector<double>{2.0, 8.0}) == std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(lu_solve<double>(f, std::vector<double>{1.0}), SparseError);
}

TEST_CASE("random sparse solves match dense elimination") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_matrix<double>(50, 3, rng);
        const auto b = random_vector<double>(50, rng);
        const auto f = lu_factorize(a, default_ordering(a));
        const auto x = lu_solve<double>(f, b);
        const auto oracle = testing::dense_solve(a.to_dense(), b);
        CHECK(max_abs_diff(x, oracle) <= 1e-9 * max_abs(oracle));
        CHECK(reconstruction_error(a, f) <= 1e-10 * a.norm_inf());
    }
}

TEST_CASE("pivoting handles matrices without dominance") {
    Rng rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        // weak diagonal forces threshold pivoting on many columns
        const auto a = random_matrix<Complex>(40, 4, rng, -1.0);
        const auto b = random_vector<Complex>(40, rng);
        LuFactors<Complex> f;
        try {
            f = lu_factorize(a, default_ordering(a));
        } catch (const SingularMatrixError&) {
            continue;  // structurally singular draw
        }
        CHECK(reconstruction_error(a, f) <= 1e-10 * a.norm_inf());
        const auto x = lu_solve<Complex>(f, b);
        CHECK(relative_residual(a, x, b) <= 1e-10);
    }
}

TEST_CASE("solve residual bound on random dominant matrices") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = static_cast<Index>(1 + rng.below(400));
        const int per_row = 1 + static_cast<int>(rng.below(6));
        const auto a = random_matrix<Complex>(n, per_row, rng, rng.uniform(0.01, 2.0), true);
        const auto b = random_vector<Complex>(n, rng);
        const auto f = lu_factorize(a, default_ordering(a));
        CAPTURE(n);
        CHECK(relative_residual(a, lu_solve<Complex>(f, b), b) <= 1e-10);
    }
}

TEST_CASE("forced dense tail agrees with the sparse path") {
    Rng rng(37);
    const auto a = random_matrix<double>(300, 6, rng, 1.0, true);
    const auto b = random_vector<double>(300, rng);
    LuOptions sparse_only;
    sparse_only.dense_switch_fill = 2.0;
    LuOptions dense_early;
    dense_early.dense_switch_fill = 0.0;
    dense_early.dense_switch_min = 1;
    const auto ord = default_ordering(a);
    const auto fs = lu_factorize(a, ord, sparse_only);
    const auto fd = lu_factorize(a, ord, dense_early);
    CHECK(fs.dense_from == 300);
    CHECK(fd.dense_from < 300);
    CHECK(reconstruction_error(a, fd) <= 1e-10 * a.norm_inf());
    const auto xs = lu_solve<double>(fs, b);
    const auto xd = lu_solve<double>(fd, b);
    CHECK(max_abs_diff(xs, xd) <= 1e-10 * max_abs(xs));
}

TEST_CASE("lu_solve_multi") {
    Rng rng(41);
    const auto a = random_matrix<double>(30, 3, rng);
    const auto f = lu_factorize(a, default_ordering(a));

    SUBCASE("identity right-hand sides give the inverse") {
        std::vector<std::vector<double>> eye(30, std::vector<double>(30, 0.0));
        for (std::size_t i = 0; i < 30; ++i) {
            eye[i][i] = 1.0;
        }
        const auto inv = lu_solve_multi<double>(f, eye);
        // A * inv(:, j) = e_j
        for (std::size_t j = 0; j < 30; ++j) {
            const auto col = a.multiply(inv[j]);
            CHECK(max_abs_diff(col, eye[j]) <= 1e-12);
        }
    }
    SUBCASE("columns match independent solves bitwise") {
        std::vector<std::vector<double>> rhs;
        for (int k = 0; k < 10; ++k) {
            rhs.push_back(random_vector<double>(30, rng));
        }
        const auto xs = lu_solve_multi<double>(f, rhs);
        REQUIRE(xs.size() == 10);
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(xs[k] == lu_solve<double>(f, rhs[k]));
        }
        const std::vector<std::vector<double>> one{rhs[0]};
        CHECK(lu_solve_multi<double>(f, one)[0] == lu_solve<double>(f, rhs[0]));
    }
}

TEST_CASE("complex embedding of a real system matches the real solve") {
    Rng rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_matrix<double>(80, 3, rng);
        const auto b = random_vector<double>(80, rng);
        const auto x = lu_solve<double>(lu_factorize(a, default_ordering(a)), b);
        const auto ac = to_complex(a);
        std::vector<Complex> bc(b.begin(), b.end());
        const auto xc = lu_solve<Complex>(lu_factorize(ac, default_ordering(ac)), bc);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(xc[i] - x[i]) <= 1e-12 * std::max(1.0, std::abs(x[i])));
        }
    }
}

TEST_CASE("matrix market round trip") {
    Rng rng(47);
    const auto c = random_matrix<Complex>(25, 3, rng);
    std::stringstream ss;
    write_matrix_market(ss, c);
    CHECK(ss.str().rfind("%%MatrixMarket matrix coordinate complex general", 0) == 0);
    CHECK(read_matrix_market<Complex>(ss) == c);

    const auto r = random_matrix<double>(25, 3, rng);
    std::stringstream sr;
    write_matrix_market(sr, r);
    CHECK(read_matrix_market<double>(sr) == r);

    std::stringstream one_based("%%MatrixMarket matrix coordinate real general\n2 2 1\n2 1 5\n");
    const auto m = read_matrix_market<double>(one_based);
    CHECK(m.at(1, 0) == 5.0);

    std::stringstream wrong_field("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n");
    CHECK_THROWS_AS(read_matrix_market<double>(wrong_field), SparseError);
    std::stringstream short_file("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n");
    CHECK_THROWS_AS(read_matrix_market<double>(short_file), SparseError);
}

TEST_CASE("spy plot draws one square per entry") {
    const auto svg = spy_svg(RMatrix::identity(2));
    const auto count = [&](const std::string& needle) {
        std::size_t k = 0;
        for (auto p = svg.find(needle); p != std::string::npos; p = svg.find(needle, p + 1)) {
            ++k;
        }
        return k;
    };
    const auto entries = svg.substr(svg.find("class=\"entries\""));
    std::size_t rects = 0;
    for (auto p = entries.find("<rect"); p != std::string::npos; p = entries.find("<rect", p + 1)) {
        ++rects;
    }
    CHECK(rects == 2);
    CHECK(count("nnz = 2") == 1);
    CHECK(spy_svg(RMatrix::identity(2)) == svg);
}

}  // TEST_SUITE
