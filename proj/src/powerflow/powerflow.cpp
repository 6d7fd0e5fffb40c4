#include "pfscale/powerflow/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pfscale/common/stopwatch.hpp"
#include "pfscale/sparsekit/ordering.hpp"

namespace pfscale::pf {

namespace {

double norm_inf(std::span<const Complex> v) {
    double m = 0.0;
    for (const Complex& z : v) {
        m = std::max(m, std::abs(z));
    }
    return m;
}

void check_size(std::span<const Complex> v, Index n, const char* what) {
    if (static_cast<Index>(v.size()) != n) {
        throw PowerFlowError(fmt::format("{}: expected {} entries, got {}", what, n, v.size()));
    }
}

sparse::LuFactors<Complex> factorize(const sparse::SparseMatrix<Complex>& y) {
    return sparse::lu_factorize(y, sparse::default_ordering(y));
}

}  // namespace

double Timings::total() const {
    double t = factor_seconds;
    for (const double s : solve_seconds) {
        t += s;
    }
    return t;
}

double PowerFlowSolution::per_iteration_seconds() const {
    return timings.total() / std::max(iterations, 1);
}

FixedPointSolver::FixedPointSolver(const YbusSystem& sys, bool with_no_load_voltage) {
    Stopwatch watch;
    factors_ = factorize(sys.y_ll);
    factor_seconds_ = watch.seconds();
    i_source_ = ybus::source_current(sys);
    if (!with_no_load_voltage) {
        return;
    }
    std::vector<Complex> rhs(i_source_.size());
    std::transform(i_source_.begin(), i_source_.end(), rhs.begin(), std::negate<>());
    v0_ = sparse::lu_solve<Complex>(factors_, rhs);
}

PowerFlowSolution FixedPointSolver::solve(std::span<const Complex> s,
                                          const FixedPointOptions& options) const {
    const Index n = factors_.n;
    check_size(s, n, "fixed point: load vector");
    if (!(options.tol > 0.0) || options.max_iter < 1) {
        throw PowerFlowError("fixed point: tol must be positive and max_iter at least 1");
    }
    if (!options.v_init && v0_.empty() && n > 0) {
        throw PowerFlowError("fixed point: no initial voltage and no no-load voltage computed");
    }
    std::vector<Complex> v = options.v_init.value_or(v0_);
    check_size(v, n, "fixed point: initial voltage");

    PowerFlowSolution sol;
    sol.timings.factor_seconds = factor_seconds_;
    sol.timings.solve_seconds.reserve(static_cast<std::size_t>(options.max_iter));
    std::vector<Complex> rhs(static_cast<std::size_t>(n));
    std::vector<Complex> next(static_cast<std::size_t>(n));
    std::vector<Complex> work;
    Stopwatch watch;
    for (int k = 1; k <= options.max_iter; ++k) {
        watch.restart();
        for (Index i = 0; i < n; ++i) {
            if (v[i] == Complex{}) {
                throw PowerFlowError(
                    fmt::format("fixed point: zero voltage at load node {} (iteration {})", i, k));
            }
            rhs[i] = std::conj(-s[i] / v[i]) - i_source_[i];
        }
        sparse::lu_solve_into<Complex>(factors_, rhs, next, work);
        double diff = 0.0;
        for (Index i = 0; i < n; ++i) {
            diff = std::max(diff, std::abs(next[i] - v[i]));
        }
        v.swap(next);
        sol.timings.solve_seconds.push_back(watch.seconds());
        const double scale = norm_inf(v);
        if (!std::isfinite(diff) || scale == 0.0) {
            throw PowerFlowError(fmt::format("fixed point: voltage collapse at iteration {}", k));
        }
        sol.iterations = k;
        sol.max_mismatch = diff / scale;
        if (sol.max_mismatch <= options.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.v_nodes = std::move(v);
    return sol;
}

PowerFlowSolution solve_fixed_point(const YbusSystem& sys, std::span<const Complex> s,
                                    const FixedPointOptions& options) {
    return FixedPointSolver(sys).solve(s, options);
}

PowerFlowSolution solve_fixed_point(const YbusSystem& sys, const FixedPointOptions& options) {
    return solve_fixed_point(sys, sys.s_load, options);
}

std::vector<Complex> no_load_voltage(const YbusSystem& sys) { return FixedPointSolver(sys).v0(); }

PowerFlowSolution solve_constant_admittance(const YbusSystem& sys,
                                            std::span<const Complex> y_extra) {
    const Index n = sys.n_load();
    check_size(y_extra, n, "constant admittance: load admittances");
    std::vector<sparse::Triplet<Complex>> diag;
    diag.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        diag.push_back({i, i, y_extra[i]});
    }
    const auto y = sys.y_ll.add(sparse::SparseMatrix<Complex>::from_triplets(n, n, diag));

    PowerFlowSolution sol;
    std::vector<Complex> rhs = ybus::source_current(sys);
    for (Complex& z : rhs) {
        z = -z;
    }
    Stopwatch watch;
    const auto f = factorize(y);
    sol.timings.factor_seconds = watch.lap();
    std::vector<Complex> work;
    sol.v_nodes.resize(static_cast<std::size_t>(n));
    sparse::lu_solve_into<Complex>(f, rhs, sol.v_nodes, work);
    sol.timings.solve_seconds.push_back(watch.seconds());
    sol.iterations = 1;
    sol.converged = true;
    return sol;
}

PowerFlowSolution solve_constant_admittance(const YbusSystem& sys) {
    std::vector<Complex> y(sys.s_load.size());
    std::transform(sys.s_load.begin(), sys.s_load.end(), y.begin(),
                   [](Complex s) { return std::conj(s); });
    return solve_constant_admittance(sys, y);
}

JacobianSystem build_jacobian_system(const YbusSystem& sys, std::span<const Complex> v_star) {
    const Index n = sys.n_load();
    check_size(v_star, n, "jacobian: operating point");
    // b = y_LL v* + y_LS v_S
    std::vector<Complex> b = sys.y_ll.multiply(v_star);
    const std::vector<Complex> i_src = ybus::source_current(sys);
    for (Index i = 0; i < n; ++i) {
        b[i] += i_src[i];
    }

    std::vector<sparse::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(4 * sys.y_ll.nnz() + 4 * n));
    const auto& cp = sys.y_ll.colptr();
    const auto& ri = sys.y_ll.rowidx();
    const auto& val = sys.y_ll.values();
    for (Index j = 0; j < n; ++j) {
        for (auto p = cp[j]; p < cp[j + 1]; ++p) {
            const Index i = ri[p];
            const Complex a = std::conj(v_star[i]) * val[p];  // diag(conj v*) y_LL
            trip.push_back({i, j, a.real()});
            trip.push_back({i, n + j, -a.imag()});
            trip.push_back({n + i, j, a.imag()});
            trip.push_back({n + i, n + j, a.real()});
        }
    }
    for (Index i = 0; i < n; ++i) {
        trip.push_back({i, i, b[i].real()});
        trip.push_back({i, n + i, b[i].imag()});
        trip.push_back({n + i, i, b[i].imag()});
        trip.push_back({n + i, n + i, -b[i].real()});
    }

    std::vector<sparse::Triplet<double>> map;
    map.reserve(static_cast<std::size_t>(2 * n));
    for (Index i = 0; i < n; ++i) {
        // d conj(s_inj) = -d conj(s) for consumption s
        map.push_back({i, i, -1.0});
        map.push_back({n + i, n + i, 1.0});
    }
    return {sparse::SparseMatrix<double>::from_triplets(2 * n, 2 * n, trip),
            sparse::SparseMatrix<double>::from_triplets(2 * n, 2 * n, map)};
}

namespace {

std::vector<Complex> jacobian_apply(const Linearization& lin, std::span<const Complex> s) {
    const Index n = lin.n_load;
    std::vector<double> stacked(2 * static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        stacked[i] = s[i].real();
        stacked[n + i] = s[i].imag();
    }
    const std::vector<double> rhs = lin.jacobian.rhs_map.multiply(stacked);
    const std::vector<double> dv = sparse::lu_solve<double>(*lin.jacobian_factors, rhs);
    std::vector<Complex> out(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        out[i] = {dv[i], dv[n + i]};
    }
    return out;
}

}  // namespace

Linearization build_linearization(const YbusSystem& sys, LinearizationKind kind,
                                  std::span<const Complex> v_star, std::span<const Complex> s_star,
                                  const LinearizationOptions& options) {
    const Index n = sys.n_load();
    check_size(v_star, n, "linearization: v*");
    if (!s_star.empty()) {
        check_size(s_star, n, "linearization: s*");
    }
    Linearization lin;
    lin.kind = kind;
    lin.n_load = n;

    if (kind == LinearizationKind::ImplicitJacobian) {
        lin.jacobian = build_jacobian_system(sys, v_star);
        try {
            lin.jacobian_factors = sparse::lu_factorize(
                lin.jacobian.s_blocks, sparse::default_ordering(lin.jacobian.s_blocks));
        } catch (const sparse::SingularMatrixError& e) {
            throw PowerFlowError(fmt::format("implicit Jacobian: block system is singular ({})",
                                             e.what()));
        }
        lin.v0.assign(v_star.begin(), v_star.end());
        if (!s_star.empty()) {
            const std::vector<Complex> ds = jacobian_apply(lin, s_star);
            for (Index i = 0; i < n; ++i) {
                lin.v0[i] -= ds[i];
            }
        }
        return lin;
    }

    if (kind == LinearizationKind::DenseExplicit && n > options.dense_cap) {
        throw PowerFlowError(fmt::format(
            "dense explicit model refused: {} load nodes exceeds dense_cap {}", n,
            options.dense_cap));
    }
    lin.h_diag.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        if (v_star[i] == Complex{}) {
            throw PowerFlowError(fmt::format("linearization: zero entry in v* at load node {}", i));
        }
        lin.h_diag[i] = -1.0 / std::conj(v_star[i]);
    }
    FixedPointSolver base(sys);
    lin.v0 = base.v0();
    if (kind == LinearizationKind::FixedPoint) {
        lin.y_factors = base.factors();
        return lin;
    }

    // M column j = y_LL^-1 e_j h_j, in blocks to bound the rhs storage.
    lin.dense_m.resize(static_cast<std::size_t>(n) * n);
    constexpr Index kBlock = 64;
    for (Index j0 = 0; j0 < n; j0 += kBlock) {
        const Index j1 = std::min(n, j0 + kBlock);
        std::vector<std::vector<Complex>> rhs(static_cast<std::size_t>(j1 - j0),
                                              std::vector<Complex>(static_cast<std::size_t>(n)));
        for (Index j = j0; j < j1; ++j) {
            rhs[j - j0][j] = lin.h_diag[j];
        }
        const auto cols = sparse::lu_solve_multi<Complex>(base.factors(), rhs);
        for (Index j = j0; j < j1; ++j) {
            std::copy(cols[j - j0].begin(), cols[j - j0].end(),
                      lin.dense_m.begin() + static_cast<std::ptrdiff_t>(j) * n);
        }
    }
    return lin;
}

Linearization build_linearization(const YbusSystem& sys, LinearizationKind kind,
                                  const LinearizationOptions& options) {
    const std::vector<Complex> v0 = no_load_voltage(sys);
    return build_linearization(sys, kind, v0, {}, options);
}

std::vector<Complex> evaluate_linearization(const Linearization& lin, std::span<const Complex> s) {
    const Index n = lin.n_load;
    check_size(s, n, "linearization: load vector");
    std::vector<Complex> v;
    switch (lin.kind) {
        case LinearizationKind::ImplicitJacobian:
            v = jacobian_apply(lin, s);
            break;
        case LinearizationKind::FixedPoint: {
            std::vector<Complex> rhs(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i) {
                rhs[i] = lin.h_diag[i] * std::conj(s[i]);
            }
            v = sparse::lu_solve<Complex>(*lin.y_factors, rhs);
            break;
        }
        case LinearizationKind::DenseExplicit: {
            v.assign(static_cast<std::size_t>(n), Complex{});
            for (Index j = 0; j < n; ++j) {
                const Complex sj = std::conj(s[j]);
                if (sj == Complex{}) {
                    continue;
                }
                const Complex* col = lin.dense_m.data() + static_cast<std::ptrdiff_t>(j) * n;
                for (Index i = 0; i < n; ++i) {
                    v[i] += col[i] * sj;
                }
            }
            break;
        }
    }
    for (Index i = 0; i < n; ++i) {
        v[i] += lin.v0[i];
    }
    return v;
}

void write_solution_csv(std::ostream& os, const net::Network& net, const YbusSystem& sys,
                        const PowerFlowSolution& sol) {
    if (static_cast<Index>(sol.v_nodes.size()) != sys.n_load()) {
        throw PowerFlowError("solution size does not match the system");
    }
    os << "node_id,bus,phase,v_re,v_im,v_mag_pu,v_ang_deg\n";
    const auto row = [&](Index node, Complex v) {
        const net::NodeRef& ref = net.nodes()[node];
        fmt::print(os, "{},{},{},{:.12g},{:.12g},{:.12g},{:.12g}\n", node,
                   net.buses()[ref.bus].id, net::phase_char(ref.phase), v.real(), v.imag(),
                   std::abs(v), std::arg(v) * 180.0 / std::numbers::pi);
    };
    for (Index i = 0; i < sys.n_load(); ++i) {
        row(sys.load_nodes[i], sol.v_nodes[i]);
    }
    for (std::size_t k = 0; k < sys.source_nodes.size(); ++k) {
        row(sys.source_nodes[k], sys.v_source[k]);
    }
}

}  // namespace pfscale::pf
