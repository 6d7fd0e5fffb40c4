#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pfscale/netmodel/network.hpp"
#include "pfscale/sparsekit/lu.hpp"
#include "pfscale/ybus/ybus.hpp"

namespace pfscale::pf {

using sparse::Complex;
using sparse::Index;
using ybus::YbusSystem;

class PowerFlowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Timings {
    double factor_seconds = 0.0;  // ordering + numeric factorization
    std::vector<double> solve_seconds;

    double total() const;
};

/// Load-node voltages in per unit. Power arguments throughout this module
/// use the load (consumption) sign convention and per-unit values.
struct PowerFlowSolution {
    std::vector<Complex> v_nodes;
    int iterations = 0;
    double max_mismatch = 0.0;  // last relative voltage change
    bool converged = false;
    Timings timings;

    /// (factor + all solves) / iterations.
    double per_iteration_seconds() const;
};

struct FixedPointOptions {
    double tol = 1e-6;
    int max_iter = 100;
    /// Starting iterate; the no-load voltage when absent.
    std::optional<std::vector<Complex>> v_init;
};

/// Factorized y_LL plus the no-load voltage v0 = -y_LL^-1 y_LS v_S. One
/// instance serves any number of fixed-point solves on the same system.
class FixedPointSolver {
  public:
    /// Without the no-load voltage every solve() needs options.v_init.
    explicit FixedPointSolver(const YbusSystem& sys, bool with_no_load_voltage = true);

    const sparse::LuFactors<Complex>& factors() const { return factors_; }
    const std::vector<Complex>& v0() const { return v0_; }
    double factor_seconds() const { return factor_seconds_; }

    /// v[k+1] = y_LL \ (conj(-s ./ v[k]) - y_LS v_S) until
    /// ||v[k+1] - v[k]||_inf / ||v[k+1]||_inf <= tol. Timings cover the
    /// iterations only; factor_seconds is copied from construction.
    PowerFlowSolution solve(std::span<const Complex> s, const FixedPointOptions& options = {}) const;

  private:
    sparse::LuFactors<Complex> factors_;
    std::vector<Complex> i_source_;  // y_LS v_S
    std::vector<Complex> v0_;
    double factor_seconds_ = 0.0;
};

/// Method (i) with ConstantPower loads s over the load nodes.
PowerFlowSolution solve_fixed_point(const YbusSystem& sys, std::span<const Complex> s,
                                    const FixedPointOptions& options = {});
/// Same, with the system's own ConstantPower loads.
PowerFlowSolution solve_fixed_point(const YbusSystem& sys, const FixedPointOptions& options = {});

/// -y_LL^-1 y_LS v_S.
std::vector<Complex> no_load_voltage(const YbusSystem& sys);

/// Method (ii): one factorization and one solve of (y_LL + diag(y_extra)) v = -y_LS v_S.
PowerFlowSolution solve_constant_admittance(const YbusSystem& sys,
                                            std::span<const Complex> y_extra);
/// Same, with every ConstantPower load converted at nominal voltage (y = conj(s)).
PowerFlowSolution solve_constant_admittance(const YbusSystem& sys);

enum class LinearizationKind { FixedPoint, ImplicitJacobian, DenseExplicit };

/// Real block system [[S11, S12], [S21, S22]] over stacked (dx, dy) and the
/// map from stacked (Re s, Im s) to its right-hand side. The delta-load
/// block has zero dimension.
struct JacobianSystem {
    sparse::SparseMatrix<double> s_blocks;
    sparse::SparseMatrix<double> rhs_map;
};

/// Builds the block system at operating point v* for the load nodes.
JacobianSystem build_jacobian_system(const YbusSystem& sys, std::span<const Complex> v_star);

struct Linearization {
    LinearizationKind kind = LinearizationKind::FixedPoint;
    Index n_load = 0;
    std::vector<Complex> v0;      // value at s = 0
    std::vector<Complex> h_diag;  // FixedPoint/DenseExplicit: -1 / conj(v*)
    std::optional<sparse::LuFactors<Complex>> y_factors;
    JacobianSystem jacobian;
    std::optional<sparse::LuFactors<double>> jacobian_factors;
    std::vector<Complex> dense_m;  // DenseExplicit: n_load x n_load, column-major
};

struct LinearizationOptions {
    Index dense_cap = 4000;
};

/// FixedPoint: v = y_LL \ (h_diag .* conj(s)) + v0 with v0 the no-load
/// voltage. DenseExplicit: the same model with M = y_LL^-1 diag(h_diag)
/// materialized. ImplicitJacobian: first-order model around (v*, s*),
/// v = v0 + D s with D from the block system and v0 = v* - D s*.
Linearization build_linearization(const YbusSystem& sys, LinearizationKind kind,
                                  std::span<const Complex> v_star,
                                  std::span<const Complex> s_star = {},
                                  const LinearizationOptions& options = {});

/// Linearization about the no-load voltage (s* = 0).
Linearization build_linearization(const YbusSystem& sys, LinearizationKind kind,
                                  const LinearizationOptions& options = {});

std::vector<Complex> evaluate_linearization(const Linearization& lin, std::span<const Complex> s);

/// CSV with header node_id,bus,phase,v_re,v_im,v_mag_pu,v_ang_deg: load
/// nodes from the solution, then the source nodes.
void write_solution_csv(std::ostream& os, const net::Network& net, const YbusSystem& sys,
                        const PowerFlowSolution& sol);

}  // namespace pfscale::pf
