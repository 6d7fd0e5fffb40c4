#pragma once

#include <vector>

#include "pfscale/netmodel/network.hpp"
#include "pfscale/sparsekit/csc.hpp"

namespace pfscale::ybus {

using sparse::Complex;
using sparse::Index;
using CMatrix = sparse::SparseMatrix<Complex>;

/// Per-unit bus admittance matrix of a network, split by source and load
/// nodes. Node ordinals follow Network::nodes(), so the load nodes are
/// 0..n_L-1 and the source nodes come last.
struct YbusSystem {
    CMatrix y_full;  // n x n, ConstantImpedance loads folded into the diagonal
    CMatrix y_ll;    // load rows, load columns
    CMatrix y_ls;    // load rows, source columns
    std::vector<Index> load_nodes;
    std::vector<Index> source_nodes;
    std::vector<Complex> v_source;  // per unit, over source_nodes
    /// ConstantPower consumption per load node, per unit (sum over loads).
    std::vector<Complex> s_load;
    /// ConstantImpedance admittance per load node, per unit (already in y_full).
    std::vector<Complex> y_load;
    double s_base_va = 1e6;  // per phase

    Index n() const { return y_full.rows(); }
    Index n_load() const { return static_cast<Index>(load_nodes.size()); }
};

/// Scatters each branch's primitive admittance into Ybus and converts to
/// per unit on the per-phase base s_base_kva and each bus's nominal
/// line-to-ground voltage: Y_pu(i, j) = Y(i, j) V_i V_j / S_base.
/// A ConstantImpedance load s (kVA at nominal voltage) becomes
/// y = conj(s_pu) on its node's diagonal.
YbusSystem assemble(const net::Network& net, double s_base_kva = 1000.0);

/// nnz(y) / 3n.
template <class T>
double equivalent_p(const sparse::SparseMatrix<T>& y, Index n) {
    return static_cast<double>(y.nnz()) / (3.0 * static_cast<double>(n));
}

/// y_LS v_S over the load nodes.
std::vector<Complex> source_current(const YbusSystem& sys);

}  // namespace pfscale::ybus
