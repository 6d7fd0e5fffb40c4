#pragma once

#include <string_view>
#include <vector>

#include "pfscale/sparsekit/csc.hpp"

namespace pfscale::sparse {

enum class OrderingKind { Natural, MinimumDegree, LeafFirstTree };

std::string_view to_string(OrderingKind kind);

/// Elimination order: perm[k] is the original index eliminated at step k.
struct Ordering {
    std::vector<Index> perm;
    OrderingKind kind = OrderingKind::Natural;
};

/// Undirected adjacency of the pattern of A + A^T with the diagonal removed.
struct PatternGraph {
    Index n = 0;
    std::vector<Offset> ptr{0};
    std::vector<Index> adj;

    std::span<const Index> neighbours(Index v) const {
        return {adj.data() + ptr[v], static_cast<std::size_t>(ptr[v + 1] - ptr[v])};
    }
};

template <class T>
PatternGraph pattern_graph(const SparseMatrix<T>& m);

bool is_forest(const PatternGraph& g);

Ordering order(const PatternGraph& g, OrderingKind kind);

/// Orders the symmetrized pattern of a square matrix.
template <class T>
Ordering order(const SparseMatrix<T>& m, OrderingKind kind) {
    return order(pattern_graph(m), kind);
}

/// LeafFirstTree when the pattern graph is a forest, MinimumDegree otherwise.
template <class T>
Ordering default_ordering(const SparseMatrix<T>& m) {
    const PatternGraph g = pattern_graph(m);
    return order(g, is_forest(g) ? OrderingKind::LeafFirstTree : OrderingKind::MinimumDegree);
}

bool is_permutation(std::span<const Index> perm, Index n);

}  // namespace pfscale::sparse
