#include "pfscale/sparsekit/ordering.hpp"

#include <algorithm>
#include <numeric>

namespace pfscale::sparse {

std::string_view to_string(OrderingKind kind) {
    switch (kind) {
        case OrderingKind::Natural:
            return "natural";
        case OrderingKind::MinimumDegree:
            return "minimum-degree";
        case OrderingKind::LeafFirstTree:
            return "leaf-first-tree";
    }
    return "unknown";
}

template <class T>
PatternGraph pattern_graph(const SparseMatrix<T>& m) {
    if (m.rows() != m.cols()) {
        throw SparseError("ordering requires a square matrix");
    }
    const Index n = m.rows();
    const auto& cp = m.colptr();
    const auto& ri = m.rowidx();

    std::vector<Offset> degree(static_cast<std::size_t>(n) + 1, 0);
    for (Index j = 0; j < n; ++j) {
        for (Offset p = cp[j]; p < cp[j + 1]; ++p) {
            if (ri[p] != j) {
                ++degree[j + 1];
                ++degree[ri[p] + 1];
            }
        }
    }
    std::partial_sum(degree.begin(), degree.end(), degree.begin());
    std::vector<Index> both(static_cast<std::size_t>(degree.back()));
    std::vector<Offset> next(degree.begin(), degree.end() - 1);
    for (Index j = 0; j < n; ++j) {
        for (Offset p = cp[j]; p < cp[j + 1]; ++p) {
            if (ri[p] != j) {
                both[next[j]++] = ri[p];
                both[next[ri[p]]++] = j;
            }
        }
    }

    // sort and deduplicate each list (symmetric entries appear twice)
    PatternGraph g;
    g.n = n;
    g.ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    g.adj.reserve(both.size() / 2 + 1);
    for (Index v = 0; v < n; ++v) {
        auto first = both.begin() + degree[v];
        auto last = both.begin() + degree[v + 1];
        std::sort(first, last);
        last = std::unique(first, last);
        g.adj.insert(g.adj.end(), first, last);
        g.ptr[v + 1] = static_cast<Offset>(g.adj.size());
    }
    return g;
}

template PatternGraph pattern_graph(const SparseMatrix<double>&);
template PatternGraph pattern_graph(const SparseMatrix<Complex>&);

namespace {

Index find_root(std::vector<Index>& parent, Index v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

std::vector<Index> leaf_first(const PatternGraph& g) {
    if (!is_forest(g)) {
        throw SparseError("leaf-first ordering: pattern graph is not a forest");
    }
    const Index n = g.n;
    std::vector<Index> degree(static_cast<std::size_t>(n));
    std::vector<Index> queue;
    queue.reserve(static_cast<std::size_t>(n));
    for (Index v = 0; v < n; ++v) {
        degree[v] = static_cast<Index>(g.ptr[v + 1] - g.ptr[v]);
        if (degree[v] <= 1) {
            queue.push_back(v);
        }
    }
    std::vector<char> done(static_cast<std::size_t>(n), 0);
    std::vector<Index> perm;
    perm.reserve(static_cast<std::size_t>(n));
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const Index v = queue[head];
        if (done[v]) {
            continue;
        }
        done[v] = 1;
        perm.push_back(v);
        for (const Index w : g.neighbours(v)) {
            if (!done[w] && --degree[w] == 1) {
                queue.push_back(w);
            }
        }
    }
    // the last vertex of a tree reaches degree zero without passing through one
    for (Index v = 0; v < n; ++v) {
        if (!done[v]) {
            perm.push_back(v);
        }
    }
    return perm;
}

// Minimum degree on the quotient graph. Eliminated pivots become elements;
// variable degrees are the approximate external degrees
//   |A_i| + |L_p \ i| + sum_{e in E_i, e != p} |L_e \ L_p|,
// with elements absorbed when L_e is contained in L_p.
class MinimumDegree {
  public:
    explicit MinimumDegree(const PatternGraph& g)
        : n_(g.n),
          vars_(static_cast<std::size_t>(n_)),
          elems_(static_cast<std::size_t>(n_)),
          members_(static_cast<std::size_t>(n_)),
          state_(static_cast<std::size_t>(n_), State::Variable),
          degree_(static_cast<std::size_t>(n_)),
          mark_(static_cast<std::size_t>(n_), 0),
          wmark_(static_cast<std::size_t>(n_), 0),
          w_(static_cast<std::size_t>(n_), 0),
          head_(static_cast<std::size_t>(n_) + 1, -1),
          tail_(static_cast<std::size_t>(n_) + 1, -1),
          next_(static_cast<std::size_t>(n_), -1),
          prev_(static_cast<std::size_t>(n_), -1) {
        for (Index v = 0; v < n_; ++v) {
            auto nb = g.neighbours(v);
            vars_[v].assign(nb.begin(), nb.end());
            degree_[v] = static_cast<Index>(nb.size());
            push(v);
        }
    }

    std::vector<Index> run() {
        std::vector<Index> perm;
        perm.reserve(static_cast<std::size_t>(n_));
        while (static_cast<Index>(perm.size()) < n_) {
            while (head_[min_degree_] < 0) {
                ++min_degree_;
            }
            const Index p = head_[min_degree_];
            pop(p);
            perm.push_back(p);
            const auto remaining = static_cast<Index>(n_ - perm.size());
            if (eliminate(p, remaining) == remaining) {
                // every remaining variable is adjacent to p: the rest is a
                // clique and any order produces the same fill
                for (Index d = 0; d <= n_ && static_cast<Index>(perm.size()) < n_; ++d) {
                    for (Index v = head_[d]; v >= 0; v = next_[v]) {
                        perm.push_back(v);
                    }
                }
            }
        }
        return perm;
    }

  private:
    enum class State : unsigned char { Variable, Element, Absorbed };

    // Degree buckets are FIFO: ties go to the longest-waiting variable.
    void push(Index v) {
        const Index d = degree_[v];
        prev_[v] = tail_[d];
        next_[v] = -1;
        if (tail_[d] >= 0) {
            next_[tail_[d]] = v;
        } else {
            head_[d] = v;
        }
        tail_[d] = v;
        min_degree_ = std::min(min_degree_, d);
    }

    void pop(Index v) {
        const Index d = degree_[v];
        if (prev_[v] >= 0) {
            next_[prev_[v]] = next_[v];
        } else {
            head_[d] = next_[v];
        }
        if (next_[v] >= 0) {
            prev_[next_[v]] = prev_[v];
        } else {
            tail_[d] = prev_[v];
        }
    }

    /// Returns |L_p|.
    Index eliminate(Index p, Index remaining) {
        ++tag_;
        std::vector<Index> lp;
        mark_[p] = tag_;
        for (const Index v : vars_[p]) {
            if (state_[v] == State::Variable && mark_[v] != tag_) {
                mark_[v] = tag_;
                lp.push_back(v);
            }
        }
        for (const Index e : elems_[p]) {
            if (state_[e] != State::Element) {
                continue;
            }
            for (const Index v : members_[e]) {
                if (state_[v] == State::Variable && mark_[v] != tag_) {
                    mark_[v] = tag_;
                    lp.push_back(v);
                }
            }
            state_[e] = State::Absorbed;
            std::vector<Index>().swap(members_[e]);
        }
        state_[p] = State::Element;
        std::vector<Index>().swap(vars_[p]);
        std::vector<Index>().swap(elems_[p]);

        // prune: variables reachable through p leave the variable lists
        for (const Index i : lp) {
            auto& va = vars_[i];
            va.erase(std::remove_if(va.begin(), va.end(),
                                    [&](Index v) {
                                        return state_[v] != State::Variable || mark_[v] == tag_;
                                    }),
                     va.end());
            auto& ea = elems_[i];
            ea.erase(std::remove_if(ea.begin(), ea.end(),
                                    [&](Index e) { return state_[e] != State::Element; }),
                     ea.end());
        }

        // |L_e \ L_p| for every element adjacent to L_p
        ++wtag_;
        for (const Index i : lp) {
            for (const Index e : elems_[i]) {
                if (wmark_[e] != wtag_) {
                    wmark_[e] = wtag_;
                    w_[e] = static_cast<Index>(members_[e].size());
                }
                --w_[e];
            }
        }

        const auto lsize = static_cast<Index>(lp.size());
        for (const Index i : lp) {
            auto& ea = elems_[i];
            Index external = 0;
            std::size_t keep = 0;
            for (const Index e : ea) {
                if (w_[e] == 0) {
                    state_[e] = State::Absorbed;
                    std::vector<Index>().swap(members_[e]);
                    continue;
                }
                if (state_[e] != State::Element) {
                    continue;
                }
                external += w_[e];
                ea[keep++] = e;
            }
            ea.resize(keep);
            ea.push_back(p);

            const Index d = std::min<Index>(
                {remaining - 1, degree_[i] + (lsize - 1),
                 static_cast<Index>(vars_[i].size()) + (lsize - 1) + external});
            pop(i);
            degree_[i] = std::max<Index>(d, 0);
            push(i);
        }
        members_[p] = std::move(lp);
        return lsize;
    }

    Index n_;
    std::vector<std::vector<Index>> vars_;
    std::vector<std::vector<Index>> elems_;
    std::vector<std::vector<Index>> members_;
    std::vector<State> state_;
    std::vector<Index> degree_;
    std::vector<std::int64_t> mark_;
    std::vector<std::int64_t> wmark_;
    std::vector<Index> w_;
    std::int64_t tag_ = 0;
    std::int64_t wtag_ = 0;
    std::vector<Index> head_, tail_, next_, prev_;
    Index min_degree_ = 0;
};

}  // namespace

bool is_forest(const PatternGraph& g) {
    std::vector<Index> parent(static_cast<std::size_t>(g.n));
    std::iota(parent.begin(), parent.end(), 0);
    for (Index v = 0; v < g.n; ++v) {
        for (const Index w : g.neighbours(v)) {
            if (w <= v) {
                continue;
            }
            const Index a = find_root(parent, v);
            const Index b = find_root(parent, w);
            if (a == b) {
                return false;
            }
            parent[a] = b;
        }
    }
    return true;
}

Ordering order(const PatternGraph& g, OrderingKind kind) {
    Ordering ord;
    ord.kind = kind;
    switch (kind) {
        case OrderingKind::Natural:
            ord.perm.resize(static_cast<std::size_t>(g.n));
            std::iota(ord.perm.begin(), ord.perm.end(), 0);
            break;
        case OrderingKind::MinimumDegree:
            ord.perm = MinimumDegree(g).run();
            break;
        case OrderingKind::LeafFirstTree:
            ord.perm = leaf_first(g);
            break;
    }
    return ord;
}

bool is_permutation(std::span<const Index> perm, Index n) {
    if (perm.size() != static_cast<std::size_t>(n)) {
        return false;
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (const Index v : perm) {
        if (v < 0 || v >= n || seen[v]) {
            return false;
        }
        seen[v] = 1;
    }
    return true;
}

}  // namespace pfscale::sparse
