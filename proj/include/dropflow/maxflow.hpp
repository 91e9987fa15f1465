#pragma once

// Max-flow / min-cut solver for submodular binary energies
//   E(x) = sum_c u_c x_c + sum_{pairs} w_{cd} |x_c - x_d|,   w >= 0,
// with x_c = 1 meaning "cell c belongs to the droplet" (source side).
//
// Boykov-Kolmogorov search-tree algorithm with terminal residuals folded into
// per-node capacities; 64-bit integer arithmetic, deterministic for a fixed
// insertion order. At termination the S tree is exactly the set of nodes
// reachable from the source in the residual network and the T tree the set
// that still reaches the sink, so
//   minimal_source_side()  =  S tree          (smallest global minimizer)
//   maximal_source_side()  =  complement of T (largest global minimizer).
//
// Parent-arc convention: for an S-tree node x, parent_[x] is the arc
// (parent -> x); for a T-tree node, the arc (x -> parent). Either way the
// stored arc is the one whose residual carries the tree's flow through x.

#include "dropflow/common.hpp"

#include <deque>
#include <vector>

namespace dropflow {

class MaxFlowGraph {
public:
    explicit MaxFlowGraph(int nodes)
        : n_(nodes), head_(nodes, -1), tr_cap_(nodes, 0) {}

    // Unary term u x_c: positive u is an arc c->t, negative an arc s->c.
    void add_unary(int node, std::int64_t u) {
        tr_cap_[node] -= u;
        if (u < 0) offset_ += u;
    }

    // Pairwise term w |x_u - x_v| with w >= 0.
    void add_pair(int u, int v, std::int64_t w) {
        if (w < 0) throw CapacityScaleError("pairwise capacity must be nonnegative");
        if (w == 0) return;
        to_.push_back(v);
        next_.push_back(head_[u]);
        cap_.push_back(w);
        head_[u] = static_cast<int>(to_.size()) - 1;
        to_.push_back(u);
        next_.push_back(head_[v]);
        cap_.push_back(w);
        head_[v] = static_cast<int>(to_.size()) - 1;
    }

    // Returns min_x E(x) = maxflow + sum of negative unary terms.
    std::int64_t solve() {
        run();
        solved_ = true;
        return flow_ + offset_;
    }

    std::int64_t min_cut_value() const { return flow_; }
    std::int64_t energy_offset() const { return offset_; }

    std::vector<char> minimal_source_side() const {
        require_solved();
        std::vector<char> side(n_);
        for (int i = 0; i < n_; ++i) side[i] = tree_[i] == kS;
        return side;
    }

    std::vector<char> maximal_source_side() const {
        require_solved();
        std::vector<char> side(n_);
        for (int i = 0; i < n_; ++i) side[i] = tree_[i] != kT;
        return side;
    }

private:
    static constexpr signed char kFree = 0, kS = 1, kT = 2;
    static constexpr int kNoParent = -1, kTerminalParent = -2;

    int parent_node(int x) const {
        return tree_[x] == kS ? to_[parent_[x] ^ 1] : to_[parent_[x]];
    }

    // Walks toward the root; false when the path dead-ends in an orphaned
    // subtree. Stamps the distance heuristic on success.
    bool has_origin(int node, std::uint64_t now) {
        int d = 0;
        int x = node;
        while (ts_[x] != now) {
            const int pa = parent_[x];
            if (pa == kTerminalParent) break;
            if (pa == kNoParent) return false;
            x = parent_node(x);
            ++d;
        }
        if (ts_[x] == now) d += dist_[x];
        x = node;
        while (ts_[x] != now) {
            dist_[x] = d--;
            ts_[x] = now;
            if (parent_[x] == kTerminalParent) break;
            x = parent_node(x);
        }
        return true;
    }

    void run() {
        tree_.assign(n_, kFree);
        parent_.assign(n_, kNoParent);
        ts_.assign(n_, 0);
        dist_.assign(n_, 0);
        flow_ = 0;

        std::deque<int> active;
        std::vector<char> in_active(n_, 0);
        auto activate = [&](int x) {
            if (!in_active[x]) {
                in_active[x] = 1;
                active.push_back(x);
            }
        };
        for (int i = 0; i < n_; ++i) {
            if (tr_cap_[i] > 0) {
                tree_[i] = kS;
                parent_[i] = kTerminalParent;
                activate(i);
            } else if (tr_cap_[i] < 0) {
                tree_[i] = kT;
                parent_[i] = kTerminalParent;
                activate(i);
            }
        }

        std::uint64_t now = 1;
        std::vector<int> orphans;
        while (!active.empty()) {
            const int p = active.front();
            active.pop_front();
            in_active[p] = 0;
            if (tree_[p] == kFree) continue;

            // ---- grow
            int meet = -1;  // arc oriented from the S side into the T side
            for (int a = head_[p]; a != -1; a = next_[a]) {
                const signed char t = tree_[p];
                const std::int64_t res = t == kS ? cap_[a] : cap_[a ^ 1];
                if (res <= 0) continue;
                const int q = to_[a];
                if (tree_[q] == kFree) {
                    tree_[q] = t;
                    parent_[q] = t == kS ? a : (a ^ 1);
                    ts_[q] = ts_[p];
                    dist_[q] = dist_[p] + 1;
                    activate(q);
                } else if (tree_[q] != t) {
                    meet = t == kS ? a : (a ^ 1);
                    break;
                }
            }
            if (meet < 0) continue;
            activate(p);  // p may have further growth arcs

            // ---- augment: bottleneck pass (roots located before saturation)
            std::int64_t bottleneck = cap_[meet];
            int sroot = to_[meet ^ 1];
            while (parent_[sroot] != kTerminalParent) {
                bottleneck = std::min(bottleneck, cap_[parent_[sroot]]);
                sroot = to_[parent_[sroot] ^ 1];
            }
            bottleneck = std::min(bottleneck, tr_cap_[sroot]);
            int troot = to_[meet];
            while (parent_[troot] != kTerminalParent) {
                bottleneck = std::min(bottleneck, cap_[parent_[troot]]);
                troot = to_[parent_[troot]];
            }
            bottleneck = std::min(bottleneck, -tr_cap_[troot]);

            orphans.clear();
            cap_[meet] -= bottleneck;
            cap_[meet ^ 1] += bottleneck;
            for (int x = to_[meet ^ 1]; parent_[x] != kTerminalParent;) {
                const int pa = parent_[x];
                cap_[pa] -= bottleneck;
                cap_[pa ^ 1] += bottleneck;
                const int up = to_[pa ^ 1];
                if (cap_[pa] == 0) {
                    parent_[x] = kNoParent;
                    orphans.push_back(x);
                }
                x = up;
            }
            tr_cap_[sroot] -= bottleneck;
            if (tr_cap_[sroot] == 0) {
                parent_[sroot] = kNoParent;
                orphans.push_back(sroot);
            }
            for (int x = to_[meet]; parent_[x] != kTerminalParent;) {
                const int pa = parent_[x];
                cap_[pa] -= bottleneck;
                cap_[pa ^ 1] += bottleneck;
                const int up = to_[pa];
                if (cap_[pa] == 0) {
                    parent_[x] = kNoParent;
                    orphans.push_back(x);
                }
                x = up;
            }
            tr_cap_[troot] += bottleneck;
            if (tr_cap_[troot] == 0) {
                parent_[troot] = kNoParent;
                orphans.push_back(troot);
            }
            flow_ += bottleneck;

            // ---- adopt
            ++now;
            while (!orphans.empty()) {
                const int o = orphans.back();
                orphans.pop_back();
                const signed char t = tree_[o];
                if ((t == kS && tr_cap_[o] > 0) || (t == kT && tr_cap_[o] < 0)) {
                    parent_[o] = kTerminalParent;
                    ts_[o] = now;
                    dist_[o] = 0;
                    continue;
                }
                int best_arc = kNoParent;
                int best_dist = std::numeric_limits<int>::max();
                for (int a = head_[o]; a != -1; a = next_[a]) {
                    const int q = to_[a];
                    if (tree_[q] != t) continue;
                    const int into = t == kS ? (a ^ 1) : a;  // parent-arc candidate for o
                    if (cap_[into] <= 0) continue;
                    if (!has_origin(q, now)) continue;
                    if (dist_[q] + 1 < best_dist) {
                        best_dist = dist_[q] + 1;
                        best_arc = into;
                    }
                }
                if (best_arc != kNoParent) {
                    parent_[o] = best_arc;
                    ts_[o] = now;
                    dist_[o] = best_dist;
                    continue;
                }
                for (int a = head_[o]; a != -1; a = next_[a]) {
                    const int q = to_[a];
                    if (tree_[q] != t) continue;
                    const int pq = parent_[q];
                    if (pq >= 0 && (t == kS ? to_[pq ^ 1] : to_[pq]) == o) {
                        parent_[q] = kNoParent;
                        orphans.push_back(q);
                    }
                    const int into_o = t == kS ? (a ^ 1) : a;
                    if (cap_[into_o] > 0) activate(q);
                }
                tree_[o] = kFree;
            }
        }
    }

    void require_solved() const {
        if (!solved_) throw Error("max-flow graph queried before solve()");
    }

    int n_;
    std::vector<int> head_, next_, to_;
    std::vector<std::int64_t> cap_;
    std::vector<std::int64_t> tr_cap_;
    std::vector<signed char> tree_;
    std::vector<int> parent_;
    std::vector<std::uint64_t> ts_;
    std::vector<int> dist_;
    std::int64_t offset_ = 0;
    std::int64_t flow_ = 0;
    bool solved_ = false;
};

}  // namespace dropflow
