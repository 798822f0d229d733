#pragma once

// Test-only brute-force oracles. These stay independent of the library's
// implementation paths: reachability by naive DFS, d-separation by explicit
// path blocking, DAG enumeration by filtering all digraphs.

#include <set>
#include <vector>

#include "acbo/dag.hpp"
#include "acbo/indep.hpp"

namespace acbo::testing {

inline void brute_descendants_dfs(const Dag& g, int v, std::set<int>& out) {
    for (int w = 0; w < g.num_vars(); ++w) {
        if (g.has_edge(v, w) && !out.count(w)) {
            out.insert(w);
            brute_descendants_dfs(g, w, out);
        }
    }
}

inline std::set<int> brute_descendants(const Dag& g, int i) {
    std::set<int> out;
    brute_descendants_dfs(g, i, out);
    out.erase(i);
    return out;
}

// r_hat by the definitional route: mutilate, then reach from the source.
inline int brute_r_hat(const Dag& g, int source, int sink) {
    const Dag cut = mutilate(g, Intervention{source});
    return brute_descendants(cut, source).count(sink) ? 1 : 0;
}

inline std::set<VarPair> brute_discrimination_set(const Dag& a, const Dag& b) {
    std::set<VarPair> out;
    for (int i = 0; i < a.num_vars(); ++i) {
        for (int j = 0; j < a.num_vars(); ++j) {
            if (i != j && brute_r_hat(a, i, j) != brute_r_hat(b, i, j)) {
                out.insert(VarPair{i, j});
            }
        }
    }
    return out;
}

// Path-blocking d-separation: enumerate every simple undirected path between
// x and y; a path is active given Z iff each non-collider node avoids Z and
// each collider node has itself-or-a-descendant inside Z.
inline bool path_active(const Dag& g, const std::vector<int>& path, VarMask cond) {
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
        const int prev = path[k - 1], v = path[k], next = path[k + 1];
        const bool collider = g.has_edge(prev, v) && g.has_edge(next, v);
        if (collider) {
            VarMask group = var_bit(v);
            for (int d : brute_descendants(g, v)) group |= var_bit(d);
            if (!(group & cond)) return false;
        } else if (cond & var_bit(v)) {
            return false;
        }
    }
    return true;
}

inline bool find_active_path(const Dag& g, int y, VarMask cond, std::vector<int>& path,
                             VarMask visited) {
    const int u = path.back();
    if (u == y) return path_active(g, path, cond);
    for (int w = 0; w < g.num_vars(); ++w) {
        if (visited & var_bit(w)) continue;
        if (!g.has_edge(u, w) && !g.has_edge(w, u)) continue;
        path.push_back(w);
        if (find_active_path(g, y, cond, path, visited | var_bit(w))) return true;
        path.pop_back();
    }
    return false;
}

inline bool brute_d_separated(const Dag& g, int x, int y, VarMask cond) {
    std::vector<int> path{x};
    return !find_active_path(g, y, cond, path, var_bit(x));
}

// Labeled-DAG enumeration by filtering every digraph on d nodes (d <= 5).
inline std::vector<Dag> brute_enumerate_dags(int d) {
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i != j) slots.emplace_back(i, j);
        }
    }
    std::vector<Dag> out;
    const std::uint64_t total = std::uint64_t{1} << slots.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        std::vector<std::pair<int, int>> edges;
        for (std::size_t s = 0; s < slots.size(); ++s) {
            if (mask >> s & 1) edges.push_back(slots[s]);
        }
        try {
            out.emplace_back(d, edges);
        } catch (const StructuralError&) {
            // cyclic digraph: skipped
        }
    }
    return out;
}

// Full conditional-independence signature via the path-blocking oracle.
inline std::vector<bool> brute_ci_signature(const Dag& g) {
    const int d = g.num_vars();
    std::vector<bool> sig;
    for (int x = 0; x < d; ++x) {
        for (int y = x + 1; y < d; ++y) {
            const VarMask others = ((var_bit(d) - 1)) & ~var_bit(x) & ~var_bit(y);
            for (VarMask s = 0;; s = (s - others) & others) {
                sig.push_back(brute_d_separated(g, x, y, s));
                if (s == others) break;
            }
        }
    }
    return sig;
}

inline int brute_entails(const std::vector<Dag>& all_dags, const PremiseSet& p,
                         const Hypothesis& h) {
    bool any = false;
    for (const Dag& g : all_dags) {
        bool ok = true;
        for (const auto& st : p.statements) {
            VarMask cond = 0;
            for (int c : st.cond) cond |= var_bit(c);
            if (brute_d_separated(g, st.x, st.y, cond) != st.independent) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        any = true;
        if (!relation_holds(g, h.relation, h.a, h.b)) return 0;
    }
    if (!any) return -1;  // unsatisfiable
    return 1;
}

}  // namespace acbo::testing
