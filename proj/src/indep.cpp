#include "acbo/indep.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <mutex>
#include <numeric>

#include "acbo/rng.hpp"

namespace acbo {

namespace {

VarMask cond_mask(const std::vector<int>& cond) {
    VarMask m = 0;
    for (int v : cond) m |= var_bit(v);
    return m;
}

// d-separation core over raw adjacency masks (shared with the sampled search,
// which works on mutable mask arrays rather than Dag values).
bool dsep_masks(const VarMask* parents, const VarMask* children,
                int d, int x, int y, VarMask cond) {
    // Ancestral closure of {x, y} + cond.
    VarMask anc = var_bit(x) | var_bit(y) | cond;
    for (;;) {
        VarMask add = 0;
        VarMask m = anc;
        while (m) {
            const int v = std::countr_zero(m);
            m &= m - 1;
            add |= parents[v];
        }
        if ((add | anc) == anc) break;
        anc |= add;
    }

    // Moralize: undirected adjacency within the ancestral set, plus marriages
    // between co-parents. Parents of ancestral nodes are ancestral themselves.
    VarMask und[kMaxVars] = {};
    VarMask m = anc;
    while (m) {
        const int v = std::countr_zero(m);
        m &= m - 1;
        und[v] |= parents[v] | (children[v] & anc);
        VarMask ps = parents[v];
        while (ps) {
            const int p = std::countr_zero(ps);
            ps &= ps - 1;
            und[p] |= parents[v] & ~var_bit(p);
        }
    }

    // Reachability from x, never entering the conditioning set.
    VarMask visited = var_bit(x);
    VarMask frontier = visited;
    while (frontier) {
        VarMask next = 0;
        VarMask f = frontier;
        while (f) {
            const int v = std::countr_zero(f);
            f &= f - 1;
            next |= und[v];
        }
        next &= anc & ~cond & ~visited;
        if (next & var_bit(y)) return false;
        visited |= next;
        frontier = next;
    }
    return true;
}

void check_dsep_query(int d, int x, int y, VarMask cond) {
    if (x < 0 || x >= d || y < 0 || y >= d) throw InputError("d_separated: index out of range");
    if (x == y) throw InputError("d_separated: x and y must differ");
    if (cond & (var_bit(x) | var_bit(y))) {
        throw InputError("d_separated: conditioning set must exclude x and y");
    }
    if (cond >> d) throw InputError("d_separated: conditioning index out of range");
}

// Lexicographic enumeration of size-k subsets of `items`.
void for_each_combination(const std::vector<int>& items, int k,
                          const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    if (k > static_cast<int>(items.size())) return;
    std::vector<int> cur(k);
    for (;;) {
        for (int i = 0; i < k; ++i) cur[i] = items[idx[i]];
        fn(cur);
        int i = k - 1;
        while (i >= 0 && idx[i] == static_cast<int>(items.size()) - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

void validate_premise(const PremiseSet& p) {
    if (p.num_vars < 1 || p.num_vars > kMaxVars) throw InputError("premise: bad variable count");
    std::set<std::tuple<int, int, std::vector<int>>> seen;
    for (const auto& s : p.statements) {
        if (s.x < 0 || s.y < 0 || s.x >= p.num_vars || s.y >= p.num_vars) {
            throw InputError("premise: statement index out of range");
        }
        if (s.x >= s.y) throw InputError("premise: statement pair must be canonical (x < y)");
        for (int c : s.cond) {
            if (c < 0 || c >= p.num_vars) throw InputError("premise: conditioning index out of range");
            if (c == s.x || c == s.y) throw InputError("premise: conditioning set overlaps pair");
        }
        if (!std::is_sorted(s.cond.begin(), s.cond.end())) {
            throw InputError("premise: conditioning set must be sorted");
        }
        if (!seen.insert({s.x, s.y, s.cond}).second) {
            throw InputError("premise: duplicate statement triple");
        }
    }
}

bool d_separated(const Dag& g, int x, int y, VarMask cond) {
    check_dsep_query(g.num_vars(), x, y, cond);
    // Stack copies: this sits on the hot path of exhaustive labeling.
    VarMask parents[kMaxVars], children[kMaxVars];
    for (int v = 0; v < g.num_vars(); ++v) {
        parents[v] = g.parents(v);
        children[v] = g.children(v);
    }
    return dsep_masks(parents, children, g.num_vars(), x, y, cond);
}

bool d_separated(const Dag& g, int x, int y, const std::vector<int>& cond) {
    return d_separated(g, x, y, cond_mask(cond));
}

std::vector<CiStatement> all_ci_statements(const Dag& g, int max_cond) {
    const int d = g.num_vars();
    if (max_cond > d - 2) throw InputError("all_ci_statements: max_cond exceeds d - 2");
    std::vector<CiStatement> out;
    for (int x = 0; x < d; ++x) {
        for (int y = x + 1; y < d; ++y) {
            std::vector<int> others;
            for (int v = 0; v < d; ++v) {
                if (v != x && v != y) others.push_back(v);
            }
            for (int size = 0; size <= max_cond; ++size) {
                for_each_combination(others, size, [&](const std::vector<int>& s) {
                    out.push_back(CiStatement{x, y, s, d_separated(g, x, y, cond_mask(s))});
                });
            }
        }
    }
    return out;
}

MecDescriptor mec_descriptor(const Dag& g) {
    MecDescriptor out;
    const int d = g.num_vars();
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (g.has_edge(i, j) || g.has_edge(j, i)) out.skeleton.insert({i, j});
        }
    }
    for (int c = 0; c < d; ++c) {
        VarMask ps = g.parents(c);
        std::vector<int> parents;
        while (ps) {
            parents.push_back(std::countr_zero(ps));
            ps &= ps - 1;
        }
        for (std::size_t i = 0; i < parents.size(); ++i) {
            for (std::size_t j = i + 1; j < parents.size(); ++j) {
                const int a = parents[i], b = parents[j];
                if (!g.has_edge(a, b) && !g.has_edge(b, a)) {
                    out.v_structures.insert({a, c, b});
                }
            }
        }
    }
    return out;
}

bool markov_equivalent(const Dag& g1, const Dag& g2) {
    if (g1.num_vars() != g2.num_vars() || g1.var_names() != g2.var_names()) {
        throw InputError("markov_equivalent requires the same variable set");
    }
    return mec_descriptor(g1) == mec_descriptor(g2);
}

bool premise_consistent(const Dag& g, const PremiseSet& p) {
    if (g.num_vars() != p.num_vars) return false;
    for (const auto& s : p.statements) {
        if (d_separated(g, s.x, s.y, cond_mask(s.cond)) != s.independent) return false;
    }
    return true;
}

const std::vector<Dag>& all_dags_cached(int d, int enum_cap) {
    static std::mutex mu;
    static std::map<int, std::vector<Dag>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(d);
    if (it == cache.end()) {
        it = cache.emplace(d, enumerate_dags(d, enum_cap)).first;
    }
    return it->second;
}

namespace {

// One randomized-search restart: random topological order, skeleton-style
// initialization from the premise, greedy single-edge repair. Edges are kept
// order-consistent, so acyclicity holds throughout.
struct SampledSearcher {
    const PremiseSet& p;
    const SampledSearchConfig& cfg;
    int d;
    std::vector<VarMask> parents, children;
    std::vector<int> pos;  // pos[v] = rank in the sampled order
    std::vector<VarMask> stmt_cond;

    explicit SampledSearcher(const PremiseSet& premise, const SampledSearchConfig& config)
        : p(premise), cfg(config), d(premise.num_vars), parents(d), children(d), pos(d) {
        stmt_cond.reserve(p.statements.size());
        for (const auto& s : p.statements) stmt_cond.push_back(cond_mask(s.cond));
    }

    bool stmt_ok(std::size_t i) const {
        const auto& s = p.statements[i];
        return dsep_masks(parents.data(), children.data(), d, s.x, s.y, stmt_cond[i]) ==
               s.independent;
    }

    std::vector<std::size_t> violated() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < p.statements.size(); ++i) {
            if (!stmt_ok(i)) out.push_back(i);
        }
        return out;
    }

    void set_edge(int u, int v, bool present) {
        if (present) {
            children[u] |= var_bit(v);
            parents[v] |= var_bit(u);
        } else {
            children[u] &= ~var_bit(v);
            parents[v] &= ~var_bit(u);
        }
    }

    // Orders (u, v) by the sampled topological order.
    std::pair<int, int> oriented(int a, int b) const {
        return pos[a] < pos[b] ? std::pair{a, b} : std::pair{b, a};
    }

    bool attempt(Rng& rng, std::vector<VarMask>& out_children) {
        std::vector<int> order(d);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        for (int r = 0; r < d; ++r) pos[order[r]] = r;

        std::fill(parents.begin(), parents.end(), 0);
        std::fill(children.begin(), children.end(), 0);

        // Init: connect pairs stated marginally dependent with no independence
        // statement at any conditioning set (those pairs cannot be adjacent).
        std::vector<std::pair<bool, bool>> pair_info(d * d, {false, false});  // (dep_marginal, any_indep)
        for (const auto& s : p.statements) {
            auto& info = pair_info[s.x * d + s.y];
            if (s.independent) {
                info.second = true;
            } else if (s.cond.empty()) {
                info.first = true;
            }
        }
        for (int x = 0; x < d; ++x) {
            for (int y = x + 1; y < d; ++y) {
                const auto& info = pair_info[x * d + y];
                if (info.first && !info.second) {
                    const auto [u, v] = oriented(x, y);
                    set_edge(u, v, true);
                }
            }
        }

        auto bad = violated();
        for (int move = 0; move < cfg.max_moves && !bad.empty(); ++move) {
            // Candidate toggles touching the violated statements.
            std::vector<std::pair<int, int>> cands;
            std::set<std::pair<int, int>> seen;
            auto add_cand = [&](int a, int b) {
                if (a == b) return;
                const auto e = oriented(a, b);
                if (seen.insert(e).second) cands.push_back(e);
            };
            for (std::size_t idx : bad) {
                const auto& s = p.statements[idx];
                add_cand(s.x, s.y);
                for (int v = 0; v < d; ++v) {
                    add_cand(s.x, v);
                    add_cand(s.y, v);
                }
                for (int c : s.cond) {
                    for (int v = 0; v < d; ++v) add_cand(c, v);
                }
                if (static_cast<int>(cands.size()) > 4 * cfg.max_candidates) break;
            }
            if (static_cast<int>(cands.size()) > cfg.max_candidates) {
                rng.shuffle(cands);
                cands.resize(cfg.max_candidates);
            }

            // Cheap prefilter: how many currently violated statements would the
            // toggle fix? Full recount only for the best few.
            std::vector<std::pair<int, std::size_t>> scored;
            for (std::size_t ci = 0; ci < cands.size(); ++ci) {
                const auto [u, v] = cands[ci];
                const bool present = (children[u] & var_bit(v)) != 0;
                set_edge(u, v, !present);
                int fixed = 0;
                for (std::size_t idx : bad) {
                    if (stmt_ok(idx)) ++fixed;
                }
                set_edge(u, v, present);
                if (fixed > 0) scored.push_back({fixed, ci});
            }
            std::stable_sort(scored.begin(), scored.end(),
                             [](const auto& a, const auto& b) { return a.first > b.first; });

            bool accepted = false;
            const std::size_t tries = std::min<std::size_t>(scored.size(), 3);
            for (std::size_t t = 0; t < tries; ++t) {
                const auto [u, v] = cands[scored[t].second];
                const bool present = (children[u] & var_bit(v)) != 0;
                set_edge(u, v, !present);
                auto nb = violated();
                if (nb.size() < bad.size()) {
                    bad = std::move(nb);
                    accepted = true;
                    break;
                }
                set_edge(u, v, present);
            }
            if (!accepted) return false;
        }
        if (!bad.empty()) return false;
        out_children = children;
        return true;
    }
};

Dag dag_from_children(int d, const std::vector<VarMask>& children) {
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < d; ++u) {
        VarMask m = children[u];
        while (m) {
            edges.emplace_back(u, std::countr_zero(m));
            m &= m - 1;
        }
    }
    return Dag(d, edges);
}

}  // namespace

std::vector<Dag> consistent_dags(const PremiseSet& p, SearchMode mode, int budget,
                                 std::uint64_t rng_seed, int enum_cap,
                                 const SampledSearchConfig& cfg) {
    validate_premise(p);
    std::vector<Dag> out;
    if (mode == SearchMode::Exact) {
        for (const Dag& g : all_dags_cached(p.num_vars, enum_cap)) {
            if (premise_consistent(g, p)) out.push_back(g);
        }
        return out;
    }

    SampledSearcher searcher(p, cfg);
    Rng rng(rng_seed);
    std::set<std::vector<VarMask>> found;
    const long attempts = static_cast<long>(budget) * cfg.restarts_per_dag;
    std::vector<VarMask> children;
    for (long i = 0; i < attempts && static_cast<int>(out.size()) < budget; ++i) {
        if (searcher.attempt(rng, children) && found.insert(children).second) {
            out.push_back(dag_from_children(p.num_vars, children));
        }
    }
    return out;
}

int entails(const PremiseSet& p, const Hypothesis& h, SearchMode mode, int budget,
            std::uint64_t rng_seed, int enum_cap, const SampledSearchConfig& cfg) {
    validate_premise(p);
    if (h.a == h.b) throw InputError("hypothesis endpoints must be distinct");

    if (mode == SearchMode::Exact) {
        bool any = false;
        for (const Dag& g : all_dags_cached(p.num_vars, enum_cap)) {
            if (!premise_consistent(g, p)) continue;
            any = true;
            if (!relation_holds(g, h.relation, h.a, h.b)) return 0;
        }
        if (!any) throw UnsatisfiablePremise("no DAG is consistent with the premise");
        return 1;
    }

    // Sampled: stream found DAGs, stop at the first counterexample.
    SampledSearcher searcher(p, cfg);
    Rng rng(rng_seed);
    std::set<std::vector<VarMask>> found;
    const long attempts = static_cast<long>(budget) * cfg.restarts_per_dag;
    std::vector<VarMask> children;
    for (long i = 0; i < attempts && static_cast<int>(found.size()) < budget; ++i) {
        if (searcher.attempt(rng, children) && found.insert(children).second) {
            const Dag g = dag_from_children(p.num_vars, children);
            if (!relation_holds(g, h.relation, h.a, h.b)) return 0;
        }
    }
    if (found.empty()) {
        throw UnsatisfiablePremise("sampled search found no consistent DAG within budget");
    }
    return 1;
}

}  // namespace acbo
