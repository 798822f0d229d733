#include "acbo/dag.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <unordered_set>

#include "acbo/rng.hpp"
#include "json.hpp"

namespace acbo {

namespace {

void check_var_count(int d) {
    if (d < 1 || d > kMaxVars) {
        throw InputError("variable count out of range: " + std::to_string(d));
    }
}

}  // namespace

const char* relation_name(RelationType t) {
    switch (t) {
        case RelationType::Parent: return "parent";
        case RelationType::Child: return "child";
        case RelationType::Ancestor: return "ancestor";
        case RelationType::Descendant: return "descendant";
        case RelationType::Collider: return "collider";
        case RelationType::Confounder: return "confounder";
    }
    return "?";
}

std::optional<RelationType> relation_from_name(const std::string& name) {
    for (int i = 0; i < kNumRelationTypes; ++i) {
        const auto t = static_cast<RelationType>(i);
        if (name == relation_name(t)) return t;
    }
    return std::nullopt;
}

std::string var_name(int index) {
    std::string s(1, static_cast<char>('A' + index % 26));
    if (index >= 26) s += std::to_string(index / 26);
    return s;
}

std::vector<std::string> default_var_names(int d) {
    std::vector<std::string> names;
    names.reserve(d);
    for (int i = 0; i < d; ++i) names.push_back(var_name(i));
    return names;
}

Dag::Dag(int num_vars, std::vector<std::string> names,
         const std::vector<std::pair<int, int>>& edges)
    : d_(num_vars), names_(std::move(names)), parents_(num_vars, 0), children_(num_vars, 0) {
    check_var_count(d_);
    if (static_cast<int>(names_.size()) != d_) {
        throw InputError("name list length does not match variable count");
    }
    std::unordered_set<std::string> seen(names_.begin(), names_.end());
    if (static_cast<int>(seen.size()) != d_) {
        throw InputError("variable names must be unique");
    }
    for (const auto& [from, to] : edges) {
        if (from < 0 || from >= d_ || to < 0 || to >= d_) {
            throw InputError("edge index out of range");
        }
        if (from == to) throw InputError("self-edge not allowed");
        children_[from] |= var_bit(to);
        parents_[to] |= var_bit(from);
    }
    topological_order(*this);  // throws StructuralError on a cycle
}

Dag::Dag(int num_vars, const std::vector<std::pair<int, int>>& edges)
    : Dag(num_vars, default_var_names(num_vars), edges) {}

int Dag::edge_count() const {
    int n = 0;
    for (VarMask m : children_) n += std::popcount(m);
    return n;
}

std::vector<std::pair<int, int>> Dag::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count());
    for (int i = 0; i < d_; ++i) {
        for (int j = 0; j < d_; ++j) {
            if (has_edge(i, j)) out.emplace_back(i, j);
        }
    }
    return out;
}

std::string Dag::to_json() const {
    nlohmann::json j;
    j["d"] = d_;
    j["names"] = names_;
    auto arr = nlohmann::json::array();
    for (const auto& [from, to] : edges()) {
        arr.push_back({from, to});
    }
    j["edges"] = std::move(arr);
    return j.dump();
}

Dag Dag::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad DAG json: ") + e.what());
    }
    if (!j.contains("d") || !j.contains("names") || !j.contains("edges")) {
        throw DataError("DAG json missing required field (d/names/edges)");
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw DataError("DAG edge must be [src, dst]");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return Dag(j.at("d").get<int>(), j.at("names").get<std::vector<std::string>>(), edges);
}

std::vector<int> topological_order(const Dag& g) {
    const int d = g.num_vars();
    std::vector<int> indegree(d);
    for (int v = 0; v < d; ++v) indegree[v] = std::popcount(g.parents(v));

    std::vector<int> order;
    order.reserve(d);
    VarMask placed = 0;
    for (int step = 0; step < d; ++step) {
        int pick = -1;
        for (int v = 0; v < d; ++v) {
            if (!(placed & var_bit(v)) && indegree[v] == 0) {
                pick = v;
                break;
            }
        }
        if (pick < 0) throw StructuralError("cycle detected in DAG");
        placed |= var_bit(pick);
        order.push_back(pick);
        for (int w = 0; w < d; ++w) {
            if (g.has_edge(pick, w)) --indegree[w];
        }
    }
    return order;
}

VarMask descendants(const Dag& g, int i) {
    if (i < 0 || i >= g.num_vars()) throw InputError("variable index out of range");
    VarMask frontier = g.children(i);
    VarMask reach = 0;
    while (frontier) {
        reach |= frontier;
        VarMask next = 0;
        VarMask f = frontier;
        while (f) {
            const int v = std::countr_zero(f);
            f &= f - 1;
            next |= g.children(v);
        }
        frontier = next & ~reach;
    }
    return reach & ~var_bit(i);
}

Dag mutilate(const Dag& g, Intervention iv) {
    if (iv.target < 0 || iv.target >= g.num_vars()) {
        throw InputError("intervention target out of range");
    }
    Dag out;
    out.d_ = g.num_vars();
    out.names_ = g.var_names();
    out.parents_ = g.parents_;
    out.children_ = g.children_;
    VarMask cut = out.parents_[iv.target];
    out.parents_[iv.target] = 0;
    while (cut) {
        const int p = std::countr_zero(cut);
        cut &= cut - 1;
        out.children_[p] &= ~var_bit(iv.target);
    }
    return out;
}

int r_hat(const Dag& g, VarPair pair) {
    if (pair.source == pair.sink) throw InputError("r_hat pair must be distinct");
    return (descendants(g, pair.source) & var_bit(pair.sink)) ? 1 : 0;
}

std::vector<VarMask> reachability_matrix(const Dag& g) {
    std::vector<VarMask> rows(g.num_vars());
    for (int i = 0; i < g.num_vars(); ++i) rows[i] = descendants(g, i);
    return rows;
}

std::set<VarPair> discrimination_set(const Dag& g_plus, const Dag& g_minus) {
    if (g_plus.num_vars() != g_minus.num_vars() ||
        g_plus.var_names() != g_minus.var_names()) {
        throw InputError("discrimination_set requires the same variable set");
    }
    std::set<VarPair> out;
    const auto ra = reachability_matrix(g_plus);
    const auto rb = reachability_matrix(g_minus);
    for (int i = 0; i < g_plus.num_vars(); ++i) {
        VarMask diff = ra[i] ^ rb[i];
        while (diff) {
            const int j = std::countr_zero(diff);
            diff &= diff - 1;
            out.insert(VarPair{i, j});
        }
    }
    return out;
}

namespace {

// Recursive enumeration over the d*(d-1) ordered pairs, keeping an incremental
// transitive closure. A branch that would close a cycle is pruned; adding more
// edges never removes the cycle, so pruning is exact.
struct DagEnumerator {
    int d;
    const std::function<void(const Dag&)>& visit;
    std::vector<std::pair<int, int>> slots;   // candidate edges
    std::vector<std::pair<int, int>> chosen;
    std::vector<VarMask> reach;               // reach[u]: nodes reachable from u
    std::vector<std::string> names;

    void run() {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                if (i != j) slots.emplace_back(i, j);
            }
        }
        reach.assign(d, 0);
        names = default_var_names(d);
        step(0);
    }

    void step(std::size_t k) {
        if (k == slots.size()) {
            visit(Dag(d, names, chosen));
            return;
        }
        step(k + 1);  // edge absent

        const auto [i, j] = slots[k];
        if (reach[j] & var_bit(i)) return;  // i -> j would close a cycle
        const auto saved = reach;
        const VarMask add = reach[j] | var_bit(j);
        for (int u = 0; u < d; ++u) {
            if (u == i || (reach[u] & var_bit(i))) reach[u] |= add;
        }
        chosen.emplace_back(i, j);
        step(k + 1);
        chosen.pop_back();
        reach = saved;
    }
};

}  // namespace

void for_each_dag(int d, const std::function<void(const Dag&)>& visit, int enum_cap) {
    check_var_count(d);
    if (d > enum_cap) {
        throw CapacityError("exhaustive DAG enumeration capped at d=" +
                            std::to_string(enum_cap) +
                            " (got d=" + std::to_string(d) + "); use sampled mode");
    }
    DagEnumerator e{d, visit, {}, {}, {}, {}};
    e.run();
}

std::vector<Dag> enumerate_dags(int d, int enum_cap) {
    std::vector<Dag> out;
    for_each_dag(d, [&](const Dag& g) { out.push_back(g); }, enum_cap);
    return out;
}

Dag random_dag(int d, double edge_prob, std::uint64_t rng_seed) {
    check_var_count(d);
    if (edge_prob < 0.0 || edge_prob > 1.0) {
        throw InputError("edge_prob must be in [0, 1]");
    }
    Rng rng(rng_seed);
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (rng.bernoulli(edge_prob)) edges.emplace_back(order[i], order[j]);
        }
    }
    return Dag(d, edges);
}

bool relation_holds(const Dag& g, RelationType t, int a, int b) {
    if (a == b) throw InputError("relation endpoints must be distinct");
    if (a < 0 || a >= g.num_vars() || b < 0 || b >= g.num_vars()) {
        throw InputError("relation endpoint out of range");
    }
    switch (t) {
        case RelationType::Parent:
            return g.has_edge(a, b);
        case RelationType::Child:
            return g.has_edge(b, a);
        case RelationType::Ancestor:
            return !g.has_edge(a, b) && (descendants(g, a) & var_bit(b));
        case RelationType::Descendant:
            return !g.has_edge(b, a) && (descendants(g, b) & var_bit(a));
        case RelationType::Collider:
            return (g.children(a) & g.children(b)) != 0;
        case RelationType::Confounder:
            return (g.parents(a) & g.parents(b)) != 0;
    }
    throw InputError("unknown relation template");
}

}  // namespace acbo
