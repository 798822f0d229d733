#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "acbo/errors.hpp"

namespace acbo {

// Hard ceiling on variable count: one 32-bit mask per adjacency row. Serialized
// datasets go up to d = 28; exhaustive enumeration is capped far lower.
inline constexpr int kMaxVars = 30;

// Exhaustive DAG enumeration cap. 5 -> 29,281 graphs; 6 (3,781,503) is allowed
// only when the caller raises the cap explicitly.
inline constexpr int kDefaultEnumCap = 5;

using VarMask = std::uint32_t;

inline VarMask var_bit(int i) { return VarMask{1} << i; }

struct Intervention {
    int target = 0;  // the variable forced to a constant; incoming edges are cut
};

struct VarPair {
    int source = 0;
    int sink = 0;

    friend bool operator==(const VarPair&, const VarPair&) = default;
    friend auto operator<=>(const VarPair&, const VarPair&) = default;
};

enum class RelationType {
    Parent,      // direct cause: edge a -> b
    Child,       // direct effect: edge b -> a
    Ancestor,    // indirect cause: directed path a ~> b, edge a -> b absent
    Descendant,  // indirect effect: directed path b ~> a, edge b -> a absent
    Collider,    // common effect: some c with a -> c <- b
    Confounder,  // common cause: some c with a <- c -> b
};

inline constexpr int kNumRelationTypes = 6;

const char* relation_name(RelationType t);
std::optional<RelationType> relation_from_name(const std::string& name);

// Variable naming policy: A..Z, then A1, B1, ...
std::string var_name(int index);
std::vector<std::string> default_var_names(int d);

// Immutable directed acyclic graph over d named variables. Adjacency is kept
// as one parent mask and one child mask per variable; construction validates
// acyclicity, self-edges and name uniqueness.
class Dag {
  public:
    // Empty placeholder (num_vars() == 0); usable only after assignment.
    Dag() = default;

    Dag(int num_vars, std::vector<std::string> names,
        const std::vector<std::pair<int, int>>& edges);

    // Convenience: default names.
    Dag(int num_vars, const std::vector<std::pair<int, int>>& edges);

    int num_vars() const { return d_; }
    const std::vector<std::string>& var_names() const { return names_; }

    bool has_edge(int from, int to) const {
        return (children_[from] & var_bit(to)) != 0;
    }
    VarMask parents(int v) const { return parents_[v]; }
    VarMask children(int v) const { return children_[v]; }
    int edge_count() const;

    // Edges as sorted (src, dst) pairs, the serialization order.
    std::vector<std::pair<int, int>> edges() const;

    // JSON object {"d": int, "names": [...], "edges": [[src, dst], ...]}.
    std::string to_json() const;
    static Dag from_json(const std::string& text);

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.d_ == b.d_ && a.names_ == b.names_ && a.children_ == b.children_;
    }

  private:
    friend Dag mutilate(const Dag&, Intervention);

    int d_ = 0;
    std::vector<std::string> names_;
    std::vector<VarMask> parents_;
    std::vector<VarMask> children_;
};

// Deterministic topological order, lowest eligible index first.
// Throws StructuralError if a cycle is present (corrupted construction).
std::vector<int> topological_order(const Dag& g);

// All variables reachable from i by a directed path, i itself excluded.
VarMask descendants(const Dag& g, int i);

// Severs every edge into the intervention target; all other edges unchanged.
Dag mutilate(const Dag& g, Intervention iv);

// Graph-mutilation prediction: does `pair.sink` change under do(source)?
// Equals reachability in g itself (mutilation only cuts edges into the source).
int r_hat(const Dag& g, VarPair pair);

// Ordered pairs on which the two graphs' interventional predictions differ.
std::set<VarPair> discrimination_set(const Dag& g_plus, const Dag& g_minus);

// Full d x d reachability signature, row i = descendants(g, i). Two graphs are
// interventionally indistinguishable iff their signatures are equal.
std::vector<VarMask> reachability_matrix(const Dag& g);

// Visit every labeled DAG on d nodes exactly once (deterministic order).
// Throws CapacityError when d exceeds `enum_cap`.
void for_each_dag(int d, const std::function<void(const Dag&)>& visit,
                  int enum_cap = kDefaultEnumCap);

// Materialized enumeration; prefer for_each_dag for large d.
std::vector<Dag> enumerate_dags(int d, int enum_cap = kDefaultEnumCap);

// Random DAG: uniform random topological order, then each forward edge
// independently with probability edge_prob. Deterministic for a fixed seed.
Dag random_dag(int d, double edge_prob, std::uint64_t rng_seed);

// The six causal relation templates over an ordered variable pair.
bool relation_holds(const Dag& g, RelationType t, int a, int b);

}  // namespace acbo
