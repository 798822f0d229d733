#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "acbo/dag.hpp"

namespace acbo {

// One conditional (in)dependence fact. Pairs are canonical (x < y), the
// conditioning set is sorted and disjoint from {x, y}.
struct CiStatement {
    int x = 0;
    int y = 0;
    std::vector<int> cond;
    bool independent = false;

    friend bool operator==(const CiStatement&, const CiStatement&) = default;
};

struct PremiseSet {
    int num_vars = 0;
    std::vector<CiStatement> statements;

    friend bool operator==(const PremiseSet&, const PremiseSet&) = default;
};

// Throws InputError on invariant violations (duplicate triples, bad indices).
void validate_premise(const PremiseSet& p);

struct Hypothesis {
    RelationType relation = RelationType::Parent;
    int a = 0;
    int b = 0;

    friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

// Markov equivalence class identity: shared skeleton + v-structures.
struct MecDescriptor {
    std::set<std::pair<int, int>> skeleton;                 // unordered edges, (lo, hi)
    std::set<std::tuple<int, int, int>> v_structures;       // (parent1, collider, parent2), p1 < p2

    friend bool operator==(const MecDescriptor&, const MecDescriptor&) = default;
};

// d-separation via reachability in the moralized ancestral subgraph.
bool d_separated(const Dag& g, int x, int y, VarMask cond);
bool d_separated(const Dag& g, int x, int y, const std::vector<int>& cond);

// Every canonical pair x < y, every conditioning subset of size <= max_cond,
// in (pair-major, subset-size-minor, lexicographic) order.
std::vector<CiStatement> all_ci_statements(const Dag& g, int max_cond);

MecDescriptor mec_descriptor(const Dag& g);
bool markov_equivalent(const Dag& g1, const Dag& g2);

// Does g reproduce every statement of p exactly?
bool premise_consistent(const Dag& g, const PremiseSet& p);

enum class SearchMode { Exact, Sampled };

struct SampledSearchConfig {
    int restarts_per_dag = 200;
    int max_moves = 24;       // greedy repair steps per restart
    int max_candidates = 48;  // toggles scored per repair step
};

// Exact mode: every DAG on num_vars nodes consistent with p (requires
// num_vars <= enum_cap). Sampled mode: up to `budget` distinct consistent
// DAGs from seeded randomized search; empty result means none were found.
std::vector<Dag> consistent_dags(const PremiseSet& p, SearchMode mode, int budget,
                                 std::uint64_t rng_seed,
                                 int enum_cap = kDefaultEnumCap,
                                 const SampledSearchConfig& cfg = {});

// 1 iff the relation holds in every consistent DAG, else 0.
// Throws UnsatisfiablePremise when no consistent DAG exists (exact mode) or
// none was found within budget (sampled mode).
int entails(const PremiseSet& p, const Hypothesis& h, SearchMode mode, int budget,
            std::uint64_t rng_seed, int enum_cap = kDefaultEnumCap,
            const SampledSearchConfig& cfg = {});

// Shared, lazily built enumeration cache (exact labeling iterates it a lot).
const std::vector<Dag>& all_dags_cached(int d, int enum_cap = kDefaultEnumCap);

// ---- Premise text rendering / parsing -------------------------------------

// Selection policy for the independence statements of a rendered premise.
// All marginal statements are always included; conditional independencies are
// given one minimal separating set each (smallest, lexicographically first),
// and the number of conditional sentences is capped to keep premise length
// O(d^2) tokens. full_ci switches to the exhaustive listing used for small d.
struct CiPolicy {
    int max_sep_size = 3;
    int max_conditional = -1;  // -1: ceil(d/3); large value: uncapped
    bool full_ci = false;
    int full_max_cond = -1;    // -1: d - 2
};

struct RenderedPremise {
    std::string text;
    PremiseSet premise;
};

// English premise text:
//   "Suppose there is a closed system of <d> variables <list>."
//   one "X correlates with Y." per marginally dependent pair (canonical order)
//   "However, X and Y are independent[ given ...]." block for independencies
// Sentences are joined by single spaces; returns the text and the exact
// statement set it encodes.
RenderedPremise render_premise(const Dag& g, const CiPolicy& policy = {});

struct ParsedPremise {
    PremiseSet premise;
    std::vector<std::string> names;
};

// Inverse of render_premise on its own output; also accepts the original
// benchmark phrasing with the optional "All the statistical relations ..."
// sentence. Throws DataError with the 1-based sentence index on bad input.
ParsedPremise parse_premise(const std::string& text);

}  // namespace acbo
