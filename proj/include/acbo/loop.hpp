#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "acbo/dag.hpp"
#include "acbo/indep.hpp"
#include "acbo/oracle.hpp"

namespace acbo {

// Belief vector over the candidate graphs. Renormalized after every update;
// weights stay nonnegative and sum to one within 1e-12.
struct Posterior {
    std::vector<double> weights;

    static Posterior uniform(int n);
    void renormalize();        // throws ContradictionError on zero total mass
    int argmax() const;        // lowest index wins ties
    double max_mass() const;
};

enum class StopRule { MapThreshold, EntropyThreshold };

struct AcboConfig {
    int budget_t = 20;         // max rounds T
    double explore_eps = 0.1;  // random exploration fraction
    double eta = 0.1;          // per-vote error parameter of the update
    double stop_delta = 0.01;  // delta_c
    int votes_m = 3;           // majority votes per query
    int candidates_n = 8;      // hypothesis count N
    StopRule stop_rule = StopRule::MapThreshold;

    void validate() const;
};

struct RoundLog {
    int round_index = 0;
    VarPair chosen_pair;
    double ig_score = 0.0;  // bits
    bool was_random = false;
    OracleResponse response;
    Posterior posterior_after;

    std::string to_jsonl() const;
};

struct RunResult {
    Dag map_graph;
    double map_mass = 0.0;
    int rounds_used = 0;
    std::vector<RoundLog> trajectory;
    bool converged = false;
    StopRule stop_rule = StopRule::MapThreshold;

    std::string summary_json(const std::string& instance_id, std::uint64_t seed) const;
};

// The loop's failure modes, with the trajectory up to the failing round.
struct RunAbort : std::runtime_error {
    enum class Kind { Stall, Contradiction, Oracle };
    Kind kind;
    std::vector<RoundLog> trajectory;

    RunAbort(Kind k, const std::string& what, std::vector<RoundLog> t)
        : std::runtime_error(what), kind(k), trajectory(std::move(t)) {}
};

// No discriminating query remains and exploration is disabled.
struct StallError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Noise-free update where the observed answer contradicts every hypothesis.
struct ContradictionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fewer than two distinct consistent hypotheses: discovery is trivially done.
struct DegenerateHypothesisSpace : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shannon entropy in bits, 0 log 0 := 0.
double entropy(const Posterior& pi);

// P(r = 1) under the noisy-response model:
// sum_k pi_k [(1 - eta_eff) rhat_k + eta_eff (1 - rhat_k)].
double predictive_response_prob(const Posterior& pi, const std::vector<int>& preds,
                                double eta_eff);

// Expected entropy drop of one noisy query: H(pi) - sum_r P(r) H(pi | r).
double information_gain(const Posterior& pi, const std::vector<int>& preds, double eta_eff);

// Multiplicative update with likelihood (1-eta) on agreement, eta otherwise,
// then exact renormalization.
Posterior bayes_update(const Posterior& pi, const std::vector<int>& preds, int r_obs,
                       double eta_eff);

struct InterventionChoice {
    VarPair pair;
    double ig_score = 0.0;
    bool was_random = false;
};

// With probability eps a uniformly random valid ordered pair; otherwise the
// IG-maximizing pair, ties broken by lowest (source, sink). Zero-IG pairs are
// reachable only through the random branch; throws StallError when eps == 0
// and no pair carries positive gain.
InterventionChoice select_intervention(const Posterior& pi, const std::vector<Dag>& hypotheses,
                                       double eta_eff, double eps, Rng& rng);

enum class HypothesisMode { Exact, Sampled, OracleLlm };

struct HypothesisSet {
    std::vector<Dag> dags;
    int truth_index = -1;      // position of the forced truth, if any
    bool truth_forced = false; // true when the truth had to be inserted
};

// Phase 1: candidate graphs consistent with the premise. Exact mode returns
// the full consistent set when it fits in n, else a seeded uniform sample.
// include_truth is for bound-verification experiments; its forced presence is
// recorded. Throws DegenerateHypothesisSpace when fewer than 2 distinct
// candidates exist.
HypothesisSet generate_hypotheses(const PremiseSet& p, int n, HypothesisMode mode,
                                  const std::optional<Dag>& include_truth,
                                  std::uint64_t rng_seed,
                                  int enum_cap = kDefaultEnumCap,
                                  const SampledSearchConfig& search = {});

// Phase 1 in LLM mode: `complete` maps a generation prompt to the raw model
// reply; proposed graphs are parsed from JSON, filtered for consistency and
// padded to n via sampled search.
HypothesisSet generate_hypotheses_llm(const PremiseSet& p, const std::string& premise_text,
                                      const std::vector<std::string>& names, int n,
                                      const std::function<std::string(const std::string&)>& complete,
                                      std::uint64_t rng_seed,
                                      const SampledSearchConfig& search = {});

std::string render_generation_prompt(const std::string& premise_text,
                                     const std::vector<std::string>& names, int n);

struct RunInputs {
    std::string instance_id;
    std::string premise_text;     // may be empty for synthetic experiments
    std::vector<Dag> hypotheses;  // >= 2, shared variable set
};

// Phase 2: the discrimination loop. Each round scores interventions, queries
// the oracle once, and applies the Bayesian update; stops early when the stop
// rule fires. Oracle/stall/contradiction failures raise RunAbort with the
// trajectory so far.
RunResult run_acbo(const RunInputs& inputs, InterventionOracle& oracle,
                   const AcboConfig& cfg, std::uint64_t rng_seed);

struct TheoreticalBound {
    int rounds;           // T* = ceil(log n / log((1-eta)/eta))
    double success_floor; // 1 - n * eta^T*
};

TheoreticalBound theoretical_rounds(int n, double eta);

}  // namespace acbo
