#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acbo/benchgen.hpp"
#include "acbo/loop.hpp"
#include "acbo/metrics.hpp"
#include "acbo/oracle.hpp"

namespace acbo {

struct ExperimentConfig {
    std::string dataset_path;
    std::string out_dir;
    std::uint64_t master_seed = 1;
    int trials = 1;   // loop repetitions per instance, majority-voted label
    int workers = 0;  // instance-level parallelism

    AcboConfig acbo;      // update parameters (eta feeds the likelihood)
    OracleConfig oracle;  // actual oracle behavior (simulated eta may differ)
    LlmEndpointConfig llm;

    int hypothesis_exact_cap = kDefaultEnumCap;  // exact Phase 1 at or below
    SampledSearchConfig search = SampledSearchConfig{24, 24, 48};
    bool force_include_truth = false;   // bound-verification experiments only
    bool posterior_weighted_rule = false;

    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    std::string to_json() const;
};

struct InstanceOutcome {
    PredictionRecord prediction;
    std::vector<RoundLog> trajectory;
    std::vector<TranscriptRecord> transcript;  // trial 0
};

// One instance end to end: Phase 1 hypothesis generation, Phase 2 loop,
// label = relation on the MAP graph (or the posterior-weighted rule).
// `replay` substitutes a recorded transcript for the oracle.
InstanceOutcome run_instance(const BenchInstance& inst, const ExperimentConfig& cfg,
                             const std::vector<TranscriptRecord>* replay = nullptr);

struct ExperimentOutcome {
    std::vector<PredictionRecord> predictions;  // sorted by instance id
    MetricsReport metrics;
};

// Runs every instance not already present in `done` (checkpoint resume),
// flushing each fresh prediction through `checkpoint_path` when non-empty and
// writing transcripts/trajectories under out_dir when configured. Oracle
// failures abort after flushing completed work.
ExperimentOutcome run_dataset(const std::vector<BenchInstance>& instances,
                              const ExperimentConfig& cfg,
                              const std::string& checkpoint_path = "",
                              const std::map<std::string, PredictionRecord>* done = nullptr);

// Random pairwise interventionally-distinguishable candidate DAGs (distinct
// reachability signatures).
std::vector<Dag> sample_distinguishable_hypotheses(int d, int n, double edge_prob,
                                                   std::uint64_t seed);

struct ConvergencePoint {
    int n = 0;
    double eta = 0.0;
    int tstar = 0;
    double floor = 0.0;          // 1 - n * eta^T*
    int trials = 0;
    double success_tstar = 0.0;  // MAP = truth after at most T* rounds
    double success_full = 0.0;   // MAP = truth at the end of the budget
    double mean_rounds = 0.0;    // rounds until stop
    double converged_fraction = 0.0;
};

struct ConvergenceOutcome {
    std::vector<ConvergencePoint> points;
    std::string trials_csv;      // one row per trial
    std::string trajectory_csv;  // mean posterior-vs-round curves
};

// Monte-Carlo verification sweep: truth force-included, all hypothesis pairs
// distinguishable, single-vote simulated oracle at the update's eta.
ConvergenceOutcome run_convergence(const std::vector<std::pair<int, double>>& grid,
                                   int trials, int depth, std::uint64_t seed,
                                   int budget_t, double stop_delta, int workers = 0);

std::string kernel_sweep_csv(int d_min, int d_max);

// The label every consistent DAG interventionally indistinguishable from the
// instance's generating graph agrees on, or nullopt when they disagree (the
// query evidence cannot decide the relation). Exact enumeration, small d only.
std::optional<int> truth_profile_label(const BenchInstance& inst,
                                       int enum_cap = kDefaultEnumCap);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace acbo
