#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acbo/dag.hpp"
#include "acbo/indep.hpp"

namespace acbo {

enum class LabelMode { Exact, Approximate, External };
enum class Split { Train, Dev, Test };

const char* label_mode_name(LabelMode m);
const char* split_name(Split s);

struct BenchInstance {
    std::string id;
    int depth_d = 0;
    std::optional<Dag> graph;  // absent for ingested external records
    std::string premise_text;
    PremiseSet premise;
    std::optional<Hypothesis> hypothesis;
    std::string hypothesis_text;
    int label = 0;
    LabelMode label_mode = LabelMode::Exact;
    Split split = Split::Train;
    std::uint64_t seed = 0;

    std::string to_jsonl() const;
    static BenchInstance from_jsonl(const std::string& line, std::size_t line_no = 0);
};

struct GenPolicy {
    double edge_prob = -1.0;  // < 0: min(0.5, 3 / (d - 1)), mean degree ~3
    CiPolicy ci;
    int exact_label_cap = kDefaultEnumCap;  // exact entailment at or below
    int label_budget = 8;                   // sampled counterexample width
    SampledSearchConfig search = SampledSearchConfig{24, 24, 48};
    int workers = 0;  // 0: hardware concurrency
};

// Fixed English rendering of the six relation templates.
std::string render_hypothesis(const Hypothesis& h, const std::vector<std::string>& names);
std::optional<Hypothesis> parse_hypothesis(const std::string& text,
                                           const std::vector<std::string>& names);

// `count` instances at the given depth: a fresh random DAG each, its rendered
// premise, a uniformly drawn (template, ordered pair) hypothesis, and the
// entailment label (exact at small depth, sampled + flagged above it).
// Deterministic per seed; instances are generated in parallel with per-index
// derived seeds and returned in index order.
std::vector<BenchInstance> generate(int depth, int count, std::uint64_t seed,
                                    const GenPolicy& policy = {});

// Entailment label over {generating graph} + sampled consistent DAGs, with an
// early stop at the first counterexample. Sound for label 0; label 1 is
// budget-limited, which is exactly the "approximate" flag.
int approx_label(const PremiseSet& p, const Hypothesis& h, const Dag& truth, int budget,
                 std::uint64_t seed, const SampledSearchConfig& search);

struct ManifestRow {
    int depth = 0;
    int n_samples = 0;
    int n_train = 0;
    int n_dev = 0;
    int n_test = 0;
    double mean_tokens_premise = 0.0;
    double pct_positive = 0.0;
    int vocab_size = 0;  // distinct case-folded tokens, list commas stripped
};

struct DatasetManifest {
    std::vector<ManifestRow> rows;  // ascending depth

    std::string to_csv() const;
};

DatasetManifest manifest(const std::vector<BenchInstance>& instances);

// Seeded shuffle; the first test_n (in shuffled order) become test, the next
// dev_n dev, everything else train. Instance order is left untouched.
void split_assign(std::vector<BenchInstance>& instances, int dev_n, int test_n,
                  std::uint64_t seed);

std::vector<BenchInstance> read_jsonl_file(const std::string& path);
void write_jsonl_file(const std::string& path, const std::vector<BenchInstance>& instances);

}  // namespace acbo
