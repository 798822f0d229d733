#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "acbo/dag.hpp"

namespace acbo {

struct PredictionRecord {
    std::string instance_id;
    int depth = 0;
    RelationType relation = RelationType::Parent;
    int predicted = 0;
    int gold = 0;
    int rounds_used = 0;
    bool converged = false;

    std::string to_jsonl() const;
    static PredictionRecord from_jsonl(const std::string& line, std::size_t line_no = 0);
};

// Depth bands for the extended benchmark breakdown.
inline constexpr std::array<std::pair<int, int>, 4> kDepthBands = {
    std::pair{7, 10}, std::pair{11, 15}, std::pair{16, 20}, std::pair{21, 24}};

struct MetricsReport {
    std::array<double, kNumRelationTypes> per_template_f1{};  // percent
    std::array<bool, kNumRelationTypes> template_present{};
    double macro_f1 = 0.0;   // unweighted mean over present templates
    bool all_templates_present = false;
    double accuracy = 0.0;   // percent
    double rejection_accuracy = 0.0;  // percent of gold-0 instances labeled 0
    std::array<std::optional<double>, 4> band_accuracy{};
    std::array<int, 4> band_counts{};
    double mean_rounds = 0.0;
    double median_rounds = 0.0;
    double converged_fraction = 0.0;

    std::string to_json() const;
};

// Binary F1 per template (positive class = label 1), unweighted macro mean,
// overall and per-band accuracy. A template with no positives in either gold
// or predictions scores a vacuous 100. Throws InputError on empty input.
MetricsReport compute_metrics(const std::vector<PredictionRecord>& records);

}  // namespace acbo
