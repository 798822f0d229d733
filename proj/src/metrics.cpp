#include "acbo/metrics.hpp"

#include <algorithm>

#include "acbo/errors.hpp"
#include "json.hpp"

namespace acbo {

std::string PredictionRecord::to_jsonl() const {
    nlohmann::json j;
    j["instance_id"] = instance_id;
    j["d"] = depth;
    j["relation_type"] = relation_name(relation);
    j["predicted"] = predicted;
    j["gold"] = gold;
    j["rounds_used"] = rounds_used;
    j["converged"] = converged;
    return j.dump();
}

PredictionRecord PredictionRecord::from_jsonl(const std::string& line, std::size_t line_no) {
    PredictionRecord r;
    try {
        const auto j = nlohmann::json::parse(line);
        r.instance_id = j.at("instance_id").get<std::string>();
        r.depth = j.at("d").get<int>();
        const auto rel = relation_from_name(j.at("relation_type").get<std::string>());
        if (!rel) throw DataError("unknown relation_type", line_no);
        r.relation = *rel;
        r.predicted = j.at("predicted").get<int>();
        r.gold = j.at("gold").get<int>();
        r.rounds_used = j.at("rounds_used").get<int>();
        r.converged = j.at("converged").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad prediction record: ") + e.what(), line_no);
    }
    return r;
}

MetricsReport compute_metrics(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw InputError("compute_metrics: empty input");

    MetricsReport rep;
    std::array<int, kNumRelationTypes> tp{}, fp{}, fn{};
    int correct = 0;
    int gold_negative = 0, rejected = 0;
    std::array<int, 4> band_correct{};
    std::vector<int> rounds;
    rounds.reserve(records.size());
    int converged = 0;

    for (const auto& r : records) {
        const int t = static_cast<int>(r.relation);
        rep.template_present[t] = true;
        if (r.predicted == 1 && r.gold == 1) ++tp[t];
        if (r.predicted == 1 && r.gold == 0) ++fp[t];
        if (r.predicted == 0 && r.gold == 1) ++fn[t];
        if (r.predicted == r.gold) ++correct;
        if (r.gold == 0) {
            ++gold_negative;
            if (r.predicted == 0) ++rejected;
        }
        for (std::size_t b = 0; b < kDepthBands.size(); ++b) {
            if (r.depth >= kDepthBands[b].first && r.depth <= kDepthBands[b].second) {
                ++rep.band_counts[b];
                if (r.predicted == r.gold) ++band_correct[b];
            }
        }
        rounds.push_back(r.rounds_used);
        if (r.converged) ++converged;
    }

    double macro_sum = 0.0;
    int macro_n = 0;
    for (int t = 0; t < kNumRelationTypes; ++t) {
        if (!rep.template_present[t]) continue;
        const int denom = 2 * tp[t] + fp[t] + fn[t];
        // No positives anywhere: perfect rejection, scored as a vacuous 100.
        rep.per_template_f1[t] = denom == 0 ? 100.0 : 200.0 * tp[t] / denom;
        macro_sum += rep.per_template_f1[t];
        ++macro_n;
    }
    rep.macro_f1 = macro_sum / macro_n;
    rep.all_templates_present =
        macro_n == kNumRelationTypes;
    rep.accuracy = 100.0 * correct / records.size();
    rep.rejection_accuracy = gold_negative == 0 ? 100.0 : 100.0 * rejected / gold_negative;
    for (std::size_t b = 0; b < kDepthBands.size(); ++b) {
        if (rep.band_counts[b] > 0) {
            rep.band_accuracy[b] = 100.0 * band_correct[b] / rep.band_counts[b];
        }
    }

    std::sort(rounds.begin(), rounds.end());
    double total = 0.0;
    for (int r : rounds) total += r;
    rep.mean_rounds = total / rounds.size();
    const std::size_t mid = rounds.size() / 2;
    rep.median_rounds = rounds.size() % 2 ? rounds[mid]
                                          : 0.5 * (rounds[mid - 1] + rounds[mid]);
    rep.converged_fraction = static_cast<double>(converged) / records.size();
    return rep;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    auto f1 = nlohmann::json::object();
    for (int t = 0; t < kNumRelationTypes; ++t) {
        if (template_present[t]) {
            f1[relation_name(static_cast<RelationType>(t))] = per_template_f1[t];
        }
    }
    j["per_template_f1"] = std::move(f1);
    j["macro_f1"] = macro_f1;
    j["all_templates_present"] = all_templates_present;
    j["accuracy"] = accuracy;
    j["rejection_accuracy"] = rejection_accuracy;
    auto bands = nlohmann::json::object();
    for (std::size_t b = 0; b < kDepthBands.size(); ++b) {
        const std::string key = "d" + std::to_string(kDepthBands[b].first) + "-" +
                                std::to_string(kDepthBands[b].second);
        bands[key] = band_accuracy[b] ? nlohmann::json(*band_accuracy[b]) : nlohmann::json();
    }
    j["band_accuracy"] = std::move(bands);
    j["mean_rounds"] = mean_rounds;
    j["median_rounds"] = median_rounds;
    j["converged_fraction"] = converged_fraction;
    return j.dump(2);
}

}  // namespace acbo
