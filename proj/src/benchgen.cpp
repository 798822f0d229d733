#include "acbo/benchgen.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "acbo/parallel.hpp"
#include "acbo/rng.hpp"
#include "acbo/text.hpp"
#include "json.hpp"

namespace acbo {

const char* label_mode_name(LabelMode m) {
    switch (m) {
        case LabelMode::Exact: return "exact";
        case LabelMode::Approximate: return "approximate";
        case LabelMode::External: return "external";
    }
    return "?";
}

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Dev: return "dev";
        case Split::Test: return "test";
    }
    return "?";
}

namespace {

LabelMode label_mode_from_name(const std::string& s, std::size_t line_no) {
    if (s == "exact") return LabelMode::Exact;
    if (s == "approximate") return LabelMode::Approximate;
    if (s == "external") return LabelMode::External;
    throw DataError("unknown label_mode: " + s, line_no);
}

Split split_from_name(const std::string& s, std::size_t line_no) {
    if (s == "train") return Split::Train;
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    throw DataError("unknown split: " + s, line_no);
}

}  // namespace

std::string render_hypothesis(const Hypothesis& h, const std::vector<std::string>& names) {
    const std::string& a = names.at(h.a);
    const std::string& b = names.at(h.b);
    switch (h.relation) {
        case RelationType::Parent:
            return a + " is a direct cause of " + b + ".";
        case RelationType::Child:
            return a + " is a direct effect of " + b + ".";
        case RelationType::Ancestor:
            return a + " is an ancestor (i.e., indirect cause) of " + b + ".";
        case RelationType::Descendant:
            return a + " is a descendant (i.e., indirect effect) of " + b + ".";
        case RelationType::Collider:
            return "There exists at least one collider (i.e., common effect) of " + a +
                   " and " + b + ".";
        case RelationType::Confounder:
            return "There exists at least one confounder (i.e., common cause) of " + a +
                   " and " + b + ".";
    }
    throw InputError("unknown relation template");
}

std::optional<Hypothesis> parse_hypothesis(const std::string& text,
                                           const std::vector<std::string>& names) {
    for (int a = 0; a < static_cast<int>(names.size()); ++a) {
        for (int b = 0; b < static_cast<int>(names.size()); ++b) {
            if (a == b) continue;
            for (int t = 0; t < kNumRelationTypes; ++t) {
                const Hypothesis h{static_cast<RelationType>(t), a, b};
                if (render_hypothesis(h, names) == text) return h;
            }
        }
    }
    return std::nullopt;
}

int approx_label(const PremiseSet& p, const Hypothesis& h, const Dag& truth, int budget,
                 std::uint64_t seed, const SampledSearchConfig& search) {
    if (!relation_holds(truth, h.relation, h.a, h.b)) return 0;
    for (const Dag& g : consistent_dags(p, SearchMode::Sampled, budget, seed,
                                        kDefaultEnumCap, search)) {
        if (!relation_holds(g, h.relation, h.a, h.b)) return 0;
    }
    return 1;
}

std::vector<BenchInstance> generate(int depth, int count, std::uint64_t seed,
                                    const GenPolicy& policy) {
    if (depth < 2) throw InputError("generate requires depth >= 2");
    if (count < 0) throw InputError("generate requires a nonnegative count");
    const double edge_prob =
        policy.edge_prob >= 0.0 ? policy.edge_prob : std::min(0.5, 3.0 / (depth - 1));

    std::vector<BenchInstance> out(count);
    parallel_for(count, policy.workers, [&](std::size_t i) {
        const std::uint64_t inst_seed = Rng::derive(seed, i);
        BenchInstance& inst = out[i];
        inst.seed = inst_seed;
        inst.depth_d = depth;
        {
            std::ostringstream id;
            id << "d" << depth << "-";
            id.width(6);
            id.fill('0');
            id << i;
            inst.id = id.str();
        }

        const Dag g = random_dag(depth, edge_prob, Rng::derive(inst_seed, 0));
        auto rendered = render_premise(g, policy.ci);
        inst.premise_text = std::move(rendered.text);
        inst.premise = std::move(rendered.premise);

        Rng rng(Rng::derive(inst_seed, 1));
        const auto relation = static_cast<RelationType>(rng.uniform_int(kNumRelationTypes));
        const int a = static_cast<int>(rng.uniform_int(depth));
        int b = static_cast<int>(rng.uniform_int(depth - 1));
        if (b >= a) ++b;
        const Hypothesis h{relation, a, b};
        inst.hypothesis = h;
        inst.hypothesis_text = render_hypothesis(h, g.var_names());

        if (depth <= policy.exact_label_cap) {
            inst.label = entails(inst.premise, h, SearchMode::Exact, 0, inst_seed,
                                 policy.exact_label_cap);
            inst.label_mode = LabelMode::Exact;
        } else {
            inst.label = approx_label(inst.premise, h, g, policy.label_budget,
                                      Rng::derive(inst_seed, 2), policy.search);
            inst.label_mode = LabelMode::Approximate;
        }
        inst.graph = g;
    });
    return out;
}

std::string BenchInstance::to_jsonl() const {
    nlohmann::json j;
    j["id"] = id;
    j["d"] = depth_d;
    j["premise"] = premise_text;
    j["hypothesis"] = hypothesis_text;
    j["relation_type"] = hypothesis ? relation_name(hypothesis->relation) : "";
    j["label"] = label;
    j["label_mode"] = label_mode_name(label_mode);
    j["split"] = split_name(split);
    if (graph) {
        j["graph"] = nlohmann::json::parse(graph->to_json());
    } else {
        j["graph"] = nullptr;
    }
    j["seed"] = seed;
    return j.dump();
}

BenchInstance BenchInstance::from_jsonl(const std::string& line, std::size_t line_no) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw DataError("malformed JSONL record", line_no);
    }

    BenchInstance inst;
    try {
        if (!j.contains("premise") || !j.contains("hypothesis") || !j.contains("label")) {
            throw DataError("record missing premise/hypothesis/label", line_no);
        }
        inst.premise_text = j.at("premise").get<std::string>();
        inst.hypothesis_text = j.at("hypothesis").get<std::string>();
        inst.label = j.at("label").get<int>();

        auto parsed = parse_premise(inst.premise_text);
        inst.premise = std::move(parsed.premise);

        const bool full_record = j.contains("graph") && !j.at("graph").is_null();
        if (full_record) {
            for (const char* field : {"id", "d", "relation_type", "label_mode", "split", "seed"}) {
                if (!j.contains(field)) {
                    throw DataError(std::string("record missing field: ") + field, line_no);
                }
            }
            inst.id = j.at("id").get<std::string>();
            inst.depth_d = j.at("d").get<int>();
            inst.graph = Dag::from_json(j.at("graph").dump());
            inst.label_mode = label_mode_from_name(j.at("label_mode").get<std::string>(), line_no);
            inst.split = split_from_name(j.at("split").get<std::string>(), line_no);
            inst.seed = j.at("seed").get<std::uint64_t>();
            const auto rel = relation_from_name(j.at("relation_type").get<std::string>());
            if (rel) {
                if (auto h = parse_hypothesis(inst.hypothesis_text, inst.graph->var_names())) {
                    inst.hypothesis = h;
                }
            }
        } else {
            // Original-format record: premise + hypothesis + label only.
            inst.id = j.contains("id") ? j.at("id").get<std::string>()
                                       : "ext-" + std::to_string(line_no);
            inst.depth_d = inst.premise.num_vars;
            inst.label_mode = LabelMode::External;
            if (auto h = parse_hypothesis(inst.hypothesis_text, parsed.names)) {
                inst.hypothesis = h;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad JSONL record: ") + e.what(), line_no);
    }
    return inst;
}

DatasetManifest manifest(const std::vector<BenchInstance>& instances) {
    if (instances.empty()) throw InputError("manifest requires a non-empty instance list");
    std::map<int, std::vector<const BenchInstance*>> by_depth;
    for (const auto& inst : instances) by_depth[inst.depth_d].push_back(&inst);

    DatasetManifest out;
    for (const auto& [depth, group] : by_depth) {
        ManifestRow row;
        row.depth = depth;
        row.n_samples = static_cast<int>(group.size());
        std::set<std::string> vocab;
        // Case-folded tokens with list commas stripped and sentence-final
        // periods kept: every variable name contributes exactly its bare and
        // sentence-final forms, so the vocabulary grows by 2 per added
        // variable.
        auto add_tokens = [&vocab](const std::string& text) {
            for (const auto& tok : tokenize(text)) {
                std::string bare;
                for (char c : tok) {
                    if (c != ',') bare += c;
                }
                if (!bare.empty()) vocab.insert(bare);
            }
        };
        double tokens = 0.0;
        int positives = 0;
        for (const BenchInstance* inst : group) {
            tokens += static_cast<double>(token_count(inst->premise_text));
            positives += inst->label;
            switch (inst->split) {
                case Split::Train: ++row.n_train; break;
                case Split::Dev: ++row.n_dev; break;
                case Split::Test: ++row.n_test; break;
            }
            add_tokens(inst->premise_text);
            add_tokens(inst->hypothesis_text);
        }
        row.mean_tokens_premise = tokens / row.n_samples;
        row.pct_positive = 100.0 * positives / row.n_samples;
        row.vocab_size = static_cast<int>(vocab.size());
        out.rows.push_back(row);
    }
    return out;
}

std::string DatasetManifest::to_csv() const {
    std::ostringstream out;
    out << "d,n_samples,n_train,n_dev,n_test,mean_tokens_premise,pct_positive,vocab\n";
    for (const auto& r : rows) {
        out << r.depth << ',' << r.n_samples << ',' << r.n_train << ',' << r.n_dev << ','
            << r.n_test << ',' << r.mean_tokens_premise << ',' << r.pct_positive << ','
            << r.vocab_size << "\n";
    }
    return out.str();
}

void split_assign(std::vector<BenchInstance>& instances, int dev_n, int test_n,
                  std::uint64_t seed) {
    const int n = static_cast<int>(instances.size());
    if (dev_n < 0 || test_n < 0 || n < dev_n + test_n) {
        throw InputError("split_assign: need at least dev_n + test_n instances");
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    for (int pos = 0; pos < n; ++pos) {
        Split s = Split::Train;
        if (pos < test_n) {
            s = Split::Test;
        } else if (pos < test_n + dev_n) {
            s = Split::Dev;
        }
        instances[order[pos]].split = s;
    }
}

std::vector<BenchInstance> read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::vector<BenchInstance> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        out.push_back(BenchInstance::from_jsonl(line, n));
    }
    return out;
}

void write_jsonl_file(const std::string& path, const std::vector<BenchInstance>& instances) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    for (const auto& inst : instances) out << inst.to_jsonl() << "\n";
}

}  // namespace acbo
