#include <filesystem>
#include <map>
#include <set>

#include "acbo/benchgen.hpp"
#include "acbo/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace acbo;
namespace bf = acbo::testing;

TEST_CASE("hypothesis text renders and parses for all six templates") {
    const auto names = default_var_names(4);
    for (int t = 0; t < kNumRelationTypes; ++t) {
        const Hypothesis h{static_cast<RelationType>(t), 2, 0};
        const auto text = render_hypothesis(h, names);
        CHECK(parse_hypothesis(text, names) == h);
    }
    CHECK(!parse_hypothesis("B flarbs A.", names));
}

TEST_CASE("generation is deterministic per seed, down to the bytes") {
    GenPolicy policy;
    policy.workers = 4;
    const auto a = generate(4, 30, 99, policy);
    policy.workers = 1;  // worker count must not affect content
    const auto b = generate(4, 30, 99, policy);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].to_jsonl() == b[i].to_jsonl());
    const auto c = generate(4, 30, 100, policy);
    CHECK(a[0].to_jsonl() != c[0].to_jsonl());
}

TEST_CASE("exact labels agree with brute-force entailment") {
    const auto all3 = bf::brute_enumerate_dags(3);
    const auto all4 = bf::brute_enumerate_dags(4);
    for (int depth : {3, 4}) {
        const auto& pool = depth == 3 ? all3 : all4;
        for (const auto& inst : generate(depth, 40, 1234 + depth)) {
            REQUIRE(inst.label_mode == LabelMode::Exact);
            REQUIRE(inst.hypothesis.has_value());
            CHECK(inst.label == bf::brute_entails(pool, inst.premise, *inst.hypothesis));
        }
    }
}

TEST_CASE("generated premises are satisfiable and carried by their own graph") {
    for (const auto& inst : generate(5, 25, 5)) {
        REQUIRE(inst.graph.has_value());
        CHECK(premise_consistent(*inst.graph, inst.premise));
        CHECK(inst.depth_d == inst.graph->num_vars());
    }
}

TEST_CASE("approximate labels above the exact cap are sound on the 0 side") {
    const auto instances = generate(7, 25, 21);
    for (const auto& inst : instances) {
        CHECK(inst.label_mode == LabelMode::Approximate);
        if (inst.label == 1) {
            // The generating graph at least must carry the relation.
            CHECK(relation_holds(*inst.graph, inst.hypothesis->relation, inst.hypothesis->a,
                                 inst.hypothesis->b));
        }
    }
}

TEST_CASE("template histogram is roughly uniform") {
    std::map<std::string, int> hist;
    const auto instances = generate(4, 600, 777);
    for (const auto& inst : instances) {
        hist[relation_name(inst.hypothesis->relation)] += 1;
    }
    CHECK(hist.size() == 6);
    const double expect = 100.0;
    double chi2 = 0.0;
    for (const auto& [name, count] : hist) chi2 += (count - expect) * (count - expect) / expect;
    CHECK(chi2 < 20.5);  // p > 0.001 at 5 dof; the acceptance suite runs 6,000
}

TEST_CASE("manifest aggregates counts, tokens, labels and vocabulary") {
    auto d3 = generate(3, 120, 10);
    split_assign(d3, 20, 20, 3);
    auto d4 = generate(4, 120, 11);
    split_assign(d4, 20, 20, 4);
    auto all = d3;
    all.insert(all.end(), d4.begin(), d4.end());

    const auto m = manifest(all);
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[0].depth == 3);
    CHECK(m.rows[0].n_samples == 120);
    CHECK(m.rows[0].n_train + m.rows[0].n_dev + m.rows[0].n_test == 120);
    CHECK(m.rows[0].n_dev == 20);
    CHECK(m.rows[0].n_test == 20);
    CHECK(m.rows[0].pct_positive >= 0.0);
    CHECK(m.rows[0].pct_positive <= 100.0);
    CHECK(m.rows[0].mean_tokens_premise > 10.0);

    // All-train split shows zero dev/test rows rather than an error.
    const auto unsplit = manifest(generate(3, 10, 77));
    CHECK(unsplit.rows[0].n_dev == 0);
    CHECK(unsplit.rows[0].n_test == 0);

    CHECK_THROWS_AS(manifest({}), InputError);
}

TEST_CASE("vocabulary grows by exactly 2 per depth increment") {
    std::vector<int> vocab;
    for (int d : {7, 8, 9}) {
        const auto m = manifest(generate(d, 250, 500 + d));
        vocab.push_back(m.rows[0].vocab_size);
    }
    CHECK(vocab[1] - vocab[0] == 2);
    CHECK(vocab[2] - vocab[1] == 2);
}

TEST_CASE("split assignment") {
    auto instances = generate(3, 50, 1);
    split_assign(instances, 10, 15, 7);
    int train = 0, dev = 0, test = 0;
    for (const auto& inst : instances) {
        switch (inst.split) {
            case Split::Train: ++train; break;
            case Split::Dev: ++dev; break;
            case Split::Test: ++test; break;
        }
    }
    CHECK(train == 25);
    CHECK(dev == 10);
    CHECK(test == 15);

    // Deterministic per seed.
    auto again = generate(3, 50, 1);
    split_assign(again, 10, 15, 7);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        CHECK(instances[i].split == again[i].split);
    }

    // Exactly dev + test leaves an empty train split.
    auto tight = generate(3, 25, 2);
    split_assign(tight, 10, 15, 7);
    for (const auto& inst : tight) CHECK(inst.split != Split::Train);

    auto small = generate(3, 5, 3);
    CHECK_THROWS_AS(split_assign(small, 10, 15, 7), InputError);
}

TEST_CASE("jsonl round-trips byte-exactly") {
    auto instances = generate(4, 200, 42);
    split_assign(instances, 30, 30, 9);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const std::string line = instances[i].to_jsonl();
        const auto back = BenchInstance::from_jsonl(line, i + 1);
        CHECK(back.to_jsonl() == line);
        CHECK(back.premise == instances[i].premise);
        CHECK(back.hypothesis == instances[i].hypothesis);
    }
}

TEST_CASE("jsonl file io") {
    namespace fs = std::filesystem;
    const auto path = (fs::temp_directory_path() / "acbo_bench_io.jsonl").string();
    const auto instances = generate(3, 20, 8);
    write_jsonl_file(path, instances);
    const auto back = read_jsonl_file(path);
    REQUIRE(back.size() == instances.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].to_jsonl() == instances[i].to_jsonl());
    }
    fs::remove(path);
    CHECK_THROWS_AS(read_jsonl_file(path), DataError);
}

TEST_CASE("malformed records raise data errors with the line number") {
    CHECK_THROWS_AS(BenchInstance::from_jsonl("{not json", 3), DataError);
    try {
        BenchInstance::from_jsonl(R"({"premise": "x"})", 5);
        CHECK(false);
    } catch (const DataError& e) {
        CHECK(e.position == 5);
    }
}

TEST_CASE("original-format records map to external instances") {
    const std::string line = R"({"premise": "Suppose there is a closed system of 2 variables A and B. A and B are independent.", "hypothesis": "A is a direct cause of B.", "label": 0})";
    const auto inst = BenchInstance::from_jsonl(line, 1);
    CHECK(!inst.graph.has_value());
    CHECK(inst.label_mode == LabelMode::External);
    CHECK(inst.depth_d == 2);
    CHECK(inst.label == 0);
    REQUIRE(inst.hypothesis.has_value());
    CHECK(inst.hypothesis->relation == RelationType::Parent);
}

TEST_CASE("approx_label finds counterexamples through the seeded search") {
    // Premise: only "A correlates with B" at d=2. Truth A->B carries Parent,
    // but B->A is consistent too, so the label must come out 0.
    const Dag truth(2, {{0, 1}});
    const auto rendered = render_premise(truth);
    const Hypothesis h{RelationType::Parent, 0, 1};
    CHECK(approx_label(rendered.premise, h, truth, 8, 3, SampledSearchConfig{}) == 0);
    // And a relation false already on the truth short-circuits to 0.
    const Hypothesis h2{RelationType::Child, 0, 1};
    CHECK(approx_label(rendered.premise, h2, truth, 8, 3, SampledSearchConfig{}) == 0);
}
