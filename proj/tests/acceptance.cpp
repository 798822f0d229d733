// Acceptance suite. Every criterion runs at its stated tolerance and prints
// one PASS/FAIL line; the process exits nonzero if any line fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "acbo/benchgen.hpp"
#include "acbo/harness.hpp"
#include "acbo/kernel.hpp"
#include "acbo/parallel.hpp"
#include "oracles.hpp"

using namespace acbo;
namespace bf = acbo::testing;

namespace {

int g_failures = 0;

void report(int index, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s — %s\n", ok ? "PASS" : "FAIL", index, name,
                detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

// ---- 1: Theorem-2 Monte-Carlo floors --------------------------------------

void criterion_1() {
    // Implemented exactly as stated. The stated floors are unattainable for
    // any query strategy: T* = 2 adaptive binary answers admit at most 4
    // transcripts, so no decision rule picks 1 of n >= 8 uniformly-placed
    // truths with probability above 4/n (pigeonhole); the measured rates sit
    // at that ceiling. The bound does hold at the full round budget, which is
    // reported alongside. Details in the reviewer ledger.
    const std::vector<std::pair<int, double>> grid{{16, 0.1}, {8, 0.2}, {32, 0.1}};
    const auto outcome = run_convergence(grid, 2000, 5, 20260801, 20, 0.01);
    bool ok = true;
    std::ostringstream detail;
    for (const auto& p : outcome.points) {
        const bool point_ok = p.success_tstar >= p.floor;
        ok = ok && point_ok;
        detail << "(n=" << p.n << ", eta=" << p.eta << "): success@T*=" << p.tstar << " is "
               << p.success_tstar << " vs floor " << p.floor << " (4/n ceiling "
               << 4.0 / p.n << "; success@T=20 is " << p.success_full << "); ";
    }
    report(1, "Theorem-2 Monte-Carlo success floors", ok, detail.str());
}

// ---- 2: posterior ratio identity -------------------------------------------

void criterion_2() {
    Rng rng(7);
    const double eta = 0.1;
    Posterior pi = Posterior::uniform(8);
    std::vector<int> preds(8);
    long checked = 0;
    double worst = 0.0;
    while (checked < 10000) {
        for (auto& p : preds) p = rng.bernoulli(0.5);
        const int star = 0;
        const int k = 1 + static_cast<int>(rng.uniform_int(7));
        if (preds[star] == preds[k]) continue;
        const int correct_answer = preds[star];
        const double before = pi.weights[star] / pi.weights[k];
        pi = bayes_update(pi, preds, correct_answer, eta);
        const double after = pi.weights[star] / pi.weights[k];
        worst = std::max(worst, std::abs(after / (before * (1 - eta) / eta) - 1.0));
        ++checked;
        if (pi.max_mass() > 1.0 - 1e-9) pi = Posterior::uniform(8);  // reset drift
    }
    report(2, "posterior odds multiply by (1-eta)/eta exactly", worst <= 1e-12,
           fmt("worst relative deviation %.3e over %ld discriminating rounds", worst, checked));
}

// ---- 3: Theorem-1 margin bound ---------------------------------------------

void criterion_3() {
    Rng rng(11);
    bool ok = true;
    double worst_violation = -1.0, worst_eq_gap = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        SimilarityReport rep;
        if (trial % 2 == 0) {
            // Equal-norm token pairs: the bound must be attained exactly.
            const int len = 10 + static_cast<int>(rng.uniform_int(200));
            TokenSeq a, b;
            for (int i = 0; i < len; ++i) {
                const std::string t = "t" + std::to_string(i);
                a.tokens.push_back(t);
                b.tokens.push_back(rng.bernoulli(0.1) ? t + "x" : t);
            }
            const auto [fa, fb] = feature_pair(a, b);
            rep = similarity_report(fa, fb, 1.0, 1.0);
            worst_eq_gap = std::max(worst_eq_gap,
                                    std::abs(rep.achieved_margin - rep.margin_bound));
        } else {
            // Unequal norms inside the bound's valid regime: dissimilarity
            // dominating the norm gap, (s-t)^2 <= 2*delta*(kappa^2 - st).
            const int len = 20 + static_cast<int>(rng.uniform_int(120));
            const double mismatch = 0.3 + 0.6 * rng.uniform();
            TokenSeq a, b;
            for (int i = 0; i < len; ++i) {
                const std::string t = "t" + std::to_string(i);
                a.tokens.push_back(t);
                b.tokens.push_back(rng.uniform() < mismatch ? t + "x" : t);
            }
            auto [fa, fb] = feature_pair(a, b);
            const double s = 0.7 + 0.3 * rng.uniform();
            const double t = 0.7 + 0.3 * rng.uniform();
            for (auto& c : fa.coordinates) c *= s;
            for (auto& c : fb.coordinates) c *= t;
            rep = similarity_report(fa, fb, 1.5, 1.0);
        }
        const double violation = rep.achieved_margin - rep.margin_bound;
        worst_violation = std::max(worst_violation, violation);
        ok = ok && violation <= 1e-9;
    }
    const double rb = required_b(1.0, 1.0, 0.02);
    ok = ok && std::abs(rb - 5.0) <= 1e-9 && worst_eq_gap <= 1e-9;
    report(3, "margin <= B*kappa*sqrt(2*delta), tight at equal norms", ok,
           fmt("worst violation %.2e; equal-norm gap %.2e; required_b(delta=0.02)=%.12f",
               worst_violation, worst_eq_gap, rb));
}

// ---- 4: near-miss similarity bound and the factory sweep ------------------

void criterion_4() {
    Rng rng(13);
    bool prefix_ok = true;
    for (int trial = 0; trial < 2000; ++trial) {
        const int len = 20 + static_cast<int>(rng.uniform_int(300));
        const int prefix = static_cast<int>(rng.uniform_int(len + 1));
        TokenSeq a, b;
        for (int i = 0; i < len; ++i) {
            const std::string t = "w" + std::to_string(i);
            a.tokens.push_back(t);
            b.tokens.push_back(i < prefix || rng.bernoulli(0.5)
                                   ? t
                                   : "u" + std::to_string(i));
        }
        const double delta = delta_similarity(a, b);
        if (delta > 2.0 * (len - prefix) / len + 1e-12) prefix_ok = false;
    }

    const auto rows = kernel_sweep(7, 24);
    const auto& r7 = rows.front();
    const auto& r24 = rows.back();
    const double ratio = r24.delta / r7.delta;
    const double target = (7.0 / 24.0) * (7.0 / 24.0);
    const bool ratio_ok = ratio >= target / 2.0 && ratio <= target * 2.0;

    bool rb_monotone = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!(rows[i].required_b < rows[i + 1].required_b)) rb_monotone = false;
    }
    const double rb_growth = r24.required_b / r7.required_b;
    const bool rb_ok = rb_monotone && rb_growth >= (24.0 / 7.0) / 2.0;

    report(4, "near-miss delta bound and sweep scaling", prefix_ok && ratio_ok && rb_ok,
           fmt("delta ratio %.4f vs (7/24)^2=%.4f (factor %.2f); required_b x%.2f over d=7..24",
               ratio, target, ratio / target, rb_growth));
}

// ---- 5: answer separation decouples from premise similarity ----------------

void criterion_5() {
    const auto rows = kernel_sweep(7, 24);
    bool rho_constant = true;
    for (const auto& row : rows) {
        if (row.rho != 1.0) rho_constant = false;
    }
    const double shrink = rows.front().delta / rows.back().delta;
    report(5, "answer rho constant while premise delta collapses", rho_constant && shrink >= 8.0,
           fmt("rho = 1.0 across the sweep; premise delta shrinks %.2fx", shrink));
}

// ---- 6: the worked 4-variable instance labels 0 -----------------------------

void criterion_6() {
    const std::string premise_text =
        "Suppose there is a closed system of 4 variables A, B, C, and D. "
        "All the statistical relations among these 4 variables are as follows: "
        "A correlates with B. A correlates with C. A correlates with D. "
        "B correlates with C. B correlates with D. C correlates with D. "
        "However, B and D are independent given A. "
        "B and D are independent given A and C. "
        "C and D are independent given A. "
        "C and D are independent given A and B.";
    const auto parsed = parse_premise(premise_text);
    const Hypothesis collider_ab{RelationType::Collider, 0, 1};
    const int label = entails(parsed.premise, collider_ab, SearchMode::Exact, 0, 1);

    const auto consistent = consistent_dags(parsed.premise, SearchMode::Exact, 0, 1);
    int without_collider = 0;
    for (const auto& g : consistent) {
        if (!relation_holds(g, RelationType::Collider, 0, 1)) ++without_collider;
    }
    report(6, "worked 4-variable premise: collider(A,B) not entailed",
           label == 0 && !consistent.empty() && without_collider > 0,
           fmt("label=%d; %d of %zu consistent DAGs lack the collider (so it is not "
               "entailed)",
               label, without_collider, consistent.size()));
}

// ---- 7: chain-vs-fork resolves in one noiseless round ----------------------

void criterion_7() {
    const Dag chain(3, {{0, 1}, {1, 2}});
    const Dag fork(3, {{1, 0}, {1, 2}});
    RunInputs inputs;
    inputs.instance_id = "fig";
    inputs.premise_text = render_premise(chain).text;
    inputs.hypotheses = {chain, fork};
    SimulatedOracle oracle(chain, {0.0, 3, OracleMode::Simulated}, 5);
    AcboConfig cfg;
    cfg.explore_eps = 0.0;
    cfg.eta = 0.0;
    cfg.stop_delta = 0.01;
    const auto run = run_acbo(inputs, oracle, cfg, 9);

    const auto dset = bf::brute_discrimination_set(chain, fork);
    const bool pair_ok =
        run.trajectory.size() == 1 && dset.count(run.trajectory[0].chosen_pair) == 1;
    const bool ok = run.converged && run.rounds_used == 1 && run.map_graph == chain && pair_ok;
    std::ostringstream ds;
    for (const auto& p : dset) ds << "(" << p.source << "," << p.sink << ")";
    report(7, "noiseless chain/fork converges in exactly 1 round", ok,
           fmt("rounds=%d, map=chain=%d, query in brute-forced D=%s", run.rounds_used,
               run.map_graph == chain, ds.str().c_str()));
}

// ---- 8: oracle equivalence suites ------------------------------------------

void criterion_8() {
    // d-separation: exhaustive to d = 4 plus 10,000 random d <= 8 queries.
    long dsep_disagreements = 0;
    long dsep_checked = 0;
    for (int d = 2; d <= 4; ++d) {
        for (const Dag& g : all_dags_cached(d)) {
            for (int x = 0; x < d; ++x) {
                for (int y = x + 1; y < d; ++y) {
                    const VarMask others = (var_bit(d) - 1) & ~var_bit(x) & ~var_bit(y);
                    for (VarMask s = 0;; s = (s - others) & others) {
                        ++dsep_checked;
                        if (d_separated(g, x, y, s) != bf::brute_d_separated(g, x, y, s)) {
                            ++dsep_disagreements;
                        }
                        if (s == others) break;
                    }
                }
            }
        }
    }
    Rng rng(17);
    for (int q = 0; q < 10000; ++q) {
        const int d = 3 + static_cast<int>(rng.uniform_int(6));
        const Dag g = random_dag(d, 0.3, rng.next_u64());
        const int x = static_cast<int>(rng.uniform_int(d));
        int y = static_cast<int>(rng.uniform_int(d - 1));
        if (y >= x) ++y;
        VarMask cond = 0;
        for (int v = 0; v < d; ++v) {
            if (v != x && v != y && rng.bernoulli(0.3)) cond |= var_bit(v);
        }
        ++dsep_checked;
        if (d_separated(g, x, y, cond) != bf::brute_d_separated(g, x, y, cond)) {
            ++dsep_disagreements;
        }
    }

    // Markov equivalence vs full-CI-set equality on every pair, d = 3 and 4.
    long mec_disagreements = 0;
    for (int d = 3; d <= 4; ++d) {
        const auto& dags = all_dags_cached(d);
        std::vector<std::vector<bool>> sig(dags.size());
        std::vector<MecDescriptor> desc(dags.size());
        parallel_for(dags.size(), 0, [&](std::size_t i) {
            sig[i] = bf::brute_ci_signature(dags[i]);
            desc[i] = mec_descriptor(dags[i]);
        });
        for (std::size_t i = 0; i < dags.size(); ++i) {
            for (std::size_t j = 0; j < dags.size(); ++j) {
                if ((desc[i] == desc[j]) != (sig[i] == sig[j])) ++mec_disagreements;
            }
        }
    }

    const bool counts_ok = enumerate_dags(1).size() == 1 && enumerate_dags(2).size() == 3 &&
                           enumerate_dags(3).size() == 25 && enumerate_dags(4).size() == 543 &&
                           all_dags_cached(5).size() == 29281;

    report(8, "dual-route equivalence suites", dsep_disagreements == 0 &&
               mec_disagreements == 0 && counts_ok,
           fmt("d-sep %ld checks %ld disagreements; MEC pairs (25^2 + 543^2) %ld "
               "disagreements; counts 1/3/25/543/29281 %s",
               dsep_checked, dsep_disagreements, mec_disagreements,
               counts_ok ? "ok" : "WRONG"));
}

// ---- 9: end-to-end pipeline accuracy ----------------------------------------

// Instances whose hypothesis is decided by interventional evidence: every
// consistent DAG sharing the truth's reachability profile agrees on it. The
// agreed value is the gold label the loop is able to recover.
std::vector<std::pair<BenchInstance, int>> decided_instances(int count, std::uint64_t seed) {
    std::vector<std::pair<BenchInstance, int>> out;
    GenPolicy policy;
    policy.workers = 1;
    std::uint64_t batch = 0;
    while (static_cast<int>(out.size()) < count) {
        // Skew toward small depths; d=5 stays represented but cheap.
        const int depth = 3 + static_cast<int>(batch % 5 == 4 ? 2 : batch % 2);
        const auto instances = generate(depth, 40, Rng::derive(seed, batch), policy);
        for (const auto& inst : instances) {
            if (static_cast<int>(out.size()) >= count) break;
            const auto gold = truth_profile_label(inst);
            if (gold) out.emplace_back(inst, *gold);
        }
        ++batch;
    }
    return out;
}

void criterion_9() {
    // Noiseless: 100% required.
    {
        const auto instances = decided_instances(200, 5150);
        ExperimentConfig cfg;
        cfg.oracle.eta = 0.0;
        cfg.oracle.votes_m = 1;
        cfg.acbo.eta = 0.0;
        cfg.acbo.votes_m = 1;
        cfg.force_include_truth = true;
        cfg.master_seed = 99;

        std::vector<int> correct(instances.size(), 0);
        parallel_for(instances.size(), 0, [&](std::size_t i) {
            const auto out = run_instance(instances[i].first, cfg);
            correct[i] = out.prediction.predicted == instances[i].second;
        });
        const int right = std::accumulate(correct.begin(), correct.end(), 0);
        report(9, "noiseless end-to-end accuracy is exact", right == 200,
               fmt("%d/200 decided instances recovered at eta=0", right));
        if (right != 200) return;  // detail already failed; skip the noisy half
    }

    // Noisy: eta=0.1, M=3 -> effective update error 0.028; >= 95% required.
    {
        const auto instances = decided_instances(500, 777000);
        ExperimentConfig cfg;
        cfg.oracle.eta = 0.1;
        cfg.oracle.votes_m = 3;
        cfg.acbo.eta = 0.1;
        cfg.acbo.votes_m = 3;
        cfg.force_include_truth = true;
        cfg.master_seed = 100;

        std::vector<int> correct(instances.size(), 0);
        parallel_for(instances.size(), 0, [&](std::size_t i) {
            const auto out = run_instance(instances[i].first, cfg);
            correct[i] = out.prediction.predicted == instances[i].second;
        });
        const int right = std::accumulate(correct.begin(), correct.end(), 0);
        const double acc = right / 500.0;
        report(9, "noisy end-to-end accuracy (eta_eff = 0.028)", acc >= 0.95,
               fmt("%d/500 = %.1f%% at per-vote eta=0.1, M=3 (threshold 95%%)", right,
                   100 * acc));
    }
}

// ---- 10: generated-dataset shape -------------------------------------------

void criterion_10() {
    auto d7 = generate(7, 6000, 424242);
    split_assign(d7, 1000, 1000, 1);
    auto d24 = generate(24, 2000, 434343);
    split_assign(d24, 1000, 1000, 2);

    std::map<std::string, int> hist;
    for (const auto& inst : d7) hist[relation_name(inst.hypothesis->relation)] += 1;
    double chi2 = 0.0;
    const double expect = 1000.0;
    for (const auto& [name, count] : hist) chi2 += (count - expect) * (count - expect) / expect;
    const bool chi_ok = hist.size() == 6 && chi2 < 15.086;  // p > 0.01, 5 dof

    auto both = d7;
    both.insert(both.end(), d24.begin(), d24.end());
    const auto m = manifest(both);
    const auto& row7 = m.rows[0];
    const auto& row24 = m.rows[1];
    const bool tokens_ok = row7.mean_tokens_premise >= 90 && row7.mean_tokens_premise <= 135;
    const double ratio = row24.mean_tokens_premise / row7.mean_tokens_premise;
    const bool ratio_ok = ratio >= 8.0 && ratio <= 14.0;
    const bool splits_ok = row7.n_dev == 1000 && row7.n_test == 1000 &&
                           row7.n_train == 4000 && row24.n_dev == 1000 &&
                           row24.n_test == 1000;

    report(10, "dataset shape: templates, token scaling, splits",
           chi_ok && tokens_ok && ratio_ok && splits_ok,
           fmt("chi2=%.2f (<15.086); tokens(d=7)=%.1f in [90,135]; ratio(d24/d7)=%.2f in "
               "[8,14]; dev/test=1000/1000 per depth",
               chi2, row7.mean_tokens_premise, ratio));
}

// ---- 11: determinism and replay ---------------------------------------------

void criterion_11() {
    // Datasets byte-identical for a fixed (config, seed).
    auto gen_bytes = [] {
        std::string bytes;
        for (const auto& inst : generate(4, 400, 31337)) bytes += inst.to_jsonl() + "\n";
        return bytes;
    };
    const bool dataset_ok = gen_bytes() == gen_bytes();

    // Run reports byte-identical.
    const auto instances = generate(4, 40, 2222);
    ExperimentConfig cfg;
    cfg.oracle.eta = 0.15;
    cfg.workers = 4;
    auto run_bytes = [&] {
        const auto outcome = run_dataset(instances, cfg);
        std::string bytes = outcome.metrics.to_json();
        for (const auto& p : outcome.predictions) bytes += p.to_jsonl() + "\n";
        return bytes;
    };
    const bool report_ok = run_bytes() == run_bytes();

    // Replay of recorded transcripts reproduces bit-identical trajectories.
    bool replay_ok = true;
    ExperimentConfig single = cfg;
    single.workers = 1;
    for (int i = 0; i < 10; ++i) {
        const auto original = run_instance(instances[i], single);
        const auto replayed = run_instance(instances[i], single, &original.transcript);
        if (original.trajectory.size() != replayed.trajectory.size()) {
            replay_ok = false;
            continue;
        }
        for (std::size_t t = 0; t < original.trajectory.size(); ++t) {
            if (original.trajectory[t].to_jsonl() != replayed.trajectory[t].to_jsonl()) {
                replay_ok = false;
            }
        }
        if (original.prediction.to_jsonl() != replayed.prediction.to_jsonl()) replay_ok = false;
    }

    report(11, "determinism: datasets, reports, transcript replay",
           dataset_ok && report_ok && replay_ok,
           fmt("dataset bytes %s; report bytes %s; replayed trajectories %s",
               dataset_ok ? "identical" : "DIFFER", report_ok ? "identical" : "DIFFER",
               replay_ok ? "bit-identical" : "DIFFER"));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (g_failures) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
