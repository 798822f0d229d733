#include "acbo/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "acbo/kernel.hpp"
#include "acbo/parallel.hpp"
#include "json.hpp"

namespace acbo {

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

StopRule stop_rule_from_name(const std::string& s) {
    if (s == "map-threshold") return StopRule::MapThreshold;
    if (s == "entropy-threshold") return StopRule::EntropyThreshold;
    throw ConfigError("unknown stop_rule: " + s);
}

OracleMode oracle_mode_from_name(const std::string& s) {
    if (s == "simulated") return OracleMode::Simulated;
    if (s == "llm") return OracleMode::Llm;
    if (s == "replay") return OracleMode::Replay;
    throw ConfigError("unknown oracle mode: " + s);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");

    ExperimentConfig cfg;
    try {
        cfg.dataset_path = j.value("dataset", cfg.dataset_path);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
        cfg.master_seed = j.value("master_seed", cfg.master_seed);
        cfg.trials = j.value("trials", cfg.trials);
        cfg.workers = j.value("workers", cfg.workers);
        cfg.hypothesis_exact_cap = j.value("hypothesis_exact_cap", cfg.hypothesis_exact_cap);
        cfg.force_include_truth = j.value("force_include_truth", cfg.force_include_truth);
        cfg.posterior_weighted_rule =
            j.value("posterior_weighted_rule", cfg.posterior_weighted_rule);

        if (j.contains("acbo")) {
            const auto& a = j.at("acbo");
            cfg.acbo.budget_t = a.value("budget_t", cfg.acbo.budget_t);
            cfg.acbo.explore_eps = a.value("explore_eps", cfg.acbo.explore_eps);
            cfg.acbo.eta = a.value("eta", cfg.acbo.eta);
            cfg.acbo.stop_delta = a.value("stop_delta", cfg.acbo.stop_delta);
            cfg.acbo.votes_m = a.value("votes_m", cfg.acbo.votes_m);
            cfg.acbo.candidates_n = a.value("candidates_n", cfg.acbo.candidates_n);
            if (a.contains("stop_rule")) {
                cfg.acbo.stop_rule = stop_rule_from_name(a.at("stop_rule").get<std::string>());
            }
        }
        if (j.contains("oracle")) {
            const auto& o = j.at("oracle");
            cfg.oracle.eta = o.value("eta", cfg.oracle.eta);
            cfg.oracle.votes_m = o.value("votes_m", cfg.oracle.votes_m);
            if (o.contains("mode")) {
                cfg.oracle.mode = oracle_mode_from_name(o.at("mode").get<std::string>());
            }
        }
        if (j.contains("llm")) {
            const auto& l = j.at("llm");
            cfg.llm.base_url = l.value("base_url", cfg.llm.base_url);
            cfg.llm.path = l.value("path", cfg.llm.path);
            cfg.llm.model = l.value("model", cfg.llm.model);
            cfg.llm.temperature = l.value("temperature", cfg.llm.temperature);
            cfg.llm.max_tokens = l.value("max_tokens", cfg.llm.max_tokens);
            cfg.llm.timeout_ms = l.value("timeout_ms", cfg.llm.timeout_ms);
            cfg.llm.max_retries = l.value("max_retries", cfg.llm.max_retries);
        }
        if (j.contains("search")) {
            const auto& s = j.at("search");
            cfg.search.restarts_per_dag = s.value("restarts_per_dag", cfg.search.restarts_per_dag);
            cfg.search.max_moves = s.value("max_moves", cfg.search.max_moves);
            cfg.search.max_candidates = s.value("max_candidates", cfg.search.max_candidates);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    cfg.acbo.validate();
    cfg.oracle.validate();
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["dataset"] = dataset_path;
    j["out_dir"] = out_dir;
    j["master_seed"] = master_seed;
    j["trials"] = trials;
    j["workers"] = workers;
    j["hypothesis_exact_cap"] = hypothesis_exact_cap;
    j["force_include_truth"] = force_include_truth;
    j["posterior_weighted_rule"] = posterior_weighted_rule;
    j["acbo"] = {{"budget_t", acbo.budget_t},
                 {"explore_eps", acbo.explore_eps},
                 {"eta", acbo.eta},
                 {"stop_delta", acbo.stop_delta},
                 {"votes_m", acbo.votes_m},
                 {"candidates_n", acbo.candidates_n},
                 {"stop_rule", acbo.stop_rule == StopRule::MapThreshold ? "map-threshold"
                                                                        : "entropy-threshold"}};
    j["oracle"] = {{"eta", oracle.eta},
                   {"votes_m", oracle.votes_m},
                   {"mode", oracle.mode == OracleMode::Simulated
                                ? "simulated"
                                : (oracle.mode == OracleMode::Llm ? "llm" : "replay")}};
    j["llm"] = {{"base_url", llm.base_url},     {"path", llm.path},
                {"model", llm.model},           {"temperature", llm.temperature},
                {"max_tokens", llm.max_tokens}, {"timeout_ms", llm.timeout_ms},
                {"max_retries", llm.max_retries}};
    j["search"] = {{"restarts_per_dag", search.restarts_per_dag},
                   {"max_moves", search.max_moves},
                   {"max_candidates", search.max_candidates}};
    return j.dump(2);
}

namespace {

int predict_label(const RunResult& run, const std::vector<Dag>& hypotheses,
                  const Hypothesis& h, bool posterior_weighted) {
    if (!posterior_weighted) {
        return relation_holds(run.map_graph, h.relation, h.a, h.b) ? 1 : 0;
    }
    const Posterior& pi = run.trajectory.empty()
                              ? Posterior::uniform(static_cast<int>(hypotheses.size()))
                              : run.trajectory.back().posterior_after;
    double mass = 0.0;
    for (std::size_t k = 0; k < hypotheses.size(); ++k) {
        if (relation_holds(hypotheses[k], h.relation, h.a, h.b)) mass += pi.weights[k];
    }
    return mass > 0.5 ? 1 : 0;
}

}  // namespace

InstanceOutcome run_instance(const BenchInstance& inst, const ExperimentConfig& cfg,
                             const std::vector<TranscriptRecord>* replay) {
    if (!inst.hypothesis) {
        throw DataError("instance " + inst.id + " carries no structured hypothesis");
    }
    const Hypothesis& h = *inst.hypothesis;
    const std::uint64_t inst_seed = Rng::derive(cfg.master_seed, fnv1a64(inst.id));
    const int d = inst.premise.num_vars;

    const std::vector<std::string> names =
        inst.graph ? inst.graph->var_names() : parse_premise(inst.premise_text).names;

    // Phase 1. A degenerate space (single consistent DAG) short-circuits the
    // loop: the relation is read off the lone candidate.
    HypothesisSet hyps;
    const HypothesisMode mode =
        d <= cfg.hypothesis_exact_cap ? HypothesisMode::Exact : HypothesisMode::Sampled;
    std::optional<Dag> include;
    if (cfg.force_include_truth) {
        if (!inst.graph) throw DataError("force_include_truth needs the generating graph");
        include = inst.graph;
    }
    try {
        hyps = generate_hypotheses(inst.premise, cfg.acbo.candidates_n, mode, include,
                                   Rng::derive(inst_seed, 7), cfg.hypothesis_exact_cap,
                                   cfg.search);
    } catch (const DegenerateHypothesisSpace&) {
        auto only = consistent_dags(inst.premise, mode == HypothesisMode::Exact
                                                       ? SearchMode::Exact
                                                       : SearchMode::Sampled,
                                    2, Rng::derive(inst_seed, 7), cfg.hypothesis_exact_cap,
                                    cfg.search);
        if (only.empty()) {
            throw DataError("instance " + inst.id + " has an unsatisfiable premise");
        }
        InstanceOutcome out;
        out.prediction.instance_id = inst.id;
        out.prediction.depth = inst.depth_d;
        out.prediction.relation = h.relation;
        out.prediction.gold = inst.label;
        out.prediction.predicted = relation_holds(only[0], h.relation, h.a, h.b) ? 1 : 0;
        out.prediction.converged = true;
        return out;
    }

    // Renaming the loop variables to the instance's own names keeps prompts
    // and transcripts aligned with the premise text.
    if (hyps.dags[0].var_names() != names) {
        std::vector<Dag> renamed;
        renamed.reserve(hyps.dags.size());
        for (const auto& g : hyps.dags) {
            renamed.emplace_back(g.num_vars(), names, g.edges());
        }
        hyps.dags = std::move(renamed);
    }

    RunInputs inputs;
    inputs.instance_id = inst.id;
    inputs.premise_text = inst.premise_text;
    inputs.hypotheses = hyps.dags;

    InstanceOutcome out;
    out.prediction.instance_id = inst.id;
    out.prediction.depth = inst.depth_d;
    out.prediction.relation = h.relation;
    out.prediction.gold = inst.label;

    int votes_for_one = 0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        std::unique_ptr<InterventionOracle> oracle;
        if (replay) {
            oracle = std::make_unique<ReplayOracle>(*replay);
        } else if (cfg.oracle.mode == OracleMode::Simulated) {
            if (!inst.graph) {
                throw DataError("simulated oracle needs the generating graph (instance " +
                                inst.id + ")");
            }
            OracleConfig ocfg = cfg.oracle;
            ocfg.mode = OracleMode::Simulated;
            oracle = std::make_unique<SimulatedOracle>(*inst.graph, ocfg,
                                                       Rng::derive(inst_seed, 100 + trial));
        } else if (cfg.oracle.mode == OracleMode::Llm) {
            OracleConfig ocfg = cfg.oracle;
            ocfg.mode = OracleMode::Llm;
            oracle = std::make_unique<LlmOracle>(ocfg, cfg.llm);
        } else {
            throw ConfigError("replay mode needs a transcript per instance");
        }

        RunResult run;
        bool aborted_soft = false;
        try {
            run = run_acbo(inputs, *oracle, cfg.acbo, Rng::derive(inst_seed, 200 + trial));
        } catch (const RunAbort& abort) {
            if (abort.kind == RunAbort::Kind::Oracle) throw OracleError(abort.what());
            // Stall/contradiction: predict from the evidence gathered so far.
            aborted_soft = true;
            run.trajectory = abort.trajectory;
            run.rounds_used = static_cast<int>(abort.trajectory.size());
            const Posterior pi = abort.trajectory.empty()
                                     ? Posterior::uniform(static_cast<int>(hyps.dags.size()))
                                     : abort.trajectory.back().posterior_after;
            const int map = pi.argmax();
            run.map_graph = hyps.dags[map];
            run.map_mass = pi.weights[map];
            run.converged = false;
        }
        (void)aborted_soft;

        votes_for_one += predict_label(run, hyps.dags, h, cfg.posterior_weighted_rule);
        if (trial == 0) {
            out.prediction.rounds_used = run.rounds_used;
            out.prediction.converged = run.converged;
            out.trajectory = run.trajectory;
            out.transcript = oracle->transcript();
        }
    }
    out.prediction.predicted = 2 * votes_for_one > cfg.trials ? 1 : 0;
    return out;
}

ExperimentOutcome run_dataset(const std::vector<BenchInstance>& instances,
                              const ExperimentConfig& cfg, const std::string& checkpoint_path,
                              const std::map<std::string, PredictionRecord>* done) {
    namespace fs = std::filesystem;
    std::vector<PredictionRecord> predictions;
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (done) {
            auto it = done->find(instances[i].id);
            if (it != done->end()) {
                predictions.push_back(it->second);
                continue;
            }
        }
        todo.push_back(i);
    }

    std::string transcripts_dir, trajectories_dir;
    if (!cfg.out_dir.empty()) {
        transcripts_dir = cfg.out_dir + "/transcripts";
        trajectories_dir = cfg.out_dir + "/trajectories";
        fs::create_directories(transcripts_dir);
        fs::create_directories(trajectories_dir);
    }

    std::mutex mu;
    std::ofstream checkpoint;
    if (!checkpoint_path.empty()) {
        checkpoint.open(checkpoint_path, std::ios::app);
        if (!checkpoint) throw DataError("cannot open checkpoint file: " + checkpoint_path);
    }

    std::vector<std::optional<InstanceOutcome>> outcomes(todo.size());
    parallel_for(todo.size(), cfg.workers, [&](std::size_t k) {
        const BenchInstance& inst = instances[todo[k]];
        std::vector<TranscriptRecord> replay;
        const std::vector<TranscriptRecord>* replay_ptr = nullptr;
        if (cfg.oracle.mode == OracleMode::Replay) {
            replay = read_transcript_file(transcripts_dir + "/" + inst.id + ".jsonl");
            replay_ptr = &replay;
        }
        InstanceOutcome outcome = run_instance(inst, cfg, replay_ptr);

        std::lock_guard<std::mutex> lock(mu);
        if (checkpoint.is_open()) {
            checkpoint << outcome.prediction.to_jsonl() << "\n";
            checkpoint.flush();
        }
        outcomes[k] = std::move(outcome);
    });

    for (auto& outcome : outcomes) {
        if (!outcome) continue;
        predictions.push_back(outcome->prediction);
        if (!cfg.out_dir.empty()) {
            const std::string id = outcome->prediction.instance_id;
            if (cfg.oracle.mode != OracleMode::Replay) {
                write_transcript_file(transcripts_dir + "/" + id + ".jsonl",
                                      outcome->transcript);
            }
            std::ofstream traj(trajectories_dir + "/" + id + ".jsonl");
            for (const auto& log : outcome->trajectory) traj << log.to_jsonl() << "\n";
        }
    }

    std::sort(predictions.begin(), predictions.end(),
              [](const PredictionRecord& a, const PredictionRecord& b) {
                  return a.instance_id < b.instance_id;
              });
    ExperimentOutcome out;
    out.metrics = compute_metrics(predictions);
    out.predictions = std::move(predictions);
    return out;
}

std::vector<Dag> sample_distinguishable_hypotheses(int d, int n, double edge_prob,
                                                   std::uint64_t seed) {
    std::vector<Dag> out;
    std::set<std::vector<VarMask>> signatures;
    Rng rng(seed);
    const long max_attempts = 200000;
    for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < n;
         ++attempt) {
        Dag g = random_dag(d, edge_prob, rng.next_u64());
        if (signatures.insert(reachability_matrix(g)).second) out.push_back(std::move(g));
    }
    if (static_cast<int>(out.size()) < n) {
        throw CapacityError("could not sample enough interventionally distinct DAGs");
    }
    return out;
}

ConvergenceOutcome run_convergence(const std::vector<std::pair<int, double>>& grid, int trials,
                                   int depth, std::uint64_t seed, int budget_t,
                                   double stop_delta, int workers) {
    ConvergenceOutcome out;
    std::ostringstream trials_csv, traj_csv;
    trials_csv << "n,eta,trial,truth_index,map_index,success_tstar,success_full,"
                  "rounds_used,converged\n";
    traj_csv << "n,eta,round,mean_truth_mass,mean_max_mass\n";

    for (const auto& [n, eta] : grid) {
        const TheoreticalBound bound = theoretical_rounds(n, eta);
        ConvergencePoint point;
        point.n = n;
        point.eta = eta;
        point.tstar = bound.rounds;
        point.floor = bound.success_floor;
        point.trials = trials;

        struct TrialRow {
            int truth = 0, map = 0, rounds = 0;
            bool ok_tstar = false, ok_full = false, converged = false;
            std::vector<double> truth_mass, max_mass;
        };
        std::vector<TrialRow> rows(trials);

        const std::uint64_t point_seed = Rng::derive(seed, (static_cast<std::uint64_t>(n) << 20) ^
                                                               fnv1a64(std::to_string(eta)));
        parallel_for(trials, workers, [&, n = n, eta = eta](std::size_t t) {
            const std::uint64_t trial_seed = Rng::derive(point_seed, t);
            Rng rng(trial_seed);
            const auto hyps = sample_distinguishable_hypotheses(
                depth, n, std::min(0.5, 3.0 / (depth - 1)), rng.next_u64());
            const int truth_index = static_cast<int>(rng.uniform_int(n));

            OracleConfig ocfg;
            ocfg.eta = eta;
            ocfg.votes_m = 1;  // single vote: effective error equals eta
            SimulatedOracle oracle(hyps[truth_index], ocfg, rng.next_u64());

            AcboConfig acfg;
            acfg.budget_t = budget_t;
            acfg.explore_eps = 0.0;
            acfg.eta = eta;
            acfg.votes_m = 1;
            acfg.stop_delta = stop_delta;
            acfg.candidates_n = n;

            RunInputs inputs;
            inputs.instance_id = "conv-" + std::to_string(n) + "-" + std::to_string(t);
            inputs.hypotheses = hyps;

            const RunResult run = run_acbo(inputs, oracle, acfg, rng.next_u64());

            TrialRow row;
            row.truth = truth_index;
            row.rounds = run.rounds_used;
            row.converged = run.converged;
            // Posterior after round min(T*, played): the bound's checkpoint.
            const auto posterior_at = [&](int round) {
                if (run.trajectory.empty() || round <= 0) {
                    return Posterior::uniform(n);
                }
                const std::size_t idx =
                    std::min<std::size_t>(round, run.trajectory.size()) - 1;
                return run.trajectory[idx].posterior_after;
            };
            row.ok_tstar = posterior_at(bound.rounds).argmax() == truth_index;
            const Posterior final_pi = posterior_at(budget_t);
            row.map = final_pi.argmax();
            row.ok_full = row.map == truth_index;
            for (const auto& log : run.trajectory) {
                row.truth_mass.push_back(log.posterior_after.weights[truth_index]);
                row.max_mass.push_back(log.posterior_after.max_mass());
            }
            rows[t] = std::move(row);
        });

        int ok_tstar = 0, ok_full = 0, converged = 0;
        double rounds_total = 0.0;
        std::size_t max_len = 0;
        for (int t = 0; t < trials; ++t) {
            const auto& row = rows[t];
            ok_tstar += row.ok_tstar;
            ok_full += row.ok_full;
            converged += row.converged;
            rounds_total += row.rounds;
            max_len = std::max(max_len, row.truth_mass.size());
            trials_csv << n << ',' << eta << ',' << t << ',' << row.truth << ',' << row.map
                       << ',' << row.ok_tstar << ',' << row.ok_full << ',' << row.rounds << ','
                       << row.converged << "\n";
        }
        for (std::size_t r = 0; r < max_len; ++r) {
            double truth_sum = 0.0, max_sum = 0.0;
            int count = 0;
            for (const auto& row : rows) {
                // A stopped trial holds its final posterior for later rounds.
                if (row.truth_mass.empty()) continue;
                const std::size_t idx = std::min(r, row.truth_mass.size() - 1);
                truth_sum += row.truth_mass[idx];
                max_sum += row.max_mass[idx];
                ++count;
            }
            if (count == 0) continue;
            traj_csv << n << ',' << eta << ',' << (r + 1) << ',' << truth_sum / count << ','
                     << max_sum / count << "\n";
        }

        point.success_tstar = static_cast<double>(ok_tstar) / trials;
        point.success_full = static_cast<double>(ok_full) / trials;
        point.mean_rounds = rounds_total / trials;
        point.converged_fraction = static_cast<double>(converged) / trials;
        out.points.push_back(point);
    }

    out.trials_csv = trials_csv.str();
    out.trajectory_csv = traj_csv.str();
    return out;
}

std::string kernel_sweep_csv(int d_min, int d_max) {
    std::ostringstream csv;
    csv << "d,L,delta,margin_bound,required_b,rho\n";
    for (const auto& row : kernel_sweep(d_min, d_max)) {
        csv << row.d << ',' << row.seq_len << ',' << row.delta << ',' << row.margin_bound
            << ',' << row.required_b << ',' << row.rho << "\n";
    }
    return csv.str();
}

std::optional<int> truth_profile_label(const BenchInstance& inst, int enum_cap) {
    if (!inst.graph || !inst.hypothesis) {
        throw InputError("truth_profile_label needs graph and hypothesis");
    }
    const auto truth_sig = reachability_matrix(*inst.graph);
    const Hypothesis& h = *inst.hypothesis;
    std::optional<int> label;
    for (const Dag& g : all_dags_cached(inst.premise.num_vars, enum_cap)) {
        if (!premise_consistent(g, inst.premise)) continue;
        if (reachability_matrix(g) != truth_sig) continue;
        const int value = relation_holds(g, h.relation, h.a, h.b) ? 1 : 0;
        if (!label) {
            label = value;
        } else if (*label != value) {
            return std::nullopt;
        }
    }
    return label;
}

}  // namespace acbo
