#include "acbo/loop.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace acbo {

namespace {

constexpr double kAliveMass = 1e-9;   // hypotheses below this skip IG scoring
constexpr double kIgPositive = 1e-12; // bits; smaller gains count as zero

}  // namespace

Posterior Posterior::uniform(int n) {
    if (n < 1) throw InputError("posterior needs at least one hypothesis");
    Posterior p;
    p.weights.assign(n, 1.0 / n);
    return p;
}

void Posterior::renormalize() {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InputError("posterior weight must be nonnegative");
        total += w;
    }
    if (total <= 0.0) {
        throw ContradictionError("posterior mass vanished: observation contradicts every hypothesis");
    }
    for (double& w : weights) w /= total;
}

int Posterior::argmax() const {
    int best = 0;
    for (int k = 1; k < static_cast<int>(weights.size()); ++k) {
        if (weights[k] > weights[best]) best = k;
    }
    return best;
}

double Posterior::max_mass() const { return weights[argmax()]; }

void AcboConfig::validate() const {
    if (budget_t < 1) throw ConfigError("budget_t must be >= 1");
    if (!(explore_eps >= 0.0 && explore_eps < 1.0)) {
        throw ConfigError("explore_eps must lie in [0, 1)");
    }
    if (!(stop_delta > 0.0 && stop_delta < 1.0)) throw ConfigError("stop_delta must lie in (0, 1)");
    if (!(eta >= 0.0 && eta < 0.5)) throw ConfigError("eta must lie in [0, 0.5)");
    if (votes_m < 1 || votes_m % 2 == 0) throw ConfigError("votes_m must be a positive odd integer");
    if (candidates_n < 2) throw ConfigError("candidates_n must be >= 2");
}

double entropy(const Posterior& pi) {
    double h = 0.0;
    for (double w : pi.weights) {
        if (w < 0.0) throw InputError("posterior weight must be nonnegative");
        if (w > 0.0) h -= w * std::log2(w);
    }
    return h < 0.0 ? 0.0 : h;
}

double predictive_response_prob(const Posterior& pi, const std::vector<int>& preds,
                                double eta_eff) {
    if (preds.size() != pi.weights.size()) {
        throw InputError("preds length must match the posterior");
    }
    double p1 = 0.0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        p1 += pi.weights[k] * (preds[k] ? (1.0 - eta_eff) : eta_eff);
    }
    return p1;
}

Posterior bayes_update(const Posterior& pi, const std::vector<int>& preds, int r_obs,
                       double eta_eff) {
    if (preds.size() != pi.weights.size()) {
        throw InputError("preds length must match the posterior");
    }
    // eta_eff = 0.5 makes the likelihood uninformative; anything above it
    // would invert the evidence.
    if (!(eta_eff >= 0.0 && eta_eff <= 0.5)) throw InputError("eta_eff must lie in [0, 0.5]");
    Posterior out = pi;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        out.weights[k] *= (preds[k] == r_obs) ? (1.0 - eta_eff) : eta_eff;
    }
    out.renormalize();
    return out;
}

double information_gain(const Posterior& pi, const std::vector<int>& preds, double eta_eff) {
    const double p1 = predictive_response_prob(pi, preds, eta_eff);
    const double p0 = 1.0 - p1;
    double expected = 0.0;
    if (p1 > 0.0) expected += p1 * entropy(bayes_update(pi, preds, 1, eta_eff));
    if (p0 > 0.0) expected += p0 * entropy(bayes_update(pi, preds, 0, eta_eff));
    const double ig = entropy(pi) - expected;
    return ig > 0.0 ? ig : 0.0;
}

InterventionChoice select_intervention(const Posterior& pi, const std::vector<Dag>& hypotheses,
                                       double eta_eff, double eps, Rng& rng) {
    if (hypotheses.size() != pi.weights.size() || hypotheses.empty()) {
        throw InputError("hypothesis list must match the posterior");
    }
    if (!(eps >= 0.0 && eps <= 1.0)) throw InputError("eps must lie in [0, 1]");
    const int d = hypotheses[0].num_vars();
    if (d < 2) throw InputError("need at least two variables to intervene");

    // IG is scored over the positive-mass hypotheses only; the rest carry
    // no weight and are never deleted.
    std::vector<int> alive;
    for (std::size_t k = 0; k < pi.weights.size(); ++k) {
        if (pi.weights[k] > kAliveMass) alive.push_back(static_cast<int>(k));
    }
    if (alive.size() < 2 && eps == 0.0) {
        throw StallError("fewer than two hypotheses carry posterior mass");
    }

    Posterior alive_pi;
    std::vector<std::vector<VarMask>> reach;
    reach.reserve(alive.size());
    for (int k : alive) {
        alive_pi.weights.push_back(pi.weights[k]);
        reach.push_back(reachability_matrix(hypotheses[k]));
    }
    if (!alive_pi.weights.empty()) alive_pi.renormalize();

    std::vector<int> preds(alive.size());
    auto pair_ig = [&](VarPair pr) {
        for (std::size_t k = 0; k < alive.size(); ++k) {
            preds[k] = (reach[k][pr.source] & var_bit(pr.sink)) ? 1 : 0;
        }
        return information_gain(alive_pi, preds, eta_eff);
    };

    auto all_pairs = [&] {
        std::vector<VarPair> out;
        out.reserve(static_cast<std::size_t>(d) * (d - 1));
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                if (i != j) out.push_back(VarPair{i, j});
            }
        }
        return out;
    };

    const bool explore = eps > 0.0 && rng.uniform() < eps;
    if (explore) {
        const auto pairs = all_pairs();
        const VarPair pick = pairs[rng.uniform_int(pairs.size())];
        return InterventionChoice{pick, alive.size() >= 2 ? pair_ig(pick) : 0.0, true};
    }

    InterventionChoice best;
    bool found = false;
    if (alive.size() >= 2) {
        for (const VarPair pr : all_pairs()) {
            const double ig = pair_ig(pr);
            if (ig > kIgPositive && (!found || ig > best.ig_score)) {
                best = InterventionChoice{pr, ig, false};
                found = true;
            }
        }
    }
    if (found) return best;

    if (eps == 0.0) {
        throw StallError("remaining hypotheses are interventionally indistinguishable");
    }
    // Exploration is enabled but the greedy branch has nothing informative
    // left; fall through to a random query rather than aborting the run.
    const auto pairs = all_pairs();
    const VarPair pick = pairs[rng.uniform_int(pairs.size())];
    return InterventionChoice{pick, 0.0, true};
}

std::string RoundLog::to_jsonl() const {
    nlohmann::json j;
    j["round"] = round_index;
    j["pair"] = {chosen_pair.source, chosen_pair.sink};
    j["ig_bits"] = ig_score;
    j["was_random"] = was_random;
    j["answer"] = response.answer;
    j["votes"] = response.votes;
    j["posterior"] = posterior_after.weights;
    return j.dump();
}

std::string RunResult::summary_json(const std::string& instance_id, std::uint64_t seed) const {
    nlohmann::json j;
    j["instance_id"] = instance_id;
    j["map_graph"] = nlohmann::json::parse(map_graph.to_json());
    j["map_mass"] = map_mass;
    j["rounds_used"] = rounds_used;
    j["converged"] = converged;
    j["stop_rule"] = stop_rule == StopRule::MapThreshold ? "map-threshold" : "entropy-threshold";
    j["seed"] = seed;
    return j.dump();
}

HypothesisSet generate_hypotheses(const PremiseSet& p, int n, HypothesisMode mode,
                                  const std::optional<Dag>& include_truth,
                                  std::uint64_t rng_seed, int enum_cap,
                                  const SampledSearchConfig& search) {
    if (n < 2) throw InputError("hypothesis count must be >= 2");
    if (mode == HypothesisMode::OracleLlm) {
        throw InputError("LLM hypothesis generation goes through generate_hypotheses_llm");
    }

    HypothesisSet out;
    if (mode == HypothesisMode::Exact) {
        auto full = consistent_dags(p, SearchMode::Exact, 0, rng_seed, enum_cap);
        if (static_cast<int>(full.size()) > n) {
            Rng rng(rng_seed);
            // Seeded partial Fisher-Yates: keep the first n after shuffling.
            for (int i = 0; i < n; ++i) {
                const std::size_t j = i + rng.uniform_int(full.size() - i);
                std::swap(full[i], full[j]);
            }
            full.erase(full.begin() + n, full.end());
        }
        out.dags = std::move(full);
    } else {
        out.dags = consistent_dags(p, SearchMode::Sampled, n, rng_seed, enum_cap, search);
    }

    if (include_truth) {
        int idx = -1;
        for (std::size_t k = 0; k < out.dags.size(); ++k) {
            if (out.dags[k] == *include_truth) {
                idx = static_cast<int>(k);
                break;
            }
        }
        if (idx < 0) {
            if (static_cast<int>(out.dags.size()) < n) {
                out.dags.push_back(*include_truth);
            } else {
                out.dags.back() = *include_truth;
            }
            idx = static_cast<int>(out.dags.size()) - 1;
            out.truth_forced = true;
        }
        out.truth_index = idx;
    }

    if (out.dags.size() < 2) {
        throw DegenerateHypothesisSpace(
            "fewer than 2 distinct consistent DAGs: nothing to discriminate");
    }
    return out;
}

std::string render_generation_prompt(const std::string& premise_text,
                                     const std::vector<std::string>& names, int n) {
    std::string vars;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) vars += ", ";
        vars += names[i];
    }
    return premise_text +
           " List up to " + std::to_string(n) +
           " distinct directed acyclic graphs over the variables " + vars +
           " that are consistent with all statements above. Reply with JSON only, in the form "
           "{\"graphs\": [{\"edges\": [[\"X\", \"Y\"], ...]}, ...]} where each edge [\"X\", \"Y\"] "
           "means X directly causes Y.";
}

HypothesisSet generate_hypotheses_llm(const PremiseSet& p, const std::string& premise_text,
                                      const std::vector<std::string>& names, int n,
                                      const std::function<std::string(const std::string&)>& complete,
                                      std::uint64_t rng_seed,
                                      const SampledSearchConfig& search) {
    if (n < 2) throw InputError("hypothesis count must be >= 2");
    const std::string reply = complete(render_generation_prompt(premise_text, names, n));

    HypothesisSet out;
    std::set<std::vector<std::pair<int, int>>> seen;
    const auto brace = reply.find('{');
    if (brace != std::string::npos) {
        nlohmann::json j = nlohmann::json::parse(reply.substr(brace), nullptr, false);
        if (!j.is_discarded() && j.contains("graphs") && j["graphs"].is_array()) {
            for (const auto& graph : j["graphs"]) {
                if (!graph.contains("edges") || !graph["edges"].is_array()) continue;
                std::vector<std::pair<int, int>> edges;
                bool ok = true;
                for (const auto& e : graph["edges"]) {
                    if (!e.is_array() || e.size() != 2) { ok = false; break; }
                    const auto find = [&](const std::string& nm) {
                        for (std::size_t i = 0; i < names.size(); ++i) {
                            if (names[i] == nm) return static_cast<int>(i);
                        }
                        return -1;
                    };
                    const int a = find(e[0].get<std::string>());
                    const int b = find(e[1].get<std::string>());
                    if (a < 0 || b < 0 || a == b) { ok = false; break; }
                    edges.emplace_back(a, b);
                }
                if (!ok) continue;
                std::sort(edges.begin(), edges.end());
                edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
                try {
                    Dag g(p.num_vars, std::vector<std::string>(names), edges);
                    if (premise_consistent(g, p) && seen.insert(edges).second) {
                        out.dags.push_back(std::move(g));
                        if (static_cast<int>(out.dags.size()) >= n) break;
                    }
                } catch (const std::exception&) {
                    // Cyclic or malformed proposal: skipped.
                }
            }
        }
    }

    if (static_cast<int>(out.dags.size()) < n) {
        for (auto& g : consistent_dags(p, SearchMode::Sampled, n, rng_seed, kDefaultEnumCap,
                                       search)) {
            auto edges = g.edges();
            std::sort(edges.begin(), edges.end());
            if (seen.insert(edges).second) {
                out.dags.push_back(std::move(g));
                if (static_cast<int>(out.dags.size()) >= n) break;
            }
        }
    }
    if (out.dags.size() < 2) {
        throw DegenerateHypothesisSpace(
            "fewer than 2 distinct consistent DAGs: nothing to discriminate");
    }
    return out;
}

RunResult run_acbo(const RunInputs& inputs, InterventionOracle& oracle, const AcboConfig& cfg,
                   std::uint64_t rng_seed) {
    cfg.validate();
    const auto& hyps = inputs.hypotheses;
    if (hyps.size() < 2) {
        throw DegenerateHypothesisSpace("the loop needs at least 2 hypotheses");
    }
    for (const auto& g : hyps) {
        if (g.num_vars() != hyps[0].num_vars() || g.var_names() != hyps[0].var_names()) {
            throw InputError("hypotheses must share one variable set");
        }
    }

    const double eta_eff = effective_error(cfg.eta, cfg.votes_m);
    Posterior pi = Posterior::uniform(static_cast<int>(hyps.size()));
    Rng rng(rng_seed);

    RunResult result;
    result.stop_rule = cfg.stop_rule;

    auto stopped = [&](const Posterior& p) {
        return cfg.stop_rule == StopRule::MapThreshold ? p.max_mass() > 1.0 - cfg.stop_delta
                                                       : entropy(p) < cfg.stop_delta;
    };

    std::vector<int> preds(hyps.size());
    for (int t = 1; t <= cfg.budget_t; ++t) {
        if (stopped(pi)) {
            result.converged = true;
            break;
        }

        InterventionChoice choice;
        try {
            choice = select_intervention(pi, hyps, eta_eff, cfg.explore_eps, rng);
        } catch (const StallError& e) {
            throw RunAbort(RunAbort::Kind::Stall, e.what(), std::move(result.trajectory));
        }

        OracleQuery q;
        q.query_id = inputs.instance_id + ":" + std::to_string(t);
        q.premise_text = inputs.premise_text;
        q.var_names = hyps[0].var_names();
        q.intervention = Intervention{choice.pair.source};
        q.observed = choice.pair.sink;

        OracleResponse resp;
        try {
            resp = oracle.query(q);
        } catch (const OracleError& e) {
            throw RunAbort(RunAbort::Kind::Oracle, e.what(), std::move(result.trajectory));
        }

        for (std::size_t k = 0; k < hyps.size(); ++k) preds[k] = r_hat(hyps[k], choice.pair);
        try {
            pi = bayes_update(pi, preds, resp.answer, eta_eff);
        } catch (const ContradictionError& e) {
            throw RunAbort(RunAbort::Kind::Contradiction, e.what(), std::move(result.trajectory));
        }

        RoundLog log;
        log.round_index = t;
        log.chosen_pair = choice.pair;
        log.ig_score = choice.ig_score;
        log.was_random = choice.was_random;
        log.response = resp;
        log.posterior_after = pi;
        result.trajectory.push_back(std::move(log));
        result.rounds_used = t;
    }
    if (!result.converged && stopped(pi)) result.converged = true;

    const int map = pi.argmax();
    result.map_graph = hyps[map];
    result.map_mass = pi.weights[map];
    return result;
}

TheoreticalBound theoretical_rounds(int n, double eta) {
    if (n < 2) throw InputError("theoretical_rounds requires n >= 2");
    if (!(eta > 0.0 && eta < 0.5)) {
        throw InputError("theoretical_rounds requires 0 < eta < 0.5");
    }
    // Guard the ceiling against FP noise at integer crossings (log(9^k)/log 9).
    const double x = std::log(static_cast<double>(n)) / std::log((1.0 - eta) / eta);
    const int rounds = std::max(1, static_cast<int>(std::ceil(x - 1e-9)));
    return TheoreticalBound{rounds, 1.0 - n * std::pow(eta, rounds)};
}

}  // namespace acbo
