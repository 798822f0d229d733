// Command-line front end: dataset generation, discrimination-loop experiments,
// convergence sweeps, kernel-margin sweeps, metric reports and replay.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "acbo/benchgen.hpp"
#include "acbo/harness.hpp"

namespace fs = std::filesystem;
using namespace acbo;

namespace {

// "7..10", "7,9,12" or "7".
std::vector<int> parse_depths(const std::string& spec) {
    std::vector<int> out;
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(spec.substr(0, dots));
        const int hi = std::stoi(spec.substr(dots + 2));
        if (hi < lo) throw ConfigError("bad depth range: " + spec);
        for (int d = lo; d <= hi; ++d) out.push_back(d);
        return out;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        const auto comma = spec.find(',', pos);
        const auto part = spec.substr(pos, comma == std::string::npos ? spec.npos : comma - pos);
        if (!part.empty()) out.push_back(std::stoi(part));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty depth spec");
    return out;
}

// "16:0.1,8:0.2" -> {(16, 0.1), (8, 0.2)}.
std::vector<std::pair<int, double>> parse_grid(const std::string& spec) {
    std::vector<std::pair<int, double>> out;
    std::size_t pos = 0;
    while (pos < spec.size()) {
        const auto comma = spec.find(',', pos);
        const auto part = spec.substr(pos, comma == std::string::npos ? spec.npos : comma - pos);
        const auto colon = part.find(':');
        if (colon == std::string::npos) throw ConfigError("grid entries are n:eta, got " + part);
        out.emplace_back(std::stoi(part.substr(0, colon)), std::stod(part.substr(colon + 1)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("empty convergence grid");
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << content;
}

int cmd_gen(const std::string& depth_spec, int per_depth, std::uint64_t seed,
            const std::string& out_dir, int dev_n, int test_n, double edge_prob, int workers) {
    const auto depths = parse_depths(depth_spec);
    fs::create_directories(out_dir);

    GenPolicy policy;
    policy.edge_prob = edge_prob;
    policy.workers = workers;

    std::vector<BenchInstance> all;
    for (const int d : depths) {
        auto instances = generate(d, per_depth, Rng::derive(seed, d), policy);
        int dn = dev_n, tn = test_n;
        if (dn < 0) dn = std::min(1000, per_depth / 3);
        if (tn < 0) tn = std::min(1000, per_depth / 3);
        split_assign(instances, dn, tn, Rng::derive(seed, 1000 + d));
        write_jsonl_file(out_dir + "/extended_d" + std::to_string(d) + ".jsonl", instances);
        all.insert(all.end(), instances.begin(), instances.end());
        std::cout << "d=" << d << ": " << instances.size() << " instances\n";
    }
    write_text(out_dir + "/manifest.csv", manifest(all).to_csv());
    std::cout << "wrote " << all.size() << " instances to " << out_dir << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& dataset_override,
            const std::string& out_override, bool resume) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (!dataset_override.empty()) cfg.dataset_path = dataset_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (cfg.dataset_path.empty()) throw ConfigError("run needs a dataset path");
    if (cfg.out_dir.empty()) throw ConfigError("run needs an output directory");
    fs::create_directories(cfg.out_dir);

    const auto instances = read_jsonl_file(cfg.dataset_path);
    const std::string checkpoint_path = cfg.out_dir + "/checkpoint.jsonl";

    std::map<std::string, PredictionRecord> done;
    if (resume && fs::exists(checkpoint_path)) {
        std::ifstream in(checkpoint_path);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty()) continue;
            auto rec = PredictionRecord::from_jsonl(line, n);
            done[rec.instance_id] = rec;
        }
        std::cout << "resuming: " << done.size() << " instances already done\n";
    } else if (fs::exists(checkpoint_path)) {
        fs::remove(checkpoint_path);
    }

    const auto outcome = run_dataset(instances, cfg, checkpoint_path, resume ? &done : nullptr);

    std::string preds;
    for (const auto& p : outcome.predictions) preds += p.to_jsonl() + "\n";
    write_text(cfg.out_dir + "/predictions.jsonl", preds);
    write_text(cfg.out_dir + "/report.json", outcome.metrics.to_json() + "\n");
    write_text(cfg.out_dir + "/config.json", cfg.to_json() + "\n");
    std::cout << outcome.metrics.to_json() << "\n";
    return 0;
}

int cmd_convergence(const std::string& grid_spec, int trials, int depth, std::uint64_t seed,
                    int budget, double stop_delta, const std::string& out_dir, int workers) {
    const auto grid = parse_grid(grid_spec);
    const auto outcome = run_convergence(grid, trials, depth, seed, budget, stop_delta, workers);

    std::cout << "n,eta,tstar,floor,success_tstar,success_full,mean_rounds,converged\n";
    for (const auto& p : outcome.points) {
        std::cout << p.n << ',' << p.eta << ',' << p.tstar << ',' << p.floor << ','
                  << p.success_tstar << ',' << p.success_full << ',' << p.mean_rounds << ','
                  << p.converged_fraction << "\n";
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(out_dir + "/convergence_trials.csv", outcome.trials_csv);
        write_text(out_dir + "/convergence_trajectories.csv", outcome.trajectory_csv);
    }
    return 0;
}

int cmd_kernel(const std::string& range_spec, const std::string& out_path) {
    const auto depths = parse_depths(range_spec);
    const auto csv = kernel_sweep_csv(depths.front(), depths.back());
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_text(out_path, csv);
    }
    return 0;
}

int cmd_report(const std::string& predictions_path) {
    std::ifstream in(predictions_path);
    if (!in) throw DataError("cannot open predictions: " + predictions_path);
    std::vector<PredictionRecord> records;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        records.push_back(PredictionRecord::from_jsonl(line, n));
    }
    std::cout << compute_metrics(records).to_json() << "\n";
    return 0;
}

int cmd_replay(const std::string& config_path, const std::string& dataset_override,
               const std::string& out_override) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (!dataset_override.empty()) cfg.dataset_path = dataset_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    cfg.oracle.mode = OracleMode::Replay;
    cfg.trials = 1;  // a transcript records exactly one pass
    if (cfg.dataset_path.empty() || cfg.out_dir.empty()) {
        throw ConfigError("replay needs a dataset path and the output directory "
                          "holding transcripts/");
    }
    const auto instances = read_jsonl_file(cfg.dataset_path);
    const auto outcome = run_dataset(instances, cfg);

    std::string preds;
    for (const auto& p : outcome.predictions) preds += p.to_jsonl() + "\n";
    write_text(cfg.out_dir + "/replay_predictions.jsonl", preds);
    write_text(cfg.out_dir + "/replay_report.json", outcome.metrics.to_json() + "\n");
    std::cout << outcome.metrics.to_json() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal discovery by Bayesian intervention selection over a binary oracle"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "Generate benchmark instances + manifest");
    std::string gen_depths = "7", gen_out = "out/dataset";
    int gen_per_depth = 100, gen_dev = -1, gen_test = -1, gen_workers = 0;
    std::uint64_t gen_seed = 1;
    double gen_edge_prob = -1.0;
    gen->add_option("--depths", gen_depths, "Depth spec: 7, 7..10 or 7,9,12");
    gen->add_option("--per-depth", gen_per_depth, "Instances per depth");
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--out", gen_out, "Output directory");
    gen->add_option("--dev-n", gen_dev, "Dev split size (default min(1000, n/3))");
    gen->add_option("--test-n", gen_test, "Test split size (default min(1000, n/3))");
    gen->add_option("--edge-prob", gen_edge_prob, "Edge probability (default 3/(d-1) capped at 0.5)");
    gen->add_option("--workers", gen_workers, "Worker threads (0 = auto)");

    auto* run = app.add_subcommand("run", "Run the discrimination loop over a dataset");
    std::string run_config, run_dataset_path, run_out;
    bool run_resume = false;
    run->add_option("--config", run_config, "Experiment config JSON")->required();
    run->add_option("--dataset", run_dataset_path, "Dataset JSONL (overrides config)");
    run->add_option("--out", run_out, "Output directory (overrides config)");
    run->add_flag("--resume", run_resume, "Resume from the checkpoint file");

    auto* conv = app.add_subcommand("convergence", "Monte-Carlo convergence sweep");
    std::string conv_grid = "16:0.1,8:0.2,32:0.1", conv_out;
    int conv_trials = 2000, conv_depth = 5, conv_budget = 20, conv_workers = 0;
    std::uint64_t conv_seed = 1;
    double conv_stop = 0.01;
    conv->add_option("--grid", conv_grid, "Comma list of n:eta points");
    conv->add_option("--trials", conv_trials, "Trials per grid point");
    conv->add_option("--depth", conv_depth, "Variable count of the sampled hypotheses");
    conv->add_option("--seed", conv_seed, "Master seed");
    conv->add_option("--budget", conv_budget, "Round budget T");
    conv->add_option("--stop-delta", conv_stop, "Stop threshold delta_c");
    conv->add_option("--out", conv_out, "Directory for trial/trajectory CSVs");
    conv->add_option("--workers", conv_workers, "Worker threads (0 = auto)");

    auto* kernel = app.add_subcommand("kernel", "Near-miss margin-bound sweep CSV");
    std::string kernel_range = "3..24", kernel_out;
    kernel->add_option("--d-range", kernel_range, "Depth range, e.g. 7..24");
    kernel->add_option("--out", kernel_out, "CSV path (default stdout)");

    auto* report = app.add_subcommand("report", "Metrics from a predictions JSONL");
    std::string report_preds;
    report->add_option("--predictions", report_preds, "predictions.jsonl path")->required();

    auto* replay = app.add_subcommand("replay", "Re-run a dataset from recorded transcripts");
    std::string replay_config, replay_dataset, replay_out;
    replay->add_option("--config", replay_config, "Experiment config JSON")->required();
    replay->add_option("--dataset", replay_dataset, "Dataset JSONL (overrides config)");
    replay->add_option("--out", replay_out, "Output directory with transcripts/");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen(gen_depths, gen_per_depth, gen_seed, gen_out, gen_dev, gen_test,
                           gen_edge_prob, gen_workers);
        }
        if (run->parsed()) return cmd_run(run_config, run_dataset_path, run_out, run_resume);
        if (conv->parsed()) {
            return cmd_convergence(conv_grid, conv_trials, conv_depth, conv_seed, conv_budget,
                                   conv_stop, conv_out, conv_workers);
        }
        if (kernel->parsed()) return cmd_kernel(kernel_range, kernel_out);
        if (report->parsed()) return cmd_report(report_preds);
        if (replay->parsed()) return cmd_replay(replay_config, replay_dataset, replay_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
