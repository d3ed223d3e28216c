// Command-line driver for the Monte Carlo experiments.
//
//   hisparse recovery-grid   [--config cfg.json] [--seed S] [--out DIR] [--threads T] [--paper-scale]
//   hisparse block-detection ...
//   hisparse theorem-verify  ...
//
// recovery-grid and block-detection write DIR/trials.csv and DIR/summary.json;
// theorem-verify writes DIR/report.json. The exit code is non-zero iff an
// invariant check fails or the run could not be performed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hisparse/experiment.hpp"

namespace fs = std::filesystem;
using namespace hisparse;
using namespace hisparse::harness;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    bool paper_scale = false;
    bool record_timing = false;
};

ExperimentConfig load_config(Scenario scenario, const Options& opt) {
    ExperimentConfig cfg = opt.paper_scale ? ExperimentConfig::paper_scale(scenario) : ExperimentConfig::desk(scenario);
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw std::runtime_error("cannot open config file " + opt.config_path);
        cfg = config_from_json(nlohmann::json::parse(in), cfg);
    }
    cfg.scenario = scenario;
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (opt.out) cfg.output_path = *opt.out;
    if (opt.threads) cfg.threads = *opt.threads;
    if (opt.record_timing) cfg.record_timing = true;
    return cfg;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

/// Aggregates must be reproducible from the raw rows and rates must be probabilities.
bool grid_invariants_hold(const ExperimentResult& result) {
    for (const auto& r : result.records) {
        if (r.detection_rate < 0.0 || r.detection_rate > 1.0) return false;
    }
    const auto again = summarize(result.records);
    if (again.size() != result.cells.size()) return false;
    for (std::size_t i = 0; i < again.size(); ++i) {
        if (again[i].successes != result.cells[i].successes || again[i].trials != result.cells[i].trials) return false;
    }
    return true;
}

int run(Scenario scenario, const Options& opt) {
    const auto cfg = load_config(scenario, opt);
    const fs::path out_dir(cfg.output_path);
    fs::create_directories(out_dir);

    if (scenario == Scenario::theorem_verify) {
        const auto report = run_theorem_verify(cfg);
        write_file(out_dir / "report.json", to_json(report).dump(2) + "\n");
        std::cout << "theorem-verify: " << report.instances << " instances, " << report.skipped << " skipped, "
                  << report.theorem.violations << " bound violations, worst slack " << report.theorem.worst_slack
                  << (report.passed ? "  [pass]" : "  [FAIL]") << "\n";
        return report.passed ? 0 : 1;
    }

    const auto result =
        scenario == Scenario::recovery_grid ? run_recovery_grid(cfg) : run_block_detection(cfg);
    write_file(out_dir / "trials.csv", trials_csv(result.records));
    write_file(out_dir / "summary.json", summary_json(cfg, result).dump(2) + "\n");
    for (const auto& reason : result.skipped) std::cerr << "skipped " << reason << "\n";
    std::cout << to_string(scenario) << ": " << result.records.size() << " trials in " << result.cells.size()
              << " cells -> " << out_dir.string() << "\n";
    return grid_invariants_hold(result) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical sparse recovery experiments"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "master seed (overrides config)");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--paper-scale", opt.paper_scale, "start from the published experiment dimensions");
        sub->add_flag("--record-timing", opt.record_timing, "fill wall_millis (makes trials.csv non-reproducible)");
    };
    auto* grid = app.add_subcommand("recovery-grid", "noisy recovery success over an (s, sigma) grid");
    auto* detection = app.add_subcommand("block-detection", "active-block detection, uniform vs mixed block lengths");
    auto* verify = app.add_subcommand("theorem-verify", "enumerate RIP/HiRIP constants on random small instances");
    for (auto* sub : {grid, detection, verify}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        if (grid->parsed()) return run(Scenario::recovery_grid, opt);
        if (detection->parsed()) return run(Scenario::block_detection, opt);
        return run(Scenario::theorem_verify, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
