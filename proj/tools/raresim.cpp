#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "raresim/experiment.hpp"
#include "raresim/limit_state.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::size_t>& n_runs,
            const std::optional<std::uint64_t>& seed,
            const std::optional<std::string>& mode) {
    raresim::ExperimentSpec spec;
    try {
        spec = raresim::parse_config(config_path);
        if (out) spec.out_dir = *out;
        if (n_runs) {
            if (*n_runs < 1) throw std::invalid_argument("--n-runs: must be >= 1");
            spec.n_runs = *n_runs;
            spec.seeds.clear();
        }
        if (seed) {
            spec.base.seed = *seed;
            spec.seeds.clear();
        }
        if (mode) {
            spec.base.mode = raresim::run_mode_from_string(*mode);
            spec.modes.clear();
        }
        spec.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    raresim::ExperimentReport report;
    try {
        report = raresim::run_experiment(spec);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::cout << report.total_runs - report.failed_runs << "/"
              << report.total_runs << " runs completed; results in "
              << spec.out_dir << "\n";
    for (const auto& rec : report.runs)
        if (!rec.ok)
            std::cerr << "run failed: " << rec.cell << " seed " << rec.seed
                      << ": " << rec.error << "\n";
    for (const auto& cell : report.cells) {
        std::printf("%-40s  mean_pf=%.4g  std_pf=%.3g  mean_evals=%.1f\n",
                    cell.cell.c_str(), cell.mean_pf, cell.std_pf,
                    cell.mean_nhat_total);
    }
    return report.failure_rate_exceeded() ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rare-event reliability toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out_dir, mode;
    std::optional<std::size_t> n_runs;
    std::optional<std::uint64_t> seed;
    auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
    run_cmd->add_option("config", config_path, "JSON experiment config")
        ->required();
    run_cmd->add_option("--out", out_dir, "output directory override");
    run_cmd->add_option("--n-runs", n_runs, "number of runs per cell");
    run_cmd->add_option("--seed", seed, "base seed override");
    run_cmd->add_option("--mode", mode, "run mode override");

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "summarize a results directory");
    report_cmd->add_option("dir", report_dir, "results directory")->required();

    auto* bench_cmd = app.add_subcommand("bench", "benchmark registry");
    auto* bench_list = bench_cmd->add_subcommand("list", "list benchmark ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (run_cmd->parsed())
        return cmd_run(config_path, out_dir, n_runs, seed, mode);
    if (report_cmd->parsed())
        return raresim::report_directory(report_dir, std::cout);
    if (bench_cmd->parsed()) {
        if (!bench_list->parsed()) {
            std::cerr << "error: expected `bench list`\n";
            return 1;
        }
        for (const auto& id : raresim::benchmark_ids()) std::cout << id << "\n";
        return 0;
    }
    return 1;
}
