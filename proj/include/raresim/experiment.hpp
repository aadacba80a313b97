#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "raresim/engine.hpp"

namespace raresim {

inline constexpr const char* kVersion = "raresim 0.1.0";

/// Multi-seed, multi-cell experiment: every (mode, p0, N) cell executes
/// n_runs with the same seed list so modes can be compared pairwise.
struct ExperimentSpec {
    RunConfig base;
    std::vector<RunMode> modes;        // empty: just base.mode
    std::size_t n_runs = 20;
    std::vector<std::uint64_t> seeds;  // empty: base.seed + i
    std::vector<double> p0_sweep;      // empty: {base.p0}
    std::vector<std::size_t> N_sweep;  // empty: {base.N}
    std::optional<double> ref_pf;
    std::string out_dir = "results";
    std::size_t threads = 0;  // 0: hardware concurrency

    void validate() const;
    std::vector<std::uint64_t> run_seeds() const;
    std::vector<RunMode> run_modes() const;
};

/// JSON config file -> validated spec with defaults applied. Unknown keys
/// and out-of-range values raise std::invalid_argument naming the key path.
ExperimentSpec parse_config(const std::string& path);
ExperimentSpec parse_config_text(const std::string& text);

struct RunRecord {
    std::string cell;
    RunMode mode = RunMode::Standard;
    double p0 = 0.1;
    std::size_t N = 0;
    std::uint64_t seed = 0;
    std::string benchmark;
    std::size_t d = 0;
    bool ok = false;
    std::string error;
    RunResult result;
    std::optional<double> ref_pf;
};

struct CellAggregate {
    std::string cell;
    RunMode mode = RunMode::Standard;
    double p0 = 0.1;
    std::size_t N = 0;
    std::size_t n_runs = 0;
    std::size_t n_failed = 0;
    double mean_pf = 0.0;
    double std_pf = 0.0;
    double mean_n0 = 0.0;          // mean true evaluations at level 0
    double mean_nhat_total = 0.0;  // mean true evaluations overall
    double mean_n_total = 0.0;     // mean of N + N(1-p0)(L-1)
    std::optional<double> eps;     // vs reference P_F
    std::optional<double> eps0;    // vs the paired standard-mode cell
};

struct ExperimentReport {
    std::vector<RunRecord> runs;
    std::vector<CellAggregate> cells;
    std::size_t total_runs = 0;
    std::size_t failed_runs = 0;

    bool failure_rate_exceeded() const {
        return total_runs > 0 &&
               static_cast<double>(failed_runs) >
                   0.2 * static_cast<double>(total_runs);
    }
};

/// Cell directory name, e.g. "g11-standard-p0.1-N1000".
std::string cell_name(const std::string& benchmark, RunMode mode, double p0,
                      std::size_t N);

/// Executes the sweep on a worker pool and writes runs/<cell>/<seed>.json,
/// aggregate.csv and plotdata.csv under spec.out_dir. Individual run
/// failures are recorded without aborting. Output bytes depend only on the
/// spec (wall-clock times are kept out of the files).
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Aggregation without file output (used by report and tests).
std::vector<CellAggregate> aggregate(const std::vector<RunRecord>& runs);

/// Per-run JSON document (version + resolved config + result).
std::string run_record_json(const RunRecord& rec, const ExperimentSpec& spec);

/// RFC-4180 field escaping.
std::string csv_field(const std::string& value);

/// Reads runs/*/*.json under `dir` and prints grouped summary tables.
/// Returns 0 on success, nonzero when no readable results exist.
int report_directory(const std::string& dir, std::ostream& out);

}  // namespace raresim
