#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "raresim/correction.hpp"
#include "raresim/limit_state.hpp"
#include "raresim/local.hpp"
#include "raresim/mcmc.hpp"
#include "raresim/types.hpp"

namespace raresim {

enum class RunMode { Standard, LocalGp, LocalQuadratic, LocalPlsGp };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

struct RunConfig {
    std::string benchmark = "g11";
    BenchmarkOptions bench;
    RunMode mode = RunMode::Standard;
    std::size_t N = 1000;
    double p0 = 0.1;
    std::uint64_t seed = 1;
    RefinementPolicy policy;
    CorrectionConfig correction;
    GpOptions gp;
    PlsOptions pls;
    std::optional<std::size_t> N0_override;
    std::optional<bool> high_dim_override;  // default: d > 20
    std::size_t max_levels = 20;
    double lambda0 = 0.6;
    std::size_t adapt_window = 10;  // chain-starts between adaptations
    double warm_fraction = 0.1;     // M = warm_fraction * N

    void validate() const;
    bool is_local() const { return mode != RunMode::Standard; }
};

struct LevelRecord {
    std::size_t j = 0;
    double c_j = 0.0;
    double p_j = 0.0;       // conditional probability estimate for the level
    double accept_rate = 0.0;
    double gamma_j = 0.0;
    double delta_j = 0.0;
    std::size_t true_evals = 0;
    std::size_t surrogate_evals = 0;
    std::size_t refine_evals = 0;  // share of true_evals spent on refinement
    std::size_t fix_evals = 0;     // share spent in the threshold corrections
};

struct RunResult {
    double p_f = 0.0;
    double p_final = 0.0;  // last-level conditional estimate
    std::size_t levels_count = 0;  // L (so L-1 chain levels)
    std::vector<LevelRecord> levels;
    std::size_t n_total = 0;    // true limit-state evaluations
    std::size_t n0_evals = 0;   // true evaluations spent at level 0
    double cov_independent = 0.0;
    double cov_correlated = 0.0;
    double wall_seconds = 0.0;
};

/// Builder override hook; used by tests to inject e.g. a zero-error
/// surrogate. Receives the limit state driving the run.
using BuilderFactory = std::function<std::unique_ptr<LocalModelBuilder>(
    const LimitState&, const RunConfig&)>;

/// One subset-simulation run. When `limit_state` is null the benchmark named
/// in the config is instantiated (and its counter defines n_total).
RunResult run(const RunConfig& config,
              std::shared_ptr<LimitState> limit_state = nullptr,
              const BuilderFactory& builder_factory = nullptr);

// -- performance diagnostics -------------------------------------------------

/// floor(log P_F / log p0).
std::size_t expected_levels(double p_f, double p0);

/// N + N*(1 - p0)*(L - 1).
std::size_t total_evaluations(std::size_t N, double p0, std::size_t L);

/// Per-level coefficient of variation sqrt((1-P)/(N P) * (1+gamma)).
double level_cov(double p_j, std::size_t N, double gamma_j);

enum class CovMode { Independent, Correlated };

/// Combine per-level CoVs: root-sum-square (independence) or plain sum
/// (full-correlation upper bound).
double total_cov(const std::vector<double>& deltas, CovMode mode);

/// Within-chain autocorrelation factor gamma from per-chain indicator
/// sequences (0/1), all of equal length.
double chain_autocorrelation(const std::vector<std::vector<int>>& chains,
                             double p_j);

}  // namespace raresim
