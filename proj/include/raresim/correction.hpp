#pragma once

#include <optional>
#include <vector>

#include "raresim/limit_state.hpp"
#include "raresim/types.hpp"

namespace raresim {

struct CorrectionConfig {
    std::size_t delta_N = 10;
    // stopping tolerance: eps_abs when set, otherwise relative to the
    // current estimate (1e-3*|c| for thresholds, 0.05*P for probabilities)
    double eps_threshold_rel = 1e-3;
    double eps_probability_rel = 0.05;
    std::optional<double> eps_abs;
};

struct ThresholdFixResult {
    double c;
    std::size_t true_evals = 0;
    std::size_t iterations = 0;
};

struct ProbabilityFixResult {
    double p;
    std::size_t failure_count = 0;
    std::size_t true_evals = 0;
    std::size_t iterations = 0;
};

/// Post-hoc intermediate-threshold fix: working values are replaced by true
/// evaluations in ascending order, delta_N per batch, until the
/// order-statistic midpoint threshold (G_{Np0} + G_{Np0+1})/2 stabilizes or
/// every value is true. Samples already carrying true values are consumed
/// from the batch without re-evaluation. New true values go into `design`
/// when one is supplied.
ThresholdFixResult fix_intermediate_threshold(std::vector<Sample>& population,
                                              const LimitState& g, double p0,
                                              const CorrectionConfig& cfg,
                                              DesignSet* design = nullptr);

/// Final-probability fix: replaces working values in ascending |G| order and
/// tracks the failure count (g <= 0) exactly, stopping when successive
/// estimates agree within tolerance or all values are replaced.
ProbabilityFixResult fix_final_probability(std::vector<Sample>& population,
                                           const LimitState& g,
                                           const CorrectionConfig& cfg,
                                           DesignSet* design = nullptr);

/// Order-statistic midpoint quantile used for every threshold in the
/// toolkit: values sorted ascending, (G_{Np0} + G_{Np0+1})/2 (1-based).
double midpoint_quantile(std::vector<double> values, double p0);

}  // namespace raresim
