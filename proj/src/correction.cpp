#include "raresim/correction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace raresim {

double midpoint_quantile(std::vector<double> values, double p0) {
    const std::size_t n = values.size();
    const double np0 = static_cast<double>(n) * p0;
    const std::size_t k = static_cast<std::size_t>(std::llround(np0));
    if (k < 1 || k >= n)
        throw std::invalid_argument("midpoint_quantile: N*p0 out of range");
    std::sort(values.begin(), values.end());
    return 0.5 * (values[k - 1] + values[k]);
}

namespace {

double working_quantile(const std::vector<Sample>& population, double p0) {
    std::vector<double> values(population.size());
    for (std::size_t i = 0; i < population.size(); ++i)
        values[i] = population[i].eval.value();
    return midpoint_quantile(std::move(values), p0);
}

void replace_with_true(Sample& s, const LimitState& g, DesignSet* design,
                       std::size_t& evals) {
    if (s.eval_kind == EvalKind::True) return;
    // rejected chain steps duplicate samples; the archive dedupes those
    if (design) {
        if (auto v = design->lookup(s.coords)) {
            s.eval = *v;
            s.eval_kind = EvalKind::True;
            return;
        }
    }
    s.eval = g.evaluate(s.coords);
    s.eval_kind = EvalKind::True;
    ++evals;
    if (design) design->insert(s.coords, *s.eval);
}

}  // namespace

ThresholdFixResult fix_intermediate_threshold(std::vector<Sample>& population,
                                              const LimitState& g, double p0,
                                              const CorrectionConfig& cfg,
                                              DesignSet* design) {
    const std::size_t n = population.size();
    std::vector<char> processed(n, 0);
    std::size_t n_processed = 0;

    ThresholdFixResult out;
    out.c = working_quantile(population, p0);

    while (n_processed < n) {
        // batch: the delta_N unprocessed samples with the lowest working values
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return population[a].eval.value() < population[b].eval.value();
        });
        std::size_t taken = 0;
        for (std::size_t idx : order) {
            if (taken == cfg.delta_N) break;
            if (processed[idx]) continue;
            replace_with_true(population[idx], g, design, out.true_evals);
            processed[idx] = 1;
            ++taken;
            ++n_processed;
        }
        ++out.iterations;
        const double c_next = working_quantile(population, p0);
        const double eps = cfg.eps_abs ? *cfg.eps_abs
                                       : cfg.eps_threshold_rel * std::abs(c_next);
        const bool converged = eps > 0.0 && std::abs(c_next - out.c) <= eps;
        out.c = c_next;
        if (converged) break;
    }
    return out;
}

ProbabilityFixResult fix_final_probability(std::vector<Sample>& population,
                                           const LimitState& g,
                                           const CorrectionConfig& cfg,
                                           DesignSet* design) {
    const std::size_t n = population.size();
    std::vector<char> processed(n, 0);
    std::size_t n_processed = 0;

    ProbabilityFixResult out;
    for (const auto& s : population)
        if (s.eval.value() <= 0.0) ++out.failure_count;
    out.p = static_cast<double>(out.failure_count) / static_cast<double>(n);

    while (n_processed < n) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(population[a].eval.value()) <
                   std::abs(population[b].eval.value());
        });
        std::size_t taken = 0;
        for (std::size_t idx : order) {
            if (taken == cfg.delta_N) break;
            if (processed[idx]) continue;
            Sample& s = population[idx];
            const bool was_failure = s.eval.value() <= 0.0;
            replace_with_true(s, g, design, out.true_evals);
            const bool is_failure = s.eval.value() <= 0.0;
            if (was_failure && !is_failure) --out.failure_count;
            if (!was_failure && is_failure) ++out.failure_count;
            processed[idx] = 1;
            ++taken;
            ++n_processed;
        }
        ++out.iterations;
        const double p_next =
            static_cast<double>(out.failure_count) / static_cast<double>(n);
        const double eps =
            cfg.eps_abs ? *cfg.eps_abs : cfg.eps_probability_rel * p_next;
        const bool converged = eps > 0.0 && std::abs(p_next - out.p) <= eps;
        out.p = p_next;
        if (converged) break;
    }
    return out;
}

}  // namespace raresim
