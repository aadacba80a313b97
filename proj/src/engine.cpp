#include "raresim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "raresim/sampling.hpp"

namespace raresim {

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Standard: return "standard";
        case RunMode::LocalGp: return "local-gp";
        case RunMode::LocalQuadratic: return "local-quadratic";
        case RunMode::LocalPlsGp: return "local-pls-gp";
    }
    return "standard";
}

RunMode run_mode_from_string(const std::string& s) {
    if (s == "standard") return RunMode::Standard;
    if (s == "local-gp") return RunMode::LocalGp;
    if (s == "local-quadratic") return RunMode::LocalQuadratic;
    if (s == "local-pls-gp") return RunMode::LocalPlsGp;
    throw std::invalid_argument("unknown mode: " + s);
}

void RunConfig::validate() const {
    if (!(p0 > 0.0 && p0 < 1.0))
        throw std::invalid_argument("p0 must lie in (0,1)");
    if (N < 10) throw std::invalid_argument("N must be >= 10");
    const double np0 = static_cast<double>(N) * p0;
    if (std::abs(np0 - std::round(np0)) > 1e-9 || np0 < 1.0)
        throw std::invalid_argument("N*p0 must be a positive integer");
    if (max_levels < 1) throw std::invalid_argument("max_levels must be >= 1");
}

std::size_t expected_levels(double p_f, double p0) {
    if (!(p_f > 0.0 && p_f < 1.0 && p0 > 0.0 && p0 < 1.0))
        throw std::invalid_argument("expected_levels: arguments must lie in (0,1)");
    return static_cast<std::size_t>(std::floor(std::log(p_f) / std::log(p0)));
}

std::size_t total_evaluations(std::size_t N, double p0, std::size_t L) {
    if (L < 1) throw std::invalid_argument("total_evaluations: L must be >= 1");
    const double total = static_cast<double>(N) +
                         static_cast<double>(N) * (1.0 - p0) *
                             static_cast<double>(L - 1);
    return static_cast<std::size_t>(std::llround(total));
}

double level_cov(double p_j, std::size_t N, double gamma_j) {
    if (!(p_j > 0.0 && p_j <= 1.0))
        throw std::invalid_argument("level_cov: P_j must lie in (0,1]");
    if (p_j == 1.0) return 0.0;
    return std::sqrt((1.0 - p_j) / (static_cast<double>(N) * p_j) *
                     (1.0 + gamma_j));
}

double total_cov(const std::vector<double>& deltas, CovMode mode) {
    double acc = 0.0;
    for (double d : deltas)
        acc += mode == CovMode::Independent ? d * d : d;
    return mode == CovMode::Independent ? std::sqrt(acc) : acc;
}

double chain_autocorrelation(const std::vector<std::vector<int>>& chains,
                             double p_j) {
    if (chains.empty()) return 0.0;
    std::size_t n = chains.front().size();
    for (const auto& c : chains) n = std::min(n, c.size());
    const double Ns = static_cast<double>(chains.size());
    const double N = Ns * static_cast<double>(n);
    const double denom = p_j * (1.0 - p_j);
    if (!(denom > 0.0)) return 0.0;

    double gamma = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        double sum = 0.0;
        for (const auto& c : chains)
            for (std::size_t s = 0; s + k < n; ++s)
                sum += static_cast<double>(c[s] * c[s + k]);
        const double pairs = N - static_cast<double>(k) * Ns;
        const double R = sum / pairs - p_j * p_j;
        gamma += 2.0 * (1.0 - static_cast<double>(k) * Ns / N) * (R / denom);
    }
    return gamma;
}

namespace {

std::unique_ptr<LocalModelBuilder> default_builder(const RunConfig& cfg,
                                                   const LimitState& g) {
    const std::size_t d = g.dimension();
    const bool high_dim = cfg.high_dim_override.value_or(d > 20);
    const std::size_t N0 = cfg.N0_override.value_or(default_N0(d, high_dim));
    switch (cfg.mode) {
        case RunMode::LocalGp:
            return std::make_unique<GpLocalBuilder>(N0, cfg.gp);
        case RunMode::LocalQuadratic:
            return std::make_unique<QuadraticLocalBuilder>(N0);
        case RunMode::LocalPlsGp:
            return std::make_unique<PlsGpLocalBuilder>(d, cfg.pls, cfg.gp);
        default:
            throw std::logic_error("default_builder: standard mode has no builder");
    }
}

Vector seed_spread(const std::vector<Sample>& seeds) {
    const long d = seeds.front().coords.size();
    Vector mean = Vector::Zero(d);
    for (const auto& s : seeds) mean += s.coords;
    mean /= static_cast<double>(seeds.size());
    Vector var = Vector::Zero(d);
    for (const auto& s : seeds)
        var += (s.coords - mean).cwiseProduct(s.coords - mean);
    var /= static_cast<double>(seeds.size());
    Vector sd = var.cwiseSqrt();
    for (long i = 0; i < d; ++i) sd[i] = std::max(sd[i], 1e-3);
    return sd;
}

std::vector<std::size_t> ascending_order(const std::vector<Sample>& pop) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pop[a].eval.value() < pop[b].eval.value();
    });
    return order;
}

}  // namespace

RunResult run(const RunConfig& config, std::shared_ptr<LimitState> g,
              const BuilderFactory& builder_factory) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();

    if (!g) g = make_benchmark(config.benchmark, config.bench);
    g->reset_count();
    const std::size_t d = g->dimension();
    const std::size_t N = config.N;
    const std::size_t Ns =
        static_cast<std::size_t>(std::llround(static_cast<double>(N) * config.p0));

    const bool local = config.is_local();
    std::unique_ptr<LocalModelBuilder> builder;
    if (local)
        builder = builder_factory ? builder_factory(*g, config)
                                  : default_builder(config, *g);

    RngStream base(config.seed, 0);
    RngStream lhs_rng = base.substream(0);

    RunResult result;
    DesignSet design;
    std::vector<Sample> population;
    population.reserve(N);

    // level 0: Latin hypercube population
    {
        Matrix X = lhs_sample(N, d, lhs_rng);
        const std::size_t warm = static_cast<std::size_t>(
            std::ceil(config.warm_fraction * static_cast<double>(N)));
        std::size_t surrogate_evals = 0;
        for (std::size_t i = 0; i < N; ++i) {
            Vector theta = X.row(static_cast<long>(i)).transpose();
            if (!local) {
                population.emplace_back(theta, g->evaluate(theta), EvalKind::True);
            } else {
                auto r = local_start(theta, design, *builder, *g, config.policy,
                                     i, warm);
                population.emplace_back(theta, r.value, r.kind);
                if (r.kind == EvalKind::Surrogate) ++surrogate_evals;
            }
        }
        result.n0_evals = g->eval_count();
        LevelRecord rec;
        rec.j = 1;
        rec.surrogate_evals = surrogate_evals;
        result.levels.push_back(rec);
    }

    std::size_t j = 1;
    double c_prev = std::numeric_limits<double>::infinity();
    double c_j;
    double p_hat = 0.0;
    std::vector<std::vector<double>> chain_values;  // sequences behind the
                                                    // current population
    std::size_t evals_before_level = 0;

    while (true) {
        // threshold for this population (Alg.-4 improvement in local mode)
        if (local) {
            auto fix = fix_intermediate_threshold(population, *g, config.p0,
                                                  config.correction, &design);
            builder->design_changed();
            c_j = fix.c;
            result.levels.back().fix_evals += fix.true_evals;
        } else {
            std::vector<double> values(N);
            for (std::size_t i = 0; i < N; ++i) values[i] = *population[i].eval;
            c_j = midpoint_quantile(std::move(values), config.p0);
        }

        LevelRecord& rec = result.levels.back();
        rec.c_j = c_j;
        rec.true_evals = g->eval_count() - evals_before_level;

        if (c_j <= 0.0) {
            // final level: Monte Carlo estimate of the last conditional
            if (local) {
                auto fix = fix_final_probability(population, *g,
                                                 config.correction, &design);
                builder->design_changed();
                p_hat = fix.p;
                result.levels.back().fix_evals += fix.true_evals;
                rec.true_evals = g->eval_count() - evals_before_level;
            } else {
                std::size_t n_f = 0;
                for (const auto& s : population)
                    if (*s.eval <= 0.0) ++n_f;
                p_hat = static_cast<double>(n_f) / static_cast<double>(N);
            }
            rec.p_j = p_hat;
            if (j > 1) {
                std::vector<std::vector<int>> ind;
                ind.reserve(chain_values.size());
                for (const auto& seq : chain_values) {
                    std::vector<int> row(seq.size());
                    for (std::size_t i = 0; i < seq.size(); ++i)
                        row[i] = indicator(seq[i], 0.0);
                    ind.push_back(std::move(row));
                }
                rec.gamma_j = chain_autocorrelation(ind, p_hat);
            }
            rec.delta_j = p_hat > 0.0 ? level_cov(p_hat, N, rec.gamma_j) : 0.0;
            break;
        }

        if (c_j >= c_prev)
            throw std::runtime_error(
                "subset simulation stagnated: c_" + std::to_string(j) +
                " did not decrease (sampling may be heading in the wrong "
                "direction)");
        if (j >= config.max_levels)
            throw std::runtime_error(
                "max_levels reached without hitting the failure threshold "
                "(last c = " + std::to_string(c_j) + ")");

        rec.p_j = config.p0;
        if (j > 1) {
            std::vector<std::vector<int>> ind;
            ind.reserve(chain_values.size());
            for (const auto& seq : chain_values) {
                std::vector<int> row(seq.size());
                for (std::size_t i = 0; i < seq.size(); ++i)
                    row[i] = indicator(seq[i], c_j);
                ind.push_back(std::move(row));
            }
            rec.gamma_j = chain_autocorrelation(ind, config.p0);
        }
        rec.delta_j = level_cov(config.p0, N, rec.gamma_j);

        // seeds: the N*p0 samples with the smallest working values, in
        // shuffled order; running chains deepest-first would correlate the
        // proposal adaptation with seed depth and bias the level estimates
        auto order = ascending_order(population);
        std::vector<Sample> seeds(Ns);
        for (std::size_t k = 0; k < Ns; ++k) seeds[k] = population[order[k]];
        RngStream shuffle_rng = base.substream(900000000ULL + j);
        for (std::size_t k = Ns - 1; k > 0; --k)
            std::swap(seeds[k], seeds[shuffle_rng.below(k + 1)]);

        evals_before_level = g->eval_count();

        ProposalParams params = ProposalParams::initial(d, config.lambda0);
        params.adapt_window = config.adapt_window;
        params.sigma_hat = seed_spread(seeds);
        params.refresh_rho();
        ChainStats stats, level_stats;
        std::size_t adapt_idx = 0;

        const std::size_t new_states = N - Ns;
        const std::size_t base_steps = new_states / Ns;
        const std::size_t extra = new_states % Ns;

        RngStream refine_rng = base.substream(500000000ULL + j);

        std::vector<Sample> next_pop;
        next_pop.reserve(N);
        chain_values.clear();
        chain_values.reserve(Ns);
        std::size_t surrogate_evals = 0;
        std::size_t refine_evals = 0;

        for (std::size_t k = 0; k < Ns; ++k) {
            RngStream chain_rng =
                base.substream(1ULL + j * 1000000ULL + k);
            const std::size_t steps = base_steps + (k < extra ? 1 : 0);
            Sample current = seeds[k];
            std::vector<double> seq;
            seq.reserve(steps + 1);
            seq.push_back(*current.eval);
            next_pop.push_back(current);

            for (std::size_t s = 1; s <= steps; ++s) {
                Vector v = propose(current.coords, params, chain_rng);
                ++stats.proposals;
                ++level_stats.proposals;
                bool accepted;
                if (!local) {
                    const double val = g->evaluate(v);
                    accepted = val <= c_j;
                    if (accepted) current = Sample(std::move(v), val, EvalKind::True);
                } else {
                    LevelContext ctx{c_j, c_prev, j, s};
                    auto step = local_step(v, current, design, ctx, *builder,
                                           *g, config.policy, refine_rng);
                    accepted = step.accepted;
                    if (accepted)
                        current = Sample(std::move(step.next), step.value, step.kind);
                    if (!step.used_true_eval) ++surrogate_evals;
                    refine_evals += step.refine_evals;
                }
                if (accepted) {
                    ++stats.accepts;
                    ++level_stats.accepts;
                }
                seq.push_back(*current.eval);
                next_pop.push_back(current);
            }
            chain_values.push_back(std::move(seq));

            if ((k + 1) % config.adapt_window == 0 && stats.proposals > 0)
                adapt(params, stats, ++adapt_idx);
        }

        population = std::move(next_pop);
        c_prev = c_j;
        ++j;

        LevelRecord rec_next;
        rec_next.j = j;
        rec_next.accept_rate = level_stats.acceptance();
        rec_next.surrogate_evals = surrogate_evals;
        rec_next.refine_evals = refine_evals;
        result.levels.push_back(rec_next);
    }

    result.levels_count = j;
    result.p_final = p_hat;
    result.p_f = std::pow(config.p0, static_cast<double>(j - 1)) * p_hat;
    result.n_total = g->eval_count();

    std::vector<double> deltas;
    deltas.reserve(result.levels.size());
    for (const auto& rec : result.levels) deltas.push_back(rec.delta_j);
    result.cov_independent = total_cov(deltas, CovMode::Independent);
    result.cov_correlated = total_cov(deltas, CovMode::Correlated);

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return result;
}

}  // namespace raresim
