#include <doctest.h>

#include <cmath>
#include <memory>

#include "raresim/engine.hpp"
#include "raresim/normal.hpp"

using namespace raresim;

TEST_CASE("expected levels over a parameter grid") {
    struct Case {
        double pf, p0;
        std::size_t levels;
    };
    const Case grid[] = {
        {1e-6, 0.1, 6},    {3.17e-5, 0.1, 4},  {1e-4, 0.1, 4},
        {1e-3, 0.1, 3},    {1e-2, 0.1, 2},     {0.05, 0.1, 1},
        {1e-6, 0.5, 19},   {3.17e-5, 0.5, 14}, {1e-4, 0.5, 13},
        {1e-3, 0.5, 9},    {2.26e-3, 0.1, 2},  {2.26e-3, 0.5, 8},
        {1e-5, 0.1, 5},    {1e-5, 0.2, 7},     {1e-4, 0.2, 5},
        {1e-6, 0.2, 8},    {5e-7, 0.1, 6},     {0.5, 0.9, 6},
        {1e-8, 0.1, 8},    {1e-2, 0.5, 6},
    };
    for (const auto& c : grid) {
        CAPTURE(c.pf);
        CAPTURE(c.p0);
        CHECK(expected_levels(c.pf, c.p0) == c.levels);
        // definition check against the direct formula
        CHECK(expected_levels(c.pf, c.p0) ==
              static_cast<std::size_t>(
                  std::floor(std::log(c.pf) / std::log(c.p0))));
    }
    CHECK_THROWS_AS(expected_levels(0.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(expected_levels(1e-6, 1.0), std::invalid_argument);
}

TEST_CASE("deterministic total evaluation count") {
    CHECK(total_evaluations(1000, 0.1, 5) == 4600);
    CHECK(total_evaluations(1000, 0.5, 15) == 8000);
    CHECK(total_evaluations(500, 0.1, 1) == 500);
    CHECK_THROWS_AS(total_evaluations(1000, 0.1, 0), std::invalid_argument);
}

TEST_CASE("level and total coefficient of variation") {
    // sqrt((1-p)/(N p) (1+gamma))
    CHECK(level_cov(0.1, 1000, 0.0) ==
          doctest::Approx(std::sqrt(0.9 / 100.0)).epsilon(1e-12));
    CHECK(level_cov(0.1, 1000, 3.0) ==
          doctest::Approx(std::sqrt(0.9 / 100.0 * 4.0)).epsilon(1e-12));
    CHECK(level_cov(1.0, 1000, 0.0) == 0.0);
    CHECK_THROWS_AS(level_cov(0.0, 1000, 0.0), std::invalid_argument);

    std::vector<double> deltas{0.3, 0.4};
    CHECK(total_cov(deltas, CovMode::Independent) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(total_cov(deltas, CovMode::Correlated) ==
          doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("chain autocorrelation on hand-built indicator chains") {
    // constant chains are perfectly correlated at every lag
    std::vector<std::vector<int>> chains{{1, 1, 1}, {0, 0, 0}};
    const double p = 0.5;
    // R(k) = E[I_s I_{s+k}] - p^2 = 0.5 - 0.25 = 0.25 = p(1-p), so each lag
    // contributes 2(1 - k/n) and gamma = 2(1 - 1/3) + 2(1 - 2/3) = 2
    CHECK(chain_autocorrelation(chains, p) == doctest::Approx(2.0).epsilon(1e-12));

    // alternating chains: lag-1 pairs are always (1,0) or (0,1), lag-2 match
    std::vector<std::vector<int>> alt{{1, 0, 1, 0}, {0, 1, 0, 1}};
    // R(1) = -0.25, R(2) = 0.25, R(3) = -0.25
    const double expect = 2.0 * (1 - 0.25) * (-1.0) + 2.0 * (1 - 0.5) * (1.0) +
                          2.0 * (1 - 0.75) * (-1.0);
    CHECK(chain_autocorrelation(alt, 0.5) ==
          doctest::Approx(expect).epsilon(1e-12));

    CHECK(chain_autocorrelation({}, 0.5) == 0.0);
}

TEST_CASE("config validation") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    RunConfig bad = cfg;
    bad.p0 = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.p0 = 0.3;  // N*p0 = 300 integral: fine
    CHECK_NOTHROW(bad.validate());
    bad.N = 1001;  // 300.3 seeds: not integral
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.N = 5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.max_levels = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("standard run on g11 d=2 is deterministic with exact budget") {
    RunConfig cfg;
    cfg.benchmark = "g11";
    cfg.bench.d = 2;
    cfg.mode = RunMode::Standard;
    cfg.N = 1000;
    cfg.p0 = 0.1;
    cfg.seed = 1;
    RunResult r1 = run(cfg);
    CHECK(r1.levels_count == 5);  // L-1 = 4 chain levels
    CHECK(r1.n_total == 4600);   // N + N(1-p0)(L-1) exactly
    CHECK(r1.p_f > 0.0);
    CHECK(r1.p_f == doctest::Approx(1e-4 * r1.p_final).epsilon(1e-12));

    RunResult r2 = run(cfg);
    CHECK(r2.p_f == r1.p_f);  // bit-identical rerun
    CHECK(r2.n_total == r1.n_total);
    for (std::size_t i = 0; i < r1.levels.size(); ++i)
        CHECK(r1.levels[i].c_j == r2.levels[i].c_j);
}

namespace {

/// Zero-error builder: the surrogate is the true model with sigma = 0.
class PerfectBuilder final : public LocalModelBuilder {
public:
    explicit PerfectBuilder(const LimitState& g) : g_(&g) {}
    LocalFit fit_at(const DesignSet& design, const Vector& v) override {
        LocalFit out;
        out.ball.center = v;
        out.model = std::make_shared<Oracle>(g_);
        return out;
    }
    std::size_t min_design_size() const override { return 0; }

private:
    struct Oracle final : Surrogate {
        explicit Oracle(const LimitState* g) : g(g) {}
        Prediction predict(const Vector& v) const override {
            return {g->evaluate_untracked(v), 0.0};
        }
        const LimitState* g;
    };
    const LimitState* g_;
};

}  // namespace

TEST_CASE("a perfect surrogate reproduces the standard trajectory bit-level") {
    RunConfig cfg;
    cfg.benchmark = "g11";
    cfg.bench.d = 2;
    cfg.N = 500;
    cfg.p0 = 0.1;
    cfg.seed = 7;
    cfg.policy.beta1 = 0.0;  // no random refinement draws

    cfg.mode = RunMode::Standard;
    RunResult std_run = run(cfg);

    cfg.mode = RunMode::LocalGp;  // overridden by the factory below
    RunResult oracle_run =
        run(cfg, nullptr, [](const LimitState& g, const RunConfig&) {
            return std::make_unique<PerfectBuilder>(g);
        });

    REQUIRE(oracle_run.levels_count == std_run.levels_count);
    CHECK(oracle_run.p_f == std_run.p_f);  // bit-identical estimate
    CHECK(oracle_run.p_final == std_run.p_final);
    for (std::size_t i = 0; i < std_run.levels.size(); ++i)
        CHECK(oracle_run.levels[i].c_j == std_run.levels[i].c_j);
}

TEST_CASE("standard SuS agrees with a direct MC oracle at Phi(-2)") {
    // g11 has beta = 4; a shift of 2 moves the failure probability from
    // Phi(-4) to Phi(-2)
    RunConfig cfg;
    cfg.benchmark = "g11";
    cfg.bench.d = 2;
    cfg.bench.threshold_shift = 2.0;
    cfg.mode = RunMode::Standard;
    cfg.N = 1000;
    cfg.p0 = 0.1;

    double acc = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        cfg.seed = s;
        acc += run(cfg).p_f;
    }
    const double mean_pf = acc / 20.0;
    const double ref = normal_cdf(-2.0);  // 2.275e-2

    // direct MC oracle on the same limit state
    auto g = make_benchmark(cfg.benchmark, cfg.bench);
    RngStream rng(99, 0);
    std::size_t fail = 0;
    const std::size_t n_mc = 1000000;
    Vector x(2);
    for (std::size_t i = 0; i < n_mc; ++i) {
        x[0] = rng.normal();
        x[1] = rng.normal();
        if (g->evaluate_untracked(x) <= 0.0) ++fail;
    }
    const double mc = static_cast<double>(fail) / static_cast<double>(n_mc);
    CHECK(std::abs(mc - ref) / ref < 0.05);
    CHECK(std::abs(mean_pf - mc) / mc < 0.10);
}

TEST_CASE("stagnation and level-cap failures raise errors") {
    // a limit state that cannot be driven to failure: g = 1 everywhere past
    // the first quantile plateau is impossible, so use a floor at +0.5
    auto flat = std::make_shared<LimitState>(
        2, [](const Vector& t) { return std::max(0.5, 4.0 - t[0]); }, "flat");
    RunConfig cfg;
    cfg.mode = RunMode::Standard;
    cfg.N = 100;
    cfg.p0 = 0.1;
    cfg.max_levels = 8;
    CHECK_THROWS_AS(run(cfg, flat), std::runtime_error);
}
