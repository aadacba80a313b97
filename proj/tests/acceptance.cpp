// Acceptance suite: end-to-end statistical checks on the benchmark set.
// Each criterion prints one PASS/FAIL line with the measured numbers; the
// exit code is the number of failed criteria. These runs are stochastic
// only through the fixed seed list 1..20, so results are reproducible.
//
// The slow oscillator criterion is skipped unless RARESIM_RUN_OSCILLATOR=1
// is set in the environment.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "raresim/engine.hpp"

using namespace raresim;

namespace {

int g_failures = 0;

struct Summary {
    double mean_pf = 0.0;
    double mean_evals = 0.0;
    std::vector<std::size_t> levels;
    double seconds = 0.0;
    std::size_t failed = 0;
};

Summary run_seeds(RunConfig cfg, std::uint64_t first, std::uint64_t last) {
    Summary s;
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t ok = 0;
    for (std::uint64_t seed = first; seed <= last; ++seed) {
        cfg.seed = seed;
        try {
            RunResult r = run(cfg);
            s.mean_pf += r.p_f;
            s.mean_evals += static_cast<double>(r.n_total);
            s.levels.push_back(r.levels_count);
            ++ok;
        } catch (const std::exception& e) {
            ++s.failed;
            std::cerr << "  run seed=" << seed << " failed: " << e.what()
                      << "\n";
        }
    }
    if (ok) {
        s.mean_pf /= static_cast<double>(ok);
        s.mean_evals /= static_cast<double>(ok);
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
    return s;
}

void verdict(int id, const std::string& label, bool pass,
             const std::string& detail) {
    std::cout << "[" << id << "] " << label << ": "
              << (pass ? "PASS" : "FAIL") << " (" << detail << ")\n";
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

constexpr double kPfG11 = 3.17e-5;   // Phi(-4)
constexpr double kPfG12 = 6.41e-5;   // reference for kappa = 0.2
constexpr double kPfG2 = 2.26e-3;    // four-branch, k = 7
constexpr double kPfG3 = 1e-6;       // hypersphere, tau = 5.26

void criterion_1() {
    RunConfig cfg;
    cfg.benchmark = "g11";
    cfg.bench.d = 2;
    cfg.mode = RunMode::Standard;
    cfg.N = 1000;
    cfg.p0 = 0.1;
    Summary s = run_seeds(cfg, 1, 1);
    const bool pass = s.failed == 0 && s.levels.size() == 1 &&
                      s.levels[0] == 5 && s.mean_evals == 4600.0 &&
                      s.seconds < 5.0;
    verdict(1, "g11 standard exact budget", pass,
            "L-1=" + std::to_string(s.levels.empty() ? 0 : s.levels[0] - 1) +
                ", N_total=" + fmt(s.mean_evals) + ", " + fmt(s.seconds) +
                "s");
}

void criterion_2() {
    RunConfig cfg;
    cfg.benchmark = "g11";
    cfg.bench.d = 2;
    cfg.mode = RunMode::Standard;
    Summary s = run_seeds(cfg, 1, 20);
    const double rel = std::abs(s.mean_pf - kPfG11) / kPfG11;
    const bool pass = s.failed == 0 && rel <= 0.25 && s.seconds < 120.0;
    verdict(2, "g11 standard accuracy over 20 runs", pass,
            "mean_pf=" + fmt(s.mean_pf) + ", rel_err=" + fmt(rel) + ", " +
                fmt(s.seconds) + "s");
}

void criterion_3() {
    RunConfig cfg;
    cfg.benchmark = "g11";
    cfg.bench.d = 2;
    cfg.mode = RunMode::LocalGp;
    Summary s = run_seeds(cfg, 1, 20);
    const double rel = std::abs(s.mean_pf - kPfG11) / kPfG11;
    const bool pass = s.failed == 0 && s.mean_evals <= 800.0 && rel <= 0.25 &&
                      s.seconds < 600.0;
    verdict(3, "g11 local-gp budget and accuracy", pass,
            "mean_pf=" + fmt(s.mean_pf) + ", rel_err=" + fmt(rel) +
                ", mean_evals=" + fmt(s.mean_evals) + ", " + fmt(s.seconds) +
                "s");
}

void criterion_4() {
    RunConfig cfg;
    cfg.benchmark = "g12";
    cfg.bench.d = 2;
    cfg.bench.kappa = 0.2;
    cfg.mode = RunMode::LocalGp;
    Summary s = run_seeds(cfg, 1, 20);
    const double rel = std::abs(s.mean_pf - kPfG12) / kPfG12;
    const bool pass = s.failed == 0 && s.mean_evals <= 950.0 && rel <= 0.25 &&
                      s.seconds < 600.0;
    verdict(4, "g12 local-gp budget and accuracy", pass,
            "mean_pf=" + fmt(s.mean_pf) + ", rel_err=" + fmt(rel) +
                ", mean_evals=" + fmt(s.mean_evals) + ", " + fmt(s.seconds) +
                "s");
}

void criterion_5() {
    RunConfig cfg;
    cfg.benchmark = "g2";
    cfg.bench.d = 2;
    cfg.mode = RunMode::LocalGp;
    Summary s = run_seeds(cfg, 1, 20);
    const double rel = std::abs(s.mean_pf - kPfG2) / kPfG2;
    const bool pass = s.failed == 0 && rel <= 0.20 && s.mean_evals <= 700.0 &&
                      s.seconds < 600.0;
    verdict(5, "g2 local-gp budget and accuracy", pass,
            "mean_pf=" + fmt(s.mean_pf) + ", rel_err=" + fmt(rel) +
                ", mean_evals=" + fmt(s.mean_evals) + ", " + fmt(s.seconds) +
                "s");
}

void criterion_6() {
    RunConfig cfg;
    cfg.benchmark = "g3";
    cfg.bench.d = 2;
    cfg.mode = RunMode::LocalGp;
    cfg.N = 1000;
    cfg.p0 = 0.1;
    Summary s = run_seeds(cfg, 1, 20);
    std::map<std::size_t, int> level_votes;
    for (std::size_t l : s.levels) ++level_votes[l];
    std::size_t majority_levels = 0;
    int best = 0;
    for (const auto& [l, n] : level_votes)
        if (n > best) {
            best = n;
            majority_levels = l;
        }
    const double factor =
        s.mean_pf > 0.0
            ? std::max(s.mean_pf / kPfG3, kPfG3 / s.mean_pf)
            : std::numeric_limits<double>::infinity();
    const bool pass = s.failed == 0 && majority_levels == 7 && factor <= 2.0 &&
                      s.mean_evals <= 1700.0 && s.seconds < 1200.0;
    verdict(6, "g3 local-gp levels and accuracy", pass,
            "majority L-1=" + std::to_string(majority_levels - 1) +
                ", mean_pf=" + fmt(s.mean_pf) + ", factor=" + fmt(factor) +
                ", mean_evals=" + fmt(s.mean_evals) + ", " + fmt(s.seconds) +
                "s");
}

void criterion_7() {
    RunConfig cfg;
    cfg.benchmark = "g11";
    cfg.bench.d = 100;
    cfg.mode = RunMode::LocalPlsGp;
    cfg.N = 1000;
    cfg.p0 = 0.5;
    Summary s = run_seeds(cfg, 1, 20);
    const double factor =
        s.mean_pf > 0.0
            ? std::max(s.mean_pf / kPfG11, kPfG11 / s.mean_pf)
            : std::numeric_limits<double>::infinity();
    const bool pass = s.failed == 0 && factor <= 3.0 &&
                      s.mean_evals <= 7000.0 && s.seconds < 3600.0;
    verdict(7, "g11 d=100 local-pls-gp", pass,
            "mean_pf=" + fmt(s.mean_pf) + ", factor=" + fmt(factor) +
                ", mean_evals=" + fmt(s.mean_evals) + ", " + fmt(s.seconds) +
                "s");
}

void criterion_8() {
    const char* flag = std::getenv("RARESIM_RUN_OSCILLATOR");
    if (!flag || std::string(flag) != "1") {
        std::cout << "[8] oscillator d=300 local-pls-gp: SKIP (set "
                     "RARESIM_RUN_OSCILLATOR=1 to enable)\n";
        return;
    }
    RunConfig cfg;
    cfg.benchmark = "oscillator";
    cfg.bench.d = 300;
    cfg.mode = RunMode::LocalPlsGp;
    cfg.N = 1000;
    cfg.p0 = 0.1;
    Summary s = run_seeds(cfg, 1, 5);
    const bool pass =
        s.failed == 0 && s.mean_pf >= 1e-5 && s.mean_pf <= 1e-3;
    verdict(8, "oscillator d=300 local-pls-gp", pass,
            "mean_pf=" + fmt(s.mean_pf) + ", mean_evals=" +
                fmt(s.mean_evals) + ", " + fmt(s.seconds) + "s");
}

}  // namespace

int main() {
    std::cout << "acceptance suite: seeds 1..20 per criterion\n";
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures)
        std::cout << g_failures << " criterion(s) failed\n";
    else
        std::cout << "all criteria passed\n";
    return g_failures;
}
