#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "raresim/rng.hpp"
#include "raresim/types.hpp"

namespace raresim {

/// Black-box limit-state function with a monotone counter of true
/// evaluations. Failure is g(theta) <= 0. Evaluations are deterministic
/// and pure given theta; the counter uses an atomic increment.
class LimitState {
public:
    LimitState(std::size_t dimension, std::function<double(const Vector&)> fn,
               std::string id = "")
        : dimension_(dimension), fn_(std::move(fn)), id_(std::move(id)) {}

    double evaluate(const Vector& theta) const {
        count_.fetch_add(1, std::memory_order_relaxed);
        return fn_(theta);
    }

    /// Evaluation bypassing the counter; for oracles and test fixtures that
    /// must not distort the evaluation budget under test.
    double evaluate_untracked(const Vector& theta) const { return fn_(theta); }

    std::size_t dimension() const { return dimension_; }
    std::size_t eval_count() const { return count_.load(std::memory_order_relaxed); }
    void reset_count() const { count_.store(0, std::memory_order_relaxed); }
    const std::string& id() const { return id_; }

private:
    std::size_t dimension_;
    std::function<double(const Vector&)> fn_;
    std::string id_;
    mutable std::atomic<std::size_t> count_{0};
};

/// Linear benchmark: 4 - sum(theta)/sqrt(d). P[g <= 0] = Phi(-4) for any d.
double g11(const Vector& theta);

/// Nonlinear variant: adds -(kappa/4)(theta_1 - theta_2)^2. Requires d >= 2.
double g12(const Vector& theta, double kappa = 0.2);

/// Four-branch series system in d = 2.
double g2_four_branch(const Vector& theta);

/// Failure outside a hypersphere of radius tau; nu in [0,4] shapes the
/// gradient along theta_1 without moving the failure domain.
double g3_hypersphere(const Vector& theta, double tau = 5.26, double nu = 2.0);

/// Hysteretic oscillator under white-noise loading, discretized in the
/// frequency domain with d Fourier coefficients.
struct OscillatorConfig {
    double m0 = 6e4;
    double a0 = 5e6;
    double zeta = 0.05;
    double u_y = 0.04;
    double alpha = 0.1;
    double S0 = 0.03;
    std::size_t d = 300;
    double t_end = 8.0;
    std::size_t n_time = 110;
    double failure_offset = 0.3;
    // Bouc-Wen law parameters (normalized smooth-bilinear form). The
    // hysteresis scale beta_w = gamma_w = 4 caps z at 1/8 so the restoring
    // force yields under typical loading peaks; this calibrates the failure
    // probability to the 1e-4 order. The substep count keeps the explicit
    // RK4 stepping stable for the stiff hysteresis rate at that scale.
    double beta_w = 4.0;
    double gamma_w = 4.0;
    double n_bw = 1.0;
    std::size_t substeps = 8;

    double delta_w() const { return 30.0 * M_PI / static_cast<double>(d); }
    double S_w() const { return std::sqrt(2.0 * S0 * delta_w()); }
    double damping() const { return 2.0 * m0 * zeta * std::sqrt(a0 / m0); }
};

/// Loading Psi(t) reconstructed from the Fourier coefficients theta.
double loading_psi(const Vector& theta, const OscillatorConfig& cfg, double t);

/// Integrates the oscillator from rest to t_end (classical RK4, fixed step)
/// and returns u(t_end) + failure_offset. Throws std::runtime_error on a
/// non-finite state.
double g4_oscillator(const Vector& theta, const OscillatorConfig& cfg);

/// Oscillator driven directly by loading values on the time grid instead of
/// Fourier coefficients (loading between grid points by linear interpolation).
double g4_oscillator_from_loading(const Vector& psi_grid, const OscillatorConfig& cfg);

/// Empirical PCA of the loading time series. Eigenpairs of the covariance
/// of Psi sampled on the n_time grid, sorted by descending eigenvalue, plus
/// per-projected-component normal scales estimated from the realizations.
struct PcaLoadingModel {
    Matrix eigvectors;   // n_time x n_time, columns sorted by eigenvalue desc
    Vector eigvalues;    // descending, clamped at 0
    Vector comp_scales;  // std of each projected component over realizations
    Vector mean;         // time-grid mean of Psi (near zero)
    std::vector<double> time_grid;
};

PcaLoadingModel pca_loading_reduction(const OscillatorConfig& cfg,
                                      std::size_t n_realizations, RngStream& rng);

/// Benchmark registry. Ids: "g11", "g12", "g2", "g3", "oscillator",
/// "oscillator-pca". Unknown ids throw std::invalid_argument.
struct BenchmarkOptions {
    std::size_t d = 2;
    double kappa = 0.2;
    double tau = 5.26;
    double nu = 2.0;
    double threshold_shift = 0.0;  // failure at g - shift <= 0
    std::size_t pca_realizations = 5000;
    std::uint64_t pca_seed = 2024;
};

std::shared_ptr<LimitState> make_benchmark(const std::string& id,
                                           const BenchmarkOptions& opts = {});

std::vector<std::string> benchmark_ids();

}  // namespace raresim
