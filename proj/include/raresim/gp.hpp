#pragma once

#include <Eigen/Dense>
#include <memory>

#include "raresim/types.hpp"

namespace raresim {

struct Prediction {
    double mu = 0.0;
    double sigma = 0.0;  // predictive standard deviation, >= 0
};

/// Common surface for the local surrogates (GP, quadratic, PLS+GP).
class Surrogate {
public:
    virtual ~Surrogate() = default;
    virtual Prediction predict(const Vector& v) const = 0;

    /// Irreducible part of the predictive sigma (projection error for
    /// composite surrogates). Refinement cannot shrink sigma below this, so
    /// refinement triggers subtract it from the error indicator.
    virtual double sigma_floor() const { return 0.0; }
};

/// Anisotropic squared-exponential kernel,
/// exp(-1/2 * sum_k ((x1_k - x2_k)/ell_k)^2).
double gp_kernel(const Vector& x1, const Vector& x2, const Vector& lengthscales);

struct GpOptions {
    std::size_t mle_starts = 5;
    std::size_t mle_budget = 200;  // total likelihood evaluations across starts
    double nugget_rel = 1e-10;     // relative to trace(K)/N
    double nugget_max = 1e-4;
    /// Treat the nugget as a free noise parameter of the likelihood search.
    /// Needed when the inputs are lossy projections: forcing interpolation
    /// through scattered responses collapses the lengthscales and destroys
    /// the predictive variance.
    bool optimize_nugget = false;
};

/// Warm-start state for repeated fits on slowly drifting neighborhoods:
/// carries the previous log length-scales (standardized space). A matching
/// hint replaces the multistart search by one short local polish; the
/// fitted scales are written back.
struct GpFitHint {
    Vector log_lengthscales;
};

/// Gaussian process with a constant trend. Inputs are standardized
/// internally; length-scales are tuned by bounded maximum likelihood.
/// Fitted models are immutable and safe for concurrent predict calls.
class GPModel final : public Surrogate {
public:
    /// Fit on N x p inputs and N responses. Degenerate (constant) Y yields
    /// a constant model with sigma identically zero.
    static std::unique_ptr<GPModel> fit(const Matrix& X, const Vector& Y,
                                        const GpOptions& opts = {},
                                        GpFitHint* hint = nullptr);

    /// Fit with length-scales pinned (standardized space); used by tests.
    static std::unique_ptr<GPModel> fit_fixed(const Matrix& X, const Vector& Y,
                                              const Vector& lengthscales,
                                              const GpOptions& opts = {});

    Prediction predict(const Vector& v) const override;

    /// Noise level implied by the fitted nugget; irreducible by refinement.
    double sigma_floor() const override;

    bool constant() const { return constant_; }
    double trend() const { return beta_; }
    double process_variance() const { return sigma_g2_; }
    const Vector& lengthscales() const { return lengthscales_; }
    double nugget() const { return nugget_; }

    /// Profile log-likelihood at the fitted hyperparameters (tests compare
    /// this against grid searches).
    double log_likelihood() const { return loglik_; }

    /// RMS of the leave-one-out residuals (Dubrule shortcut, constant-trend
    /// refit ignored). Composite surrogates use this as a noise floor when
    /// the inputs are lossy projections of the true coordinates.
    double loo_rms() const { return loo_rms_; }
    static double profile_log_likelihood(const Matrix& X_std, const Vector& Y,
                                         const Vector& lengthscales,
                                         double nugget_rel);

private:
    GPModel() = default;

    bool constant_ = false;
    double const_value_ = 0.0;

    Matrix X_;  // standardized inputs
    Vector Y_;
    Vector center_, scale_;
    Vector lengthscales_;  // standardized space
    double beta_ = 0.0;
    double sigma_g2_ = 0.0;
    double nugget_ = 0.0;
    double loglik_ = 0.0;
    double loo_rms_ = 0.0;
    Vector alpha_;                        // K^{-1}(Y - F beta)
    Eigen::PartialPivLU<Matrix> border_;  // factorization of [[0, F^T],[F, K]]
};

/// Least-squares polynomial surrogate: full quadratic basis when the sample
/// size allows, otherwise linear. Predictive sigma is the leave-one-out RMS
/// residual (constant over the input space).
class QuadraticModel final : public Surrogate {
public:
    static std::unique_ptr<QuadraticModel> fit(const Matrix& X, const Vector& Y);

    Prediction predict(const Vector& v) const override;

    bool quadratic_basis() const { return quadratic_; }
    double loo_sigma() const { return sigma_; }

private:
    QuadraticModel() = default;
    Vector basis(const Vector& v) const;

    bool quadratic_ = false;
    Vector coeffs_;
    Vector center_, scale_;
    double sigma_ = 0.0;
    long dim_ = 0;
};

}  // namespace raresim
