#pragma once

#include <cmath>
#include <memory>

#include "raresim/gp.hpp"
#include "raresim/types.hpp"

namespace raresim {

/// Single-response partial least squares model. Weight and load matrices
/// are d x r; the rotation R = W (P^T W)^{-1} maps centered inputs to the
/// latent space.
struct PLSModel {
    Vector mu_X;
    double mu_Y = 0.0;
    Matrix W;      // d x r, unit-norm columns
    Matrix P;      // d x r
    Vector b;      // r regression coefficients
    Matrix R_pls;  // d x r
    Matrix H;      // N x r scores accumulated during fitting
    long r = 0;
    bool stalled = false;  // residual covariance vanished before tolerance
};

/// NIPALS-style PLS1. Stops when ||Y_residual|| <= eps_y or r_max
/// components were extracted. Constant Y is an error (no correlation to
/// extract); a vanishing weight vector stops early with `stalled` set.
PLSModel pls1_fit(const Matrix& X, const Vector& Y, double eps_y, long r_max);

/// Project rows of X_new into the latent space: (X_new - mu_X) * R.
Matrix pls_project(const PLSModel& model, const Matrix& X_new);
Vector pls_project(const PLSModel& model, const Vector& x);

/// Regression prediction mu_Y + h^T b at a projected point.
double pls_predict(const PLSModel& model, const Vector& x);

/// Two-stage composite surrogate: a local PLS subspace with a GP fitted on
/// the local latent coordinates.
class PlsGpSurrogate final : public Surrogate {
public:
    PlsGpSurrogate(PLSModel local, std::unique_ptr<GPModel> gp)
        : local_(std::move(local)), gp_(std::move(gp)),
          sigma_floor_(std::max(gp_->sigma_floor(), gp_->loo_rms())) {}

    /// The projection discards directions the response may still depend on;
    /// the latent GP carries a fitted noise term for that. The floor (nugget
    /// noise or the leave-one-out residual, whichever is larger) guards the
    /// cases where the likelihood search collapses the noise to zero.
    Prediction predict(const Vector& v) const override {
        Prediction p = gp_->predict(pls_project(local_, v));
        p.sigma = std::max(p.sigma, sigma_floor_);
        return p;
    }

    const PLSModel& local_model() const { return local_; }
    const GPModel& gp() const { return *gp_; }
    double sigma_floor() const override { return sigma_floor_; }

private:
    PLSModel local_;
    std::unique_ptr<GPModel> gp_;
    double sigma_floor_ = 0.0;
};

struct PlsOptions {
    double eps_y_rel = 1e-3;  // relative to ||Y_centered||
    long r_max_cap = 10;
};

/// Fit the composite on given neighbors (rows of X with responses Y):
/// local PLS subspace, then a GP on the latent scores. Falls back to a GP
/// on `fallback_projection` coordinates when the local PLS degenerates.
std::unique_ptr<Surrogate> fit_pls_gp(const Matrix& X, const Vector& Y,
                                      const PlsOptions& opts,
                                      const GpOptions& gp_opts,
                                      const PLSModel* fallback_global = nullptr,
                                      GpFitHint* hint = nullptr);

}  // namespace raresim
