#include "raresim/pls.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace raresim {

PLSModel pls1_fit(const Matrix& X, const Vector& Y, double eps_y, long r_max) {
    const long n = X.rows(), d = X.cols();
    if (n < 2) throw std::invalid_argument("pls1_fit: need N >= 2");
    if (n != Y.size()) throw std::invalid_argument("pls1_fit: X/Y size mismatch");
    if (Y.maxCoeff() - Y.minCoeff() <= 0.0)
        throw std::invalid_argument("pls1_fit: constant response");
    r_max = std::max<long>(r_max, 1);

    PLSModel model;
    model.mu_X = X.colwise().mean();
    model.mu_Y = Y.mean();

    Matrix Xe = X.rowwise() - model.mu_X.transpose();
    Vector Ye = Y.array() - model.mu_Y;

    std::vector<Vector> ws, ps, hs;
    std::vector<double> bs;
    while (static_cast<long>(ws.size()) < r_max && Ye.norm() > eps_y) {
        Vector w = Xe.transpose() * Ye;
        const double wn = w.norm();
        if (wn <= 1e-300 * static_cast<double>(d) || wn == 0.0) {
            model.stalled = true;
            break;
        }
        w /= wn;
        Vector h = Xe * w;
        const double hh = h.squaredNorm();
        if (hh <= 0.0) {
            model.stalled = true;
            break;
        }
        Vector p = Xe.transpose() * h / hh;
        const double b = h.dot(Ye) / hh;
        // a component that barely dents the residual is fitting noise; keep
        // the latent space small rather than chase the tolerance
        const double before = Ye.norm();
        Vector Ye_next = Ye - b * h;
        if (!ws.empty() && Ye_next.norm() > 0.97 * before) {
            model.stalled = true;
            break;
        }
        Xe -= h * p.transpose();
        Ye = std::move(Ye_next);
        ws.push_back(std::move(w));
        ps.push_back(std::move(p));
        hs.push_back(std::move(h));
        bs.push_back(b);
    }

    model.r = static_cast<long>(ws.size());
    if (model.r == 0)
        throw std::runtime_error("pls1_fit: no component extracted");
    model.W = Matrix(d, model.r);
    model.P = Matrix(d, model.r);
    model.H = Matrix(n, model.r);
    model.b = Vector(model.r);
    for (long k = 0; k < model.r; ++k) {
        model.W.col(k) = ws[static_cast<std::size_t>(k)];
        model.P.col(k) = ps[static_cast<std::size_t>(k)];
        model.H.col(k) = hs[static_cast<std::size_t>(k)];
        model.b[k] = bs[static_cast<std::size_t>(k)];
    }

    Matrix PtW = model.P.transpose() * model.W;
    Eigen::JacobiSVD<Matrix> svd(PtW, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin > 0.0) || smax / smin > 1e8)
        throw std::runtime_error("pls1_fit: P^T W ill-conditioned");
    model.R_pls = model.W * PtW.inverse();
    return model;
}

Matrix pls_project(const PLSModel& model, const Matrix& X_new) {
    if (X_new.cols() != model.mu_X.size())
        throw std::invalid_argument("pls_project: dimension mismatch");
    return (X_new.rowwise() - model.mu_X.transpose()) * model.R_pls;
}

Vector pls_project(const PLSModel& model, const Vector& x) {
    return model.R_pls.transpose() * (x - model.mu_X);
}

double pls_predict(const PLSModel& model, const Vector& x) {
    return model.mu_Y + pls_project(model, x).dot(model.b);
}

std::unique_ptr<Surrogate> fit_pls_gp(const Matrix& X, const Vector& Y,
                                      const PlsOptions& opts,
                                      const GpOptions& gp_opts,
                                      const PLSModel* fallback_global,
                                      GpFitHint* hint) {
    const double eps_y = opts.eps_y_rel * (Y.array() - Y.mean()).matrix().norm();
    long r_max = std::min<long>(X.rows() - 1, opts.r_max_cap);
    // the global fit sees enough data for its component count to be honest;
    // a local refit on few points in many dimensions can absorb noise into
    // extra components, so it must not exceed the global latent dimension
    if (fallback_global) r_max = std::min(r_max, fallback_global->r);
    GpOptions latent_opts = gp_opts;
    latent_opts.optimize_nugget = true;
    // with fewer points than ~2d a local refit can reproduce any response
    // in-sample, hiding the projection error from every diagnostic; stay on
    // the global subspace in that regime
    const bool local_viable = X.rows() > 2 * X.cols();
    if ((!local_viable || r_max < 1) && fallback_global) {
        Matrix H = pls_project(*fallback_global, X);
        auto gp = GPModel::fit(H, Y, latent_opts, hint);
        return std::make_unique<PlsGpSurrogate>(*fallback_global, std::move(gp));
    }
    try {
        PLSModel local = pls1_fit(X, Y, eps_y, r_max);
        Matrix H = pls_project(local, X);
        auto gp = GPModel::fit(H, Y, latent_opts, hint);
        return std::make_unique<PlsGpSurrogate>(std::move(local), std::move(gp));
    } catch (const std::exception&) {
        if (!fallback_global) throw;
        Matrix H = pls_project(*fallback_global, X);
        auto gp = GPModel::fit(H, Y, latent_opts, hint);
        return std::make_unique<PlsGpSurrogate>(*fallback_global, std::move(gp));
    }
}

}  // namespace raresim
