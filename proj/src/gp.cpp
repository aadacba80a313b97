#include "raresim/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace raresim {

double gp_kernel(const Vector& x1, const Vector& x2, const Vector& lengthscales) {
    if (x1.size() != x2.size() || x1.size() != lengthscales.size())
        throw std::invalid_argument("gp_kernel: size mismatch");
    double s = 0.0;
    for (long k = 0; k < x1.size(); ++k) {
        const double z = (x1[k] - x2[k]) / lengthscales[k];
        s += z * z;
    }
    return std::exp(-0.5 * s);
}

namespace {

Matrix kernel_matrix(const Matrix& X, const Vector& ell, double nugget) {
    const long n = X.rows();
    Matrix Xs = X.array().rowwise() / ell.transpose().array();
    Vector sq = Xs.rowwise().squaredNorm();
    Matrix K = Xs * Xs.transpose();
    for (long i = 0; i < n; ++i) {
        K(i, i) = 1.0 + nugget;
        for (long j = i + 1; j < n; ++j) {
            const double d2 = std::max(sq[i] + sq[j] - 2.0 * K(i, j), 0.0);
            K(i, j) = K(j, i) = std::exp(-0.5 * d2);
        }
    }
    return K;
}

struct GlsFit {
    double beta;
    double sigma_g2;
    double loglik;
    Vector alpha;
    bool ok;
};

// Generalized least squares for the constant trend plus the profile
// log-likelihood; nugget escalates on factorization failure.
GlsFit gls_fit(const Matrix& X, const Vector& Y, const Vector& ell,
               double nugget_rel, double nugget_max, double* nugget_used) {
    const long n = X.rows();
    double nugget = nugget_rel;
    for (; nugget <= nugget_max; nugget *= 10.0) {
        Matrix K = kernel_matrix(X, ell, nugget);
        Eigen::LLT<Matrix> llt(K);
        if (llt.info() != Eigen::Success) continue;
        Vector ones = Vector::Ones(n);
        Vector Kinv_1 = llt.solve(ones);
        Vector Kinv_Y = llt.solve(Y);
        const double denom = ones.dot(Kinv_1);
        if (!(denom > 0.0)) continue;
        const double beta = ones.dot(Kinv_Y) / denom;
        Vector r = Y - beta * ones;
        Vector alpha = llt.solve(r);
        double sigma_g2 = r.dot(alpha) / static_cast<double>(n);
        sigma_g2 = std::max(sigma_g2, 0.0);
        double logdet = 0.0;
        const Matrix& packed = llt.matrixLLT();
        for (long i = 0; i < n; ++i) logdet += 2.0 * std::log(packed(i, i));
        const double loglik =
            -0.5 * (static_cast<double>(n) *
                        std::log(std::max(sigma_g2, 1e-300)) +
                    logdet);
        if (nugget_used) *nugget_used = nugget;
        return {beta, sigma_g2, loglik, std::move(alpha), true};
    }
    return {0.0, 0.0, -std::numeric_limits<double>::infinity(), Vector(), false};
}

struct Box {
    Vector lo, hi;  // in log length-scale space
};

Vector clamp_to(const Box& box, Vector x) {
    for (long i = 0; i < x.size(); ++i)
        x[i] = std::min(std::max(x[i], box.lo[i]), box.hi[i]);
    return x;
}

// Nelder-Mead on the log length-scales, clamped to the search box.
Vector nelder_mead(const std::function<double(const Vector&)>& neg_obj,
                   const Box& box, const Vector& x0, std::size_t budget) {
    const long p = x0.size();
    std::vector<Vector> simplex;
    std::vector<double> f;
    simplex.reserve(static_cast<std::size_t>(p) + 1);
    simplex.push_back(clamp_to(box, x0));
    for (long i = 0; i < p; ++i) {
        Vector x = x0;
        x[i] += 0.25 * (box.hi[i] - box.lo[i]);
        simplex.push_back(clamp_to(box, x));
    }
    std::size_t evals = 0;
    for (const auto& x : simplex) {
        f.push_back(neg_obj(x));
        ++evals;
    }
    auto order = [&]() {
        for (std::size_t i = 1; i < simplex.size(); ++i)
            for (std::size_t j = i; j > 0 && f[j] < f[j - 1]; --j) {
                std::swap(f[j], f[j - 1]);
                std::swap(simplex[j], simplex[j - 1]);
            }
    };
    order();
    while (evals < budget) {
        Vector centroid = Vector::Zero(p);
        for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
        centroid /= static_cast<double>(simplex.size() - 1);
        const Vector& worst = simplex.back();
        Vector xr = clamp_to(box, centroid + (centroid - worst));
        double fr = neg_obj(xr);
        ++evals;
        if (fr < f.front() && evals < budget) {
            Vector xe = clamp_to(box, centroid + 2.0 * (centroid - worst));
            double fe = neg_obj(xe);
            ++evals;
            if (fe < fr) {
                simplex.back() = xe;
                f.back() = fe;
            } else {
                simplex.back() = xr;
                f.back() = fr;
            }
        } else if (fr < f[f.size() - 2]) {
            simplex.back() = xr;
            f.back() = fr;
        } else if (evals < budget) {
            Vector xc = clamp_to(box, centroid + 0.5 * (worst - centroid));
            double fc = neg_obj(xc);
            ++evals;
            if (fc < f.back()) {
                simplex.back() = xc;
                f.back() = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i < simplex.size() && evals < budget; ++i) {
                    simplex[i] = clamp_to(
                        box, simplex.front() + 0.5 * (simplex[i] - simplex.front()));
                    f[i] = neg_obj(simplex[i]);
                    ++evals;
                }
            }
        }
        order();
    }
    return simplex.front();
}

void standardize(const Matrix& X, Matrix& X_std, Vector& center, Vector& scale) {
    const long n = X.rows(), p = X.cols();
    center = X.colwise().mean();
    scale = Vector(p);
    for (long j = 0; j < p; ++j) {
        const double var =
            (X.col(j).array() - center[j]).square().sum() / static_cast<double>(n);
        const double sd = std::sqrt(var);
        scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    X_std = (X.rowwise() - center.transpose()).array().rowwise() /
            scale.transpose().array();
}

}  // namespace

double GPModel::profile_log_likelihood(const Matrix& X_std, const Vector& Y,
                                       const Vector& lengthscales,
                                       double nugget_rel) {
    GlsFit fit = gls_fit(X_std, Y, lengthscales, nugget_rel,
                         std::max(nugget_rel, 1e-4), nullptr);
    return fit.loglik;
}

std::unique_ptr<GPModel> GPModel::fit_fixed(const Matrix& X, const Vector& Y,
                                            const Vector& lengthscales,
                                            const GpOptions& opts) {
    auto model = std::unique_ptr<GPModel>(new GPModel());
    model->X_ = X;
    model->Y_ = Y;
    model->center_ = Vector::Zero(X.cols());
    model->scale_ = Vector::Ones(X.cols());
    model->lengthscales_ = lengthscales;

    GlsFit f = gls_fit(X, Y, lengthscales, opts.nugget_rel,
                       std::max(opts.nugget_rel, opts.nugget_max),
                       &model->nugget_);
    if (!f.ok)
        throw std::runtime_error("GPModel: kernel matrix singular after nugget escalation");
    model->beta_ = f.beta;
    model->sigma_g2_ = f.sigma_g2;
    model->loglik_ = f.loglik;
    model->alpha_ = f.alpha;

    const long n = X.rows();
    Matrix K = kernel_matrix(X, lengthscales, model->nugget_);
    Matrix M = Matrix::Zero(n + 1, n + 1);
    M.block(1, 1, n, n) = K;
    M.block(1, 0, n, 1).setOnes();
    M.block(0, 1, 1, n).setOnes();
    model->border_ = Eigen::PartialPivLU<Matrix>(M);

    Eigen::LLT<Matrix> llt(K);
    if (llt.info() == Eigen::Success) {
        Matrix Kinv = llt.solve(Matrix::Identity(n, n));
        double acc = 0.0;
        for (long i = 0; i < n; ++i) {
            const double e = f.alpha[i] / std::max(Kinv(i, i), 1e-300);
            acc += e * e;
        }
        model->loo_rms_ = std::sqrt(acc / static_cast<double>(n));
    }
    return model;
}

std::unique_ptr<GPModel> GPModel::fit(const Matrix& X, const Vector& Y,
                                      const GpOptions& opts, GpFitHint* hint) {
    if (X.rows() < 2) throw std::invalid_argument("GPModel::fit: need N >= 2");
    if (X.rows() != Y.size())
        throw std::invalid_argument("GPModel::fit: X/Y size mismatch");

    const double spread = Y.maxCoeff() - Y.minCoeff();
    if (spread <= 1e-12 * std::max(1.0, std::abs(Y.mean()))) {
        auto model = std::unique_ptr<GPModel>(new GPModel());
        model->constant_ = true;
        model->const_value_ = Y.mean();
        model->beta_ = Y.mean();
        model->sigma_g2_ = 0.0;
        return model;
    }

    Matrix X_std;
    Vector center, scale;
    standardize(X, X_std, center, scale);

    const long p = X.cols();
    const long pdim = p + (opts.optimize_nugget ? 1 : 0);
    Box box;
    box.lo = Vector(pdim);
    box.hi = Vector(pdim);
    for (long j = 0; j < p; ++j) {
        double span = X_std.col(j).maxCoeff() - X_std.col(j).minCoeff();
        if (span < 1e-12) span = 1.0;
        box.lo[j] = std::log(1e-2 * span);
        box.hi[j] = std::log(1e2 * span);
    }
    if (opts.optimize_nugget) {
        box.lo[p] = std::log(1e-10);
        box.hi[p] = std::log(0.5);
    }

    auto neg_obj = [&](const Vector& x) {
        const Vector ell = x.head(p).array().exp().matrix();
        const double nugget =
            opts.optimize_nugget ? std::exp(x[p]) : opts.nugget_rel;
        return -profile_log_likelihood(X_std, Y, ell, nugget);
    };

    Vector best;
    if (hint && hint->log_lengthscales.size() == pdim) {
        // short local polish around the previous optimum
        const std::size_t budget = std::max<std::size_t>(opts.mle_budget / 8, 16);
        best = nelder_mead(neg_obj, box, clamp_to(box, hint->log_lengthscales),
                           budget);
    } else {
        const std::size_t starts = std::max<std::size_t>(opts.mle_starts, 1);
        const std::size_t per_start =
            std::max<std::size_t>(opts.mle_budget / starts, 4);
        static const double fractions[] = {0.5, 0.3, 0.7, 0.15, 0.9};
        double best_f = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < starts; ++s) {
            const double frac = fractions[s % 5];
            Vector x0 = box.lo + frac * (box.hi - box.lo);
            Vector x = nelder_mead(neg_obj, box, x0, per_start);
            const double fx = neg_obj(x);
            if (fx < best_f) {
                best_f = fx;
                best = x;
            }
        }
    }
    if (hint) hint->log_lengthscales = best;

    GpOptions final_opts = opts;
    if (opts.optimize_nugget) {
        final_opts.nugget_rel = std::exp(best[p]);
        final_opts.nugget_max = std::max(final_opts.nugget_rel, opts.nugget_max);
    }
    auto model = fit_fixed(X_std, Y, best.head(p).array().exp().matrix(),
                           final_opts);
    model->center_ = center;
    model->scale_ = scale;
    return model;
}

double GPModel::sigma_floor() const {
    if (constant_) return 0.0;
    return std::sqrt(std::max(nugget_, 0.0) * sigma_g2_);
}

Prediction GPModel::predict(const Vector& v) const {
    if (constant_) return {const_value_, 0.0};
    Vector vs =
        (v - center_).cwiseQuotient(scale_);
    const long n = X_.rows();
    Vector rho(n);
    for (long i = 0; i < n; ++i)
        rho[i] = gp_kernel(vs, X_.row(i).transpose(), lengthscales_);

    const double mu = beta_ + rho.dot(alpha_);

    Vector rhs(n + 1);
    rhs[0] = 1.0;  // constant trend basis at v
    rhs.tail(n) = rho;
    Vector y = border_.solve(rhs);
    const double qf = rhs.dot(y);
    double var = sigma_g2_ * (1.0 - qf);
    if (var < 0.0) var = 0.0;
    return {mu, std::sqrt(var)};
}

// ---------------------------------------------------------------------------

Vector QuadraticModel::basis(const Vector& v) const {
    Vector x = (v - center_).cwiseQuotient(scale_);
    const long d = dim_;
    if (!quadratic_) {
        Vector b(1 + d);
        b[0] = 1.0;
        b.tail(d) = x;
        return b;
    }
    Vector b(1 + d + d * (d + 1) / 2);
    b[0] = 1.0;
    b.segment(1, d) = x;
    long k = 1 + d;
    for (long i = 0; i < d; ++i)
        for (long j = i; j < d; ++j) b[k++] = x[i] * x[j];
    return b;
}

std::unique_ptr<QuadraticModel> QuadraticModel::fit(const Matrix& X,
                                                    const Vector& Y) {
    const long n = X.rows(), d = X.cols();
    auto model = std::unique_ptr<QuadraticModel>(new QuadraticModel());
    model->dim_ = d;
    Matrix X_std;
    standardize(X, X_std, model->center_, model->scale_);
    (void)X_std;

    const long quad_terms = 1 + d + d * (d + 1) / 2;
    for (bool quadratic : {n >= quad_terms, false}) {
        model->quadratic_ = quadratic;
        const long m = quadratic ? quad_terms : 1 + d;
        if (n < m) continue;
        Matrix B(n, m);
        for (long i = 0; i < n; ++i)
            B.row(i) = model->basis(X.row(i).transpose()).transpose();
        Eigen::ColPivHouseholderQR<Matrix> qr(B);
        qr.setThreshold(1e-10);
        if (qr.rank() < m) continue;
        model->coeffs_ = qr.solve(Y);

        // leave-one-out residuals via the hat matrix diagonal
        Matrix BtB = B.transpose() * B;
        Eigen::LDLT<Matrix> ldlt(BtB);
        Vector resid = Y - B * model->coeffs_;
        double acc = 0.0;
        for (long i = 0; i < n; ++i) {
            Vector bi = B.row(i).transpose();
            const double h = bi.dot(ldlt.solve(bi));
            const double denom = std::max(1.0 - h, 1e-8);
            const double e = resid[i] / denom;
            acc += e * e;
        }
        model->sigma_ = std::sqrt(acc / static_cast<double>(n));
        return model;
    }
    throw std::runtime_error("QuadraticModel::fit: basis rank-deficient");
}

Prediction QuadraticModel::predict(const Vector& v) const {
    return {coeffs_.dot(basis(v)), sigma_};
}

}  // namespace raresim
