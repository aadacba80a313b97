#include "raresim/local.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "raresim/normal.hpp"

namespace raresim {

std::size_t default_N0(std::size_t d, bool high_dim) {
    if (d < 1) throw std::invalid_argument("default_N0: d must be >= 1");
    if (high_dim) return d + 1;
    const double dd = static_cast<double>(d);
    return static_cast<std::size_t>(
        std::ceil(std::sqrt(dd) * (dd + 1.0) * (dd + 2.0) / 2.0));
}

BallQuery select_ball(const Vector& v, const DesignSet& design, std::size_t N0) {
    BallQuery ball;
    ball.center = v;
    ball.members = design.nearest(v, N0);
    for (auto i : ball.members)
        ball.R = std::max(ball.R, (design.point(i) - v).norm());
    return ball;
}

double error_indicator(const Prediction& pred) {
    const double denom = std::abs(pred.mu);
    if (denom < 1e-12) return std::numeric_limits<double>::infinity();
    return 2.0 * 1.96 * pred.sigma / denom;
}

double random_refine_probability(std::size_t s, std::size_t j,
                                 const RefinementPolicy& policy) {
    const double beta =
        policy.beta1 *
        std::pow(static_cast<double>(s),
                 -policy.beta0 * std::pow(static_cast<double>(j), policy.beta2));
    return std::min(std::max(beta, 0.0), 1.0);
}

double misclassification_probability(double mu, double sigma, double c) {
    if (sigma < 0.0)
        throw std::invalid_argument("misclassification_probability: sigma < 0");
    if (sigma == 0.0) return mu == c ? 0.5 : 0.0;
    return normal_cdf(-std::abs(mu - c) / sigma);
}

namespace {

double u_function(const Prediction& p, double c) {
    if (p.sigma <= 0.0)
        return p.mu == c ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(p.mu - c) / p.sigma;
}

// uniform point in the Euclidean ball B(center, R)
Vector uniform_in_ball(const Vector& center, double R, RngStream& rng) {
    const long d = center.size();
    Vector dir(d);
    for (long i = 0; i < d; ++i) dir[i] = rng.normal();
    const double norm = dir.norm();
    if (norm == 0.0) return center;
    const double radius =
        R * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    return center + (radius / norm) * dir;
}

}  // namespace

Vector refine_select(const BallQuery& ball, const Surrogate& surrogate, double c,
                     const RefinementPolicy& policy, const DesignSet& design,
                     RngStream& rng) {
    Vector best;
    double best_u = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < policy.pool_size; ++i) {
        Vector cand = uniform_in_ball(ball.center, ball.R, rng);
        if (design.contains(cand)) continue;
        const double u = u_function(surrogate.predict(cand), c);
        if (!found || u < best_u) {
            best = std::move(cand);
            best_u = u;
            found = true;
        }
    }
    if (found) return best;
    // degenerate pool: nudge the center so the insertion is not a duplicate
    Vector dir(ball.center.size());
    for (long i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
    const double n = dir.norm();
    if (n > 0.0) dir /= n;
    return ball.center + 1e-3 * std::max(ball.R, 1.0) * dir;
}

// ---------------------------------------------------------------------------

namespace {

template <typename FitFn>
LocalFit cached_fit(std::map<std::vector<std::size_t>, std::shared_ptr<Surrogate>>& cache,
                    const DesignSet& design, const Vector& v, std::size_t N0,
                    const FitFn& fit) {
    LocalFit out;
    out.ball = select_ball(v, design, N0);
    auto it = cache.find(out.ball.members);
    if (it != cache.end()) {
        out.model = it->second;
        return out;
    }
    Matrix X = design.points_matrix(out.ball.members);
    Vector Y = design.values_vector(out.ball.members);
    out.model = fit(X, Y);
    cache.emplace(out.ball.members, out.model);
    return out;
}

// periodic full multistart refits keep a warm-start hint from drifting off
constexpr std::size_t kHintRefreshInterval = 20;

GpFitHint* next_hint(GpFitHint& hint, std::size_t& uses) {
    if (++uses >= kHintRefreshInterval) {
        uses = 0;
        hint.log_lengthscales.resize(0);
    }
    return &hint;
}

}  // namespace

LocalFit GpLocalBuilder::fit_at(const DesignSet& design, const Vector& v) {
    return cached_fit(cache_, design, v, N0_,
                      [&](const Matrix& X, const Vector& Y) -> std::shared_ptr<Surrogate> {
                          return GPModel::fit(X, Y, opts_,
                                              next_hint(hint_, hint_uses_));
                      });
}

LocalFit QuadraticLocalBuilder::fit_at(const DesignSet& design, const Vector& v) {
    return cached_fit(cache_, design, v, N0_,
                      [&](const Matrix& X, const Vector& Y) -> std::shared_ptr<Surrogate> {
                          return QuadraticModel::fit(X, Y);
                      });
}

void PlsGpLocalBuilder::refresh_global(const DesignSet& design) {
    const bool stale =
        !global_ || static_cast<double>(design.size()) >
                        1.1 * static_cast<double>(global_fit_size_);
    if (!stale) return;
    std::vector<std::size_t> all(design.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Matrix X = design.points_matrix(all);
    Vector Y = design.values_vector(all);
    const double eps_y =
        pls_opts_.eps_y_rel * (Y.array() - Y.mean()).matrix().norm();
    global_ = pls1_fit(X, Y, eps_y,
                       std::min<long>(X.rows() - 1, pls_opts_.r_max_cap));
    global_scores_ = pls_project(*global_, X);
    global_fit_size_ = design.size();
    cache_.clear();
}

LocalFit PlsGpLocalBuilder::fit_at(const DesignSet& design, const Vector& v) {
    if (design.size() < min_design_size())
        throw std::runtime_error("PlsGpLocalBuilder: design set too small");
    refresh_global(design);
    // the cached score matrix covers the design prefix present at the last
    // global refresh; score late insertions on the fly
    const std::size_t n = design.size();
    Vector vq = pls_project(*global_, v);

    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector hi = i < static_cast<std::size_t>(global_scores_.rows())
                        ? Vector(global_scores_.row(static_cast<long>(i)).transpose())
                        : pls_project(*global_, design.point(i));
        dist[i] = {(hi - vq).norm(), i};
    }
    const std::size_t k =
        std::min<std::size_t>(neighbor_count(global_->r), n);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());

    LocalFit out;
    out.ball.center = v;
    out.ball.members.resize(k);
    for (std::size_t i = 0; i < k; ++i) out.ball.members[i] = dist[i].second;
    for (auto idx : out.ball.members)
        out.ball.R = std::max(out.ball.R, (design.point(idx) - v).norm());

    auto it = cache_.find(out.ball.members);
    if (it != cache_.end()) {
        out.model = it->second;
        return out;
    }
    Matrix X = design.points_matrix(out.ball.members);
    Vector Y = design.values_vector(out.ball.members);
    out.model = fit_pls_gp(X, Y, pls_opts_, gp_opts_, &*global_,
                           next_hint(hint_, hint_uses_));
    cache_.emplace(out.ball.members, out.model);
    return out;
}

// ---------------------------------------------------------------------------

LocalStepResult local_step(const Vector& v, const Sample& prev, DesignSet& design,
                           const LevelContext& ctx, LocalModelBuilder& builder,
                           const LimitState& g, const RefinementPolicy& policy,
                           RngStream& refine_rng) {
    LocalStepResult result;
    Prediction pred_v, pred_p;
    double eps_v = 0.0;
    std::size_t refines = 0;

    auto insert_refinement = [&](const LocalFit& fit, double c) {
        Vector theta = refine_select(fit.ball, *fit.model, c, policy, design,
                                     refine_rng);
        if (!design.contains(theta) && design.insert(theta, g.evaluate(theta))) {
            ++result.true_evals;
            ++result.refine_evals;
            builder.design_changed();
        }
        ++refines;
    };

    // refinement targets only the reducible part of the uncertainty: new
    // design points cannot push sigma below the surrogate's floor
    auto reducible = [](const Prediction& p, double floor) {
        Prediction q = p;
        q.sigma = std::sqrt(std::max(p.sigma * p.sigma - floor * floor, 0.0));
        return error_indicator(q);
    };

    while (true) {
        LocalFit fit_v = builder.fit_at(design, v);
        LocalFit fit_p = builder.fit_at(design, prev.coords);
        pred_v = fit_v.model->predict(v);
        pred_p = fit_p.model->predict(prev.coords);
        eps_v = error_indicator(pred_v);

        if (refines >= policy.max_refines_per_step) break;

        const double red_v = reducible(pred_v, fit_v.model->sigma_floor());
        const double red_p = reducible(pred_p, fit_p.model->sigma_floor());
        const double beta_T = random_refine_probability(ctx.s, ctx.j, policy);
        if (beta_T > 0.0 && refine_rng.uniform() < beta_T) {
            const LocalFit& target = refine_rng.uniform() < 0.5 ? fit_v : fit_p;
            insert_refinement(target, -ctx.c_j);
        } else if (red_v >= red_p && red_v >= policy.gamma_T) {
            insert_refinement(fit_v, 0.0);
        } else if (red_p > red_v && red_p >= policy.gamma_T) {
            insert_refinement(fit_p, 0.0);
        } else {
            break;
        }
    }

    double value = pred_v.mu;
    EvalKind kind = EvalKind::Surrogate;
    bool need_true = false;

    // refinement budget exhausted with residual error
    if (eps_v >= policy.gamma_T) need_true = true;

    // nestedness fallback: a sign-ambiguous classification at c_j, or an
    // accepted prediction that would land outside F_{j-1}
    const double lo = pred_v.mu - 1.96 * pred_v.sigma;
    const double hi = pred_v.mu + 1.96 * pred_v.sigma;
    if (lo <= ctx.c_j && ctx.c_j <= hi && pred_v.sigma > 0.0) need_true = true;
    if (value <= ctx.c_j && value > ctx.c_prev + 1e-9) need_true = true;

    if (need_true) {
        if (auto archived = design.lookup(v)) {
            value = *archived;
        } else {
            value = g.evaluate(v);
            ++result.true_evals;
            design.insert(v, value);
            builder.design_changed();
            result.used_true_eval = true;
        }
        kind = EvalKind::True;
    }

    if (value <= ctx.c_j) {
        result.next = v;
        result.value = value;
        result.kind = kind;
        result.accepted = true;
    } else {
        result.next = prev.coords;
        result.value = prev.eval.value();
        result.kind = prev.eval_kind;
        result.accepted = false;
    }
    return result;
}

LocalStartResult local_start(const Vector& v0, DesignSet& design,
                             LocalModelBuilder& builder, const LimitState& g,
                             const RefinementPolicy& policy,
                             std::size_t proposals_seen, std::size_t warm_count) {
    LocalStartResult out;
    const bool must_evaluate = proposals_seen < warm_count ||
                               design.size() < builder.min_design_size();
    if (!must_evaluate) {
        LocalFit fit = builder.fit_at(design, v0);
        Prediction pred = fit.model->predict(v0);
        if (error_indicator(pred) < policy.gamma_T) {
            out.value = pred.mu + 1.96 * pred.sigma;  // conservative upper bound
            out.kind = EvalKind::Surrogate;
            return out;
        }
    }
    out.value = g.evaluate(v0);
    out.kind = EvalKind::True;
    out.true_evals = 1;
    if (design.insert(v0, out.value)) builder.design_changed();
    return out;
}

}  // namespace raresim
