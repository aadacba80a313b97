#pragma once

#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "raresim/gp.hpp"
#include "raresim/limit_state.hpp"
#include "raresim/pls.hpp"
#include "raresim/rng.hpp"
#include "raresim/types.hpp"

namespace raresim {

struct RefinementPolicy {
    double gamma_T = 0.05;
    double beta0 = 1.0;
    double beta1 = 0.01;
    double beta2 = 2.0;
    std::size_t max_refines_per_step = 5;
    std::size_t pool_size = 200;
};

/// Number of design points backing one local fit:
/// ceil(sqrt(d)(d+1)(d+2)/2) normally, d+1 in the high-dimensional regime.
std::size_t default_N0(std::size_t d, bool high_dim);

/// The N0 nearest design points around a query, with the enclosing radius.
struct BallQuery {
    Vector center;
    double R = 0.0;
    std::vector<std::size_t> members;
};

BallQuery select_ball(const Vector& v, const DesignSet& design, std::size_t N0);

/// Normalized width of the 95% prediction interval, 2*1.96*sigma/|mu|.
/// A vanishing mean returns +inf so the caller always refines.
double error_indicator(const Prediction& pred);

/// beta_T = beta1 * s^(-beta0 * j^beta2), clamped to [0,1].
double random_refine_probability(std::size_t s, std::size_t j,
                                 const RefinementPolicy& policy);

/// Phi(-|mu - c|/sigma); at sigma = 0 this is 0 away from the threshold and
/// 0.5 exactly on it.
double misclassification_probability(double mu, double sigma, double c);

/// Pool-based U-function minimization inside the ball. Candidate points
/// within the duplicate tolerance of design points are excluded; an empty
/// pool returns the ball center nudged by 1e-3*R.
Vector refine_select(const BallQuery& ball, const Surrogate& surrogate, double c,
                     const RefinementPolicy& policy, const DesignSet& design,
                     RngStream& rng);

// ---------------------------------------------------------------------------

struct LocalFit {
    std::shared_ptr<Surrogate> model;
    BallQuery ball;
};

/// Fits a local surrogate around a query point from the design set. A
/// builder chooses its own neighbors and may cache fits; caches must be
/// dropped when the design set changes.
class LocalModelBuilder {
public:
    virtual ~LocalModelBuilder() = default;
    virtual LocalFit fit_at(const DesignSet& design, const Vector& v) = 0;
    virtual std::size_t min_design_size() const = 0;
    virtual void design_changed() {}
};

class GpLocalBuilder final : public LocalModelBuilder {
public:
    GpLocalBuilder(std::size_t N0, GpOptions opts = {}) : N0_(N0), opts_(opts) {}
    LocalFit fit_at(const DesignSet& design, const Vector& v) override;
    std::size_t min_design_size() const override { return N0_; }
    void design_changed() override { cache_.clear(); }

private:
    std::size_t N0_;
    GpOptions opts_;
    // fits depend only on the member set, which makes them cacheable across
    // the many repeated balls a slowly-moving chain produces
    std::map<std::vector<std::size_t>, std::shared_ptr<Surrogate>> cache_;
    GpFitHint hint_;
    std::size_t hint_uses_ = 0;
};

class QuadraticLocalBuilder final : public LocalModelBuilder {
public:
    explicit QuadraticLocalBuilder(std::size_t N0) : N0_(N0) {}
    LocalFit fit_at(const DesignSet& design, const Vector& v) override;
    std::size_t min_design_size() const override { return N0_; }
    void design_changed() override { cache_.clear(); }

private:
    std::size_t N0_;
    std::map<std::vector<std::size_t>, std::shared_ptr<Surrogate>> cache_;
};

/// Two-stage PLS+GP builder: a cached global subspace fitted on the whole
/// design set (rebuilt when the set grows by more than 10%), neighbor
/// selection in the global latent space, then a local PLS+GP composite.
class PlsGpLocalBuilder final : public LocalModelBuilder {
public:
    PlsGpLocalBuilder(std::size_t dimension, PlsOptions pls_opts = {},
                      GpOptions gp_opts = {})
        : d_(dimension), pls_opts_(pls_opts), gp_opts_(gp_opts) {}

    LocalFit fit_at(const DesignSet& design, const Vector& v) override;
    std::size_t min_design_size() const override { return d_ + 1; }
    void design_changed() override { cache_.clear(); }

    /// Neighbor count once the global latent dimension r is known.
    static std::size_t neighbor_count(long r) {
        return std::max<std::size_t>(2 * static_cast<std::size_t>(r) + 10,
                                     3 * static_cast<std::size_t>(r));
    }

    const PLSModel* global_model() const { return global_ ? &*global_ : nullptr; }

private:
    void refresh_global(const DesignSet& design);

    std::size_t d_;
    PlsOptions pls_opts_;
    GpOptions gp_opts_;
    std::optional<PLSModel> global_;
    Matrix global_scores_;  // design points projected into the global subspace
    std::size_t global_fit_size_ = 0;
    std::map<std::vector<std::size_t>, std::shared_ptr<Surrogate>> cache_;
    GpFitHint hint_;
    std::size_t hint_uses_ = 0;
};

// ---------------------------------------------------------------------------

struct LevelContext {
    double c_j;
    double c_prev;  // +inf at the first level
    std::size_t j;  // level index >= 1
    std::size_t s;  // chain step >= 1
};

struct LocalStepResult {
    Vector next;
    double value = 0.0;      // working value recorded for `next`
    EvalKind kind = EvalKind::Surrogate;
    bool accepted = false;
    bool used_true_eval = false;
    std::size_t true_evals = 0;
    std::size_t refine_evals = 0;
};

/// One surrogate-backed chain step: fit local models at the candidate and
/// the previous state, run the refinement loop (random and error-triggered),
/// apply the nestedness fallback, then accept the candidate iff its working
/// value lies inside F_j.
LocalStepResult local_step(const Vector& v, const Sample& prev, DesignSet& design,
                           const LevelContext& ctx, LocalModelBuilder& builder,
                           const LimitState& g, const RefinementPolicy& policy,
                           RngStream& refine_rng);

struct LocalStartResult {
    double value = 0.0;
    EvalKind kind = EvalKind::Surrogate;
    std::size_t true_evals = 0;
};

/// Warm-started level-0 handling of one LHS proposal: true evaluations for
/// the first M proposals (and whenever the design set is still too small or
/// the error indicator exceeds gamma_T), g-hat-plus surrogate records
/// otherwise.
LocalStartResult local_start(const Vector& v0, DesignSet& design,
                             LocalModelBuilder& builder, const LimitState& g,
                             const RefinementPolicy& policy,
                             std::size_t proposals_seen, std::size_t warm_count);

}  // namespace raresim
