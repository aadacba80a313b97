#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstddef>
#include <utility>
#include <optional>
#include <stdexcept>
#include <vector>

namespace raresim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class EvalKind { True, Surrogate };

/// A point in standard-normal space with an optional cached limit-state
/// value. eval_kind is True only when the value came from the model itself.
struct Sample {
    Vector coords;
    std::optional<double> eval;
    EvalKind eval_kind = EvalKind::Surrogate;

    Sample() = default;
    explicit Sample(Vector c) : coords(std::move(c)) {}
    Sample(Vector c, double value, EvalKind kind)
        : coords(std::move(c)), eval(value), eval_kind(kind) {}
};

/// Growing archive of (theta, g(theta)) pairs with true evaluations only.
/// Duplicate coordinates (within 1e-12 per component, absolute) are
/// rejected to keep downstream kernel matrices non-singular.
class DesignSet {
public:
    static constexpr double kDuplicateTol = 1e-12;

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    const Vector& point(std::size_t i) const { return points_[i]; }
    double value(std::size_t i) const { return values_[i]; }

    /// Inserts a true evaluation. Returns false (and stores nothing) if the
    /// coordinates duplicate an existing point within tolerance.
    bool insert(const Vector& coords, double g_value) {
        if (contains(coords)) return false;
        points_.push_back(coords);
        values_.push_back(g_value);
        return true;
    }

    bool contains(const Vector& coords) const {
        return lookup(coords).has_value();
    }

    /// Stored value for coordinates already in the set, if any. Lets callers
    /// reuse archived evaluations instead of re-running the limit state.
    std::optional<double> lookup(const Vector& coords) const {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const auto& p = points_[i];
            if (p.size() == coords.size() &&
                (p - coords).cwiseAbs().maxCoeff() <= kDuplicateTol)
                return values_[i];
        }
        return std::nullopt;
    }

    /// Indices of the k nearest points to `query` by Euclidean distance,
    /// ties broken by insertion order.
    std::vector<std::size_t> nearest(const Vector& query, std::size_t k) const {
        if (k > points_.size())
            throw std::runtime_error(
                "DesignSet::nearest: design set smaller than requested "
                "neighborhood; warm-start must top up the set first");
        std::vector<std::pair<double, std::size_t>> dist(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i)
            dist[i] = {(points_[i] - query).norm(), i};
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k),
                          dist.end());
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
        return out;
    }

    Matrix points_matrix(const std::vector<std::size_t>& idx) const {
        Matrix X(static_cast<long>(idx.size()),
                 points_.empty() ? 0 : points_[0].size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            X.row(static_cast<long>(i)) = points_[idx[i]].transpose();
        return X;
    }

    Vector values_vector(const std::vector<std::size_t>& idx) const {
        Vector y(static_cast<long>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            y[static_cast<long>(i)] = values_[idx[i]];
        return y;
    }

private:
    std::vector<Vector> points_;
    std::vector<double> values_;
};

}  // namespace raresim
