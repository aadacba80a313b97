#pragma once

#include "raresim/rng.hpp"
#include "raresim/types.hpp"

namespace raresim {

/// n x d matrix of iid standard normal entries.
Matrix standard_normal_matrix(std::size_t n, std::size_t d, RngStream& rng);

/// Latin hypercube sample of N points in R^d: one point per axis-aligned
/// stratum of width 1/N in each unit-cube coordinate (uniform within the
/// stratum, independently permuted per dimension), mapped through the
/// inverse standard-normal CDF. Requires N >= 2.
Matrix lhs_sample(std::size_t N, std::size_t d, RngStream& rng);

/// Failure indicator: 1 iff g_value <= c.
inline int indicator(double g_value, double c) { return g_value <= c ? 1 : 0; }

}  // namespace raresim
