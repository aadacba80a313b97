#pragma once

namespace raresim {

/// Standard normal CDF Phi(x).
double normal_cdf(double x);

/// Standard normal PDF phi(x).
double normal_pdf(double x);

/// Inverse standard normal CDF. Requires u in (0,1); accurate to ~1e-15
/// (rational approximation refined by one Halley step).
/// Throws std::domain_error outside the open interval.
double inv_normal_cdf(double u);

}  // namespace raresim
