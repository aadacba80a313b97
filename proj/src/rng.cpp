#include "raresim/rng.hpp"

#include "raresim/normal.hpp"

namespace raresim {

double RngStream::normal() { return inv_normal_cdf(uniform()); }

}  // namespace raresim
