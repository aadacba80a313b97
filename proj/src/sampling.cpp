#include "raresim/sampling.hpp"

#include <numeric>
#include <stdexcept>

#include "raresim/normal.hpp"

namespace raresim {

Matrix standard_normal_matrix(std::size_t n, std::size_t d, RngStream& rng) {
    if (n < 1 || d < 1)
        throw std::invalid_argument("standard_normal_matrix: n and d must be >= 1");
    Matrix out(static_cast<long>(n), static_cast<long>(d));
    for (long i = 0; i < out.rows(); ++i)
        for (long j = 0; j < out.cols(); ++j) out(i, j) = rng.normal();
    return out;
}

Matrix lhs_sample(std::size_t N, std::size_t d, RngStream& rng) {
    if (N < 2) throw std::invalid_argument("lhs_sample: N must be >= 2");
    Matrix out(static_cast<long>(N), static_cast<long>(d));
    std::vector<std::size_t> perm(N);
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        // Fisher-Yates
        for (std::size_t i = N - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.below(i + 1)]);
        for (std::size_t i = 0; i < N; ++i) {
            double u = (static_cast<double>(perm[i]) + rng.uniform()) /
                       static_cast<double>(N);
            out(static_cast<long>(i), static_cast<long>(j)) = inv_normal_cdf(u);
        }
    }
    return out;
}

}  // namespace raresim
