#include "raresim/mcmc.hpp"

#include <cmath>
#include <stdexcept>

namespace raresim {

Vector propose(const Vector& current, const ProposalParams& params,
               RngStream& rng) {
    Vector v(current.size());
    for (long i = 0; i < current.size(); ++i) {
        const double rho = params.rho[i];
        const double sd = std::sqrt(std::max(0.0, 1.0 - rho * rho));
        v[i] = rho * current[i] + sd * rng.normal();
    }
    return v;
}

StepResult chain_step(const Vector& current,
                      const std::function<bool(const Vector&)>& in_F,
                      const ProposalParams& params, ChainStats& stats,
                      RngStream& rng) {
    Vector v = propose(current, params, rng);
    ++stats.proposals;
    if (in_F(v)) {
        ++stats.accepts;
        return {std::move(v), true};
    }
    return {current, false};
}

void adapt(ProposalParams& params, ChainStats& stats,
           std::size_t adaptation_index) {
    if (stats.proposals < 1)
        throw std::invalid_argument("adapt: no proposals recorded");
    const double a_hat = stats.acceptance();
    params.lambda = std::exp(
        std::log(params.lambda) +
        (a_hat - params.target_accept) /
            std::sqrt(static_cast<double>(std::max<std::size_t>(adaptation_index, 1))));
    params.refresh_rho();
    stats.reset();
}

}  // namespace raresim
