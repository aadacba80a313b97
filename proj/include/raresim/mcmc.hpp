#pragma once

#include <functional>

#include "raresim/rng.hpp"
#include "raresim/types.hpp"

namespace raresim {

/// Adaptive conditional-sampling proposal state. Each coordinate keeps a
/// cross-correlation factor rho = sqrt(1 - sigma^2) with sigma =
/// min(1, lambda * sigma_hat); lambda is tuned toward a 0.44 acceptance
/// rate between adaptation windows.
struct ProposalParams {
    Vector rho;
    Vector sigma_hat;
    double lambda = 0.6;
    double target_accept = 0.44;
    std::size_t adapt_window = 10;  // chain-starts between adaptations

    static ProposalParams initial(std::size_t d, double lambda0 = 0.6) {
        ProposalParams p;
        p.sigma_hat = Vector::Ones(static_cast<long>(d));
        p.lambda = lambda0;
        p.refresh_rho();
        return p;
    }

    void refresh_rho() {
        rho = Vector(sigma_hat.size());
        for (long i = 0; i < sigma_hat.size(); ++i) {
            const double s = std::min(1.0, lambda * sigma_hat[i]);
            rho[i] = std::sqrt(std::max(0.0, 1.0 - s * s));
        }
    }
};

struct ChainStats {
    std::size_t proposals = 0;
    std::size_t accepts = 0;

    double acceptance() const {
        return proposals == 0 ? 0.0
                              : static_cast<double>(accepts) /
                                    static_cast<double>(proposals);
    }
    void reset() { proposals = accepts = 0; }
};

/// Candidate state: per coordinate Normal(rho_i * current_i, 1 - rho_i^2).
Vector propose(const Vector& current, const ProposalParams& params, RngStream& rng);

/// One conditional-sampling step. Accepts the candidate iff it lies in the
/// current intermediate failure event; no Metropolis ratio is applied.
struct StepResult {
    Vector next;
    bool accepted;
};

StepResult chain_step(const Vector& current,
                      const std::function<bool(const Vector&)>& in_F,
                      const ProposalParams& params, ChainStats& stats,
                      RngStream& rng);

/// Stochastic-approximation scaling update:
/// log lambda += (acc_rate - target) / sqrt(adaptation_index), then the
/// rho/sigma coupling is refreshed and the stats reset.
void adapt(ProposalParams& params, ChainStats& stats, std::size_t adaptation_index);

}  // namespace raresim
