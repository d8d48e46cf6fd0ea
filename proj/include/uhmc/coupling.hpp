#pragma once

#include "uhmc/chain.hpp"
#include "uhmc/variational.hpp"

namespace uhmc {

enum class OneShotMode {
    same_endpoint,   // couples pi~(x, .) with pi~(y, .)
    exact_endpoint,  // couples pi~(x, .) with pi(x, .); y is ignored
};

enum class CouplingBranch { accepted_phi, residual };

struct CouplingOutcome {
    Vec x_next;
    Vec y_next;
    bool met = false;  // met implies x_next == y_next bitwise
    double alpha = 0.0;
    CouplingBranch branch = CouplingBranch::residual;
    int residual_draws = 0;
    Vec eta;  // second velocity actually used (diagnostic)
};

// Transition step of the one-shot coupling: X' = Verlet endpoint of (x, xi);
// with probability alpha(xi) the second velocity is Phi(xi) and the chains
// coalesce, otherwise the second velocity is drawn from the residual
// distribution by exact rejection. Both marginals are the correct kernels.
CouplingOutcome one_shot_step(const Vec& x, const Vec& y, const ChainConfig& cfg, RngStream& rng,
                              OneShotMode mode = OneShotMode::same_endpoint,
                              ExactFlowMode exact_mode = ExactFlowMode::analytic_gaussian);

// Shared velocity draw for both chains; contracts for strongly logconcave
// targets, never coalesces on its own.
CouplingOutcome synchronous_step(const Vec& x, const Vec& y, const ChainConfig& cfg, RngStream& rng);

enum class CouplingMetric { euclidean, l1_blocks };

struct ThresholdPolicy {
    double threshold = 0.1;
    int max_steps = 100000;
    int max_oneshot_attempts = 5;  // consecutive, before reverting to contraction
    bool record_trace = false;
    CouplingMetric metric = CouplingMetric::euclidean;
    int blocks_n = 1;  // used by the l1_blocks metric
    int blocks_k = 1;

    // threshold = min(0.1, 1/(3 reg)) keeps the one-shot success probability
    // above 2/3 under the regularization bound.
    static ThresholdPolicy for_potential(const Potential& U, const IntegratorParams& p);
};

struct CouplingTimeRecord {
    int tau = 0;  // first step with X_n == Y_n; max_steps cap when not met
    bool met = false;
    int phase1_steps = 0;      // contraction-phase steps taken
    int oneshot_attempts = 0;  // one-shot steps taken
    std::vector<double> trace;
};

// Two-phase successful coupling: synchronous contraction until the distance
// drops below the threshold, then one-shot attempts; a failed one-shot
// reverts to the contraction phase.
CouplingTimeRecord coupled_meeting_time(const Vec& x0, const Vec& y0, const ChainConfig& cfg,
                                        const RngStream& rng, const ThresholdPolicy& policy);

struct residual_sampling_failure : std::runtime_error {
    explicit residual_sampling_failure(int draws)
        : std::runtime_error("one_shot_step: residual rejection cap exceeded after " +
                             std::to_string(draws) + " proposals") {}
};

}  // namespace uhmc
