#include "uhmc/chain.hpp"

#include <stdexcept>

namespace uhmc {

void ChainConfig::check() const {
    if (!allow_constraint_violation && !params.constraint_ok(potential.lip_grad()))
        throw std::invalid_argument("ChainConfig: step-size constraint L(T^2 + Th) <= 1/6 violated");
}

Vec uhmc_step(const Vec& x, const ChainConfig& cfg, RngStream& rng) {
    const Vec xi = rng.gaussian_vec(static_cast<int>(x.size()));
    Trajectory traj = verlet_flow({x, xi}, cfg.params, cfg.potential);
    return traj.end_position();
}

std::vector<Vec> uhmc_run(const Vec& x0, int m, const ChainConfig& cfg, const RngStream& rng) {
    if (m < 0) throw std::invalid_argument("uhmc_run: m must be nonnegative");
    std::vector<Vec> states;
    states.reserve(m + 1);
    states.push_back(x0);
    for (int n = 0; n < m; ++n) {
        RngStream sr = rng.fork(static_cast<std::uint64_t>(n));
        states.push_back(uhmc_step(states.back(), cfg, sr));
    }
    return states;
}

}  // namespace uhmc
