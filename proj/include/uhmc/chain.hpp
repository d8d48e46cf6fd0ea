#pragma once

#include "uhmc/integrate.hpp"
#include "uhmc/rng.hpp"

namespace uhmc {

struct ChainConfig {
    Potential potential;
    IntegratorParams params;
    std::uint64_t seed = 0;
    std::uint64_t replica_id = 0;
    // Set to run outside the guaranteed regime L(T^2 + Th) <= 1/6.
    bool allow_constraint_violation = false;

    void check() const;
    RngStream stream() const { return RngStream(seed, replica_id); }
};

// One uHMC transition: draw xi ~ N(0, I_d) from the stream and return the
// Verlet endpoint position of (x, xi); costs T/h + 1 gradient evaluations.
Vec uhmc_step(const Vec& x, const ChainConfig& cfg, RngStream& rng);

// m transitions; returns m+1 states including x0. Step n draws from the
// substream rng.fork(n).
std::vector<Vec> uhmc_run(const Vec& x0, int m, const ChainConfig& cfg, const RngStream& rng);

}  // namespace uhmc
