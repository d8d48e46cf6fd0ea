#pragma once

#include "uhmc/model.hpp"
#include "uhmc/integrate.hpp"
#include "uhmc/rng.hpp"

namespace uhmc {

struct InequalityCheckResult {
    std::string name;
    long checked = 0;
    long violations = 0;
    long skipped = 0;           // draws gated out by a violated precondition
    double worst_margin = 1e300;  // min over draws of (rhs + slack - lhs)
    std::string counterexample;   // first violating input, if any

    bool passed() const { return violations == 0; }
};

struct InequalitySuiteConfig {
    int draws = 10000;
    std::uint64_t seed = 20240601;
    double input_scale = 1.0;  // scale of the Gaussian (x, v) draws
    // Fine-step refinement used where the exact flow is approximated; the
    // same bound evaluated at h_ref is added to the tolerance.
    int refinement = 16;
};

// A priori, discretization-error and Phi-map inequalities for a general
// potential (the suite skips constraint-gated checks when the step-size
// constraint fails and reports them as skipped).
std::vector<InequalityCheckResult> check_general_inequalities(const Potential& U, const IntegratorParams& p,
                                                   const InequalitySuiteConfig& cfg);

// Mean-field analogs on the assembled potential, blockwise.
std::vector<InequalityCheckResult> check_mean_field_inequalities(const MeanFieldPotential& mfp,
                                                      const IntegratorParams& p,
                                                      const InequalitySuiteConfig& cfg);

// TV <= sqrt(2 KL) <= sqrt(E[|Phi(xi)-xi|^2 + 2 |DPhi(xi)-I|_F^2]) ordering
// on randomized 1D affine maps with |DPhi - I| <= 1/2.
InequalityCheckResult check_overlap_ordering(int draws, std::uint64_t seed);

// Kernel regularization on a Gaussian target: exact TV between the two
// one-step kernels against (3/2)(T^-2 + 27 d L_H^2 T^4)^{1/2} |x - y|.
InequalityCheckResult check_regularization_gaussian(int dim, double omega2, const IntegratorParams& p,
                                               int draws, std::uint64_t seed);

// Mean-field regularization (ell_1 version) on a Gaussian mean-field target.
InequalityCheckResult check_regularization_mean_field_gaussian(const MeanFieldPotential& mfp,
                                                          const IntegratorParams& p, int draws,
                                                          std::uint64_t seed);

}  // namespace uhmc
