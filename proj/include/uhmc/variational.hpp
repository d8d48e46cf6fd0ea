#pragma once

#include "uhmc/integrate.hpp"

namespace uhmc {

// Grid path with fixed endpoints a = points.front(), b = points.back().
struct DiscretePath {
    IntegratorParams params;
    std::vector<Vec> points;  // N+1 entries
};

// L_h(x, y) = (h/2) ( |y-x|^2 / h^2 - U(y) - U(x) )
double discrete_lagrangian(const Vec& x, const Vec& y, double h, const Potential& U);

// S_h(q) = sum_k L_h(q_k, q_{k+1})
double action_sum(const DiscretePath& path, const Potential& U);

// Euler-Lagrange residual at interior node k:
//   (2 q_k - q_{k-1} - q_{k+1}) / h - h grad U(q_k)
// (also the gradient of S_h with respect to q_k).
std::vector<Vec> euler_lagrange_residual(const DiscretePath& path, const Potential& U);

struct bvp_failure : std::runtime_error {
    bvp_failure(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

// Minimizes S_h over interior points with endpoints a, b fixed. Newton on the
// Euler-Lagrange residual with the block-tridiagonal Hessian of S_h solved by
// block Thomas elimination; straight-line initial guess; damped steps and a
// gradient-descent fallback if the residual stalls. Requires the step-size
// constraint so that S_h is strongly convex.
DiscretePath solve_discrete_bvp(const Vec& a, const Vec& b, const IntegratorParams& p,
                                const Potential& U, double tol = 1e-10, int max_iter = 100,
                                int* iters_out = nullptr);

struct PhiResult {
    Vec u;              // Phi(v)
    DiscretePath path;  // action minimizer (same-endpoint map only)
    Mat jac;            // D Phi(v)
    double logdet = 0.0;
    int newton_iters = 0;
    double residual = 0.0;
};

// Same-endpoint velocity map: Phi(v) with q_T(x, v) = q_T(y, Phi(v)) for the
// Verlet flow; recovered from the action minimizer via
// Phi(v) = (q*_h - q*_0)/h + (h/2) grad U(q*_0). The Jacobian solves
// D2 q_T(y, Phi(v)) DPhi = D2 q_T(x, v).
PhiResult phi_same_endpoint(const Vec& x, const Vec& y, const Vec& v, const IntegratorParams& p,
                            const Potential& U);

// Exact-endpoint velocity map: Phi(v) such that the exact Hamiltonian flow
// from (x, Phi(v)) reaches the Verlet endpoint of (x, v) at time T. Solved by
// a damped Newton shooting method with Jacobian D2 q_T(x, u).
PhiResult phi_exact_endpoint(const Vec& x, const Vec& v, const IntegratorParams& p,
                             const Potential& U, ExactFlowMode mode = ExactFlowMode::analytic_gaussian,
                             int refinement = 64);

}  // namespace uhmc
