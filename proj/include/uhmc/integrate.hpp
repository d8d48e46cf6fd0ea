#pragma once

#include <optional>
#include <vector>

#include "uhmc/model.hpp"

namespace uhmc {

// Duration T, step h = T/N. N is the stored integer so N*h = T holds exactly.
struct IntegratorParams {
    double T = 0.0;
    int N = 0;

    IntegratorParams() = default;
    IntegratorParams(double T_, int N_);

    double h() const { return T / N; }
    // Step-size constraint L(T^2 + T h) <= 1/6.
    bool constraint_ok(double L) const { return L * (T * T + T * h()) <= 1.0 / 6.0 + 1e-15; }
};

struct PhaseState {
    Vec x;
    Vec v;
};

// Verlet grid states with cached gradients; consecutive states satisfy the
// Verlet update exactly, and the interpolants reproduce the grid values.
struct Trajectory {
    IntegratorParams params;
    std::vector<Vec> grid_positions;   // N+1 entries
    std::vector<Vec> grid_velocities;  // N+1 entries
    std::vector<Vec> grid_gradients;   // N+1 entries

    const Vec& end_position() const { return grid_positions.back(); }
    const Vec& end_velocity() const { return grid_velocities.back(); }
    PhaseState end_state() const { return {grid_positions.back(), grid_velocities.back()}; }
};

// Velocity part of the derivative flow: d2q = D2 q_T, d2v = D2 v_T, the
// Jacobians of the flow with respect to the initial velocity.
struct DerivativeFlow {
    Mat d2q;
    Mat d2v;
    std::vector<Mat> per_grid_d2q;  // filled when requested
    std::vector<Mat> per_grid_d2v;
};

// One Verlet step:
//   x' = x + h v - (h^2/2) grad U(x)
//   v' = v - (h/2) [grad U(x) + grad U(x')]
// With grad_x supplied only one new gradient evaluation is made.
PhaseState verlet_step(const PhaseState& s, double h, const Potential& U,
                       const Vec* grad_x = nullptr, Vec* grad_out = nullptr);

Trajectory verlet_flow(const PhaseState& s, const IntegratorParams& p, const Potential& U);

// Positions are piecewise quadratic, velocities piecewise linear:
//   q(t_k + s) = q_k + s v_k - (s^2/2) g_k
//   v(t_k + s) = v_k - (s/2) (g_k + g_{k+1})
PhaseState interpolate(const Trajectory& traj, double t);

enum class ExactFlowMode { analytic_gaussian, reference_fine_step };

// Hamiltonian flow over time T. The analytic mode requires a quadratic
// potential; the reference mode runs Verlet at step h/refinement and is an
// O(h_ref^2)-accurate proxy.
PhaseState exact_flow(const PhaseState& s, double T, const Potential& U, ExactFlowMode mode,
                      int N_base = 0, int refinement = 64);

// Linearized Verlet recursion integrated alongside the trajectory:
//   Dq_{k+1} = Dq_k + h Dv_k - (h^2/2) H(q_k) Dq_k
//   Dv_{k+1} = Dv_k - (h/2) [H(q_k) Dq_k + H(q_{k+1}) Dq_{k+1}]
// with Dq_0 = 0 and Dv_0 = I.
DerivativeFlow derivative_flow(const PhaseState& s, const IntegratorParams& p, const Potential& U,
                               bool keep_per_grid = false);

// Derivative of the exact flow with respect to the initial velocity,
// approximated at step h/refinement in reference mode.
DerivativeFlow exact_derivative_flow(const PhaseState& s, double T, const Potential& U,
                                     ExactFlowMode mode, int N_base = 0, int refinement = 64);

// Thrown when a trajectory leaves the representable range (step too large).
struct integrator_blowup : std::runtime_error {
    explicit integrator_blowup(int step_index)
        : std::runtime_error("non-finite state at integrator step " + std::to_string(step_index)),
          step(step_index) {}
    int step;
};

}  // namespace uhmc
