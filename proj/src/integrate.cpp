#include "uhmc/integrate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "uhmc/simd/kernels.hpp"

namespace uhmc {

IntegratorParams::IntegratorParams(double T_, int N_) : T(T_), N(N_) {
    if (T <= 0.0 || N <= 0) throw std::invalid_argument("IntegratorParams: need T > 0, N > 0");
}

namespace {
bool finite(const Vec& x) { return x.allFinite(); }
}  // namespace

PhaseState verlet_step(const PhaseState& s, double h, const Potential& U, const Vec* grad_x,
                       Vec* grad_out) {
    const auto& k = simd::active();
    const std::size_t n = static_cast<std::size_t>(s.x.size());
    Vec g0;
    if (grad_x == nullptr) {
        g0 = U.gradient(s.x);
        grad_x = &g0;
    }
    PhaseState out{s.x, s.v};
    k.verlet_position(n, out.x.data(), s.v.data(), grad_x->data(), h);
    Vec g1 = U.gradient(out.x);
    k.velocity_kick(n, out.v.data(), grad_x->data(), g1.data(), 0.5 * h);
    if (!finite(out.x) || !finite(out.v)) throw integrator_blowup(0);
    if (grad_out) *grad_out = std::move(g1);
    return out;
}

Trajectory verlet_flow(const PhaseState& s, const IntegratorParams& p, const Potential& U) {
    const auto& k = simd::active();
    const int N = p.N;
    const double h = p.h();
    const std::size_t n = static_cast<std::size_t>(s.x.size());

    Trajectory traj;
    traj.params = p;
    traj.grid_positions.reserve(N + 1);
    traj.grid_velocities.reserve(N + 1);
    traj.grid_gradients.reserve(N + 1);
    traj.grid_positions.push_back(s.x);
    traj.grid_velocities.push_back(s.v);
    traj.grid_gradients.push_back(U.gradient(s.x));

    Vec x = s.x, v = s.v, g = traj.grid_gradients[0], g1(s.x.size());
    for (int i = 0; i < N; ++i) {
        k.verlet_position(n, x.data(), v.data(), g.data(), h);
        U.gradient_into(x, g1);
        k.velocity_kick(n, v.data(), g.data(), g1.data(), 0.5 * h);
        if (!finite(x) || !finite(v)) throw integrator_blowup(i + 1);
        g.swap(g1);
        traj.grid_positions.push_back(x);
        traj.grid_velocities.push_back(v);
        traj.grid_gradients.push_back(g);
    }
    return traj;
}

PhaseState interpolate(const Trajectory& traj, double t) {
    const double T = traj.params.T;
    const double h = traj.params.h();
    if (t < -1e-12 || t > T + 1e-12) throw std::invalid_argument("interpolate: t outside [0, T]");
    t = std::min(std::max(t, 0.0), T);
    // t within a few ulps of a grid knot returns the stored state exactly
    const double kf = std::round(t / h);
    const int knot = static_cast<int>(kf);
    if (knot >= 0 && knot <= traj.params.N &&
        std::abs(t - kf * h) <= 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + T))
        return {traj.grid_positions[knot], traj.grid_velocities[knot]};
    int cell = static_cast<int>(std::floor(t / h));
    if (cell >= traj.params.N) cell = traj.params.N - 1;
    const double s = t - cell * h;
    const Vec& q = traj.grid_positions[cell];
    const Vec& v = traj.grid_velocities[cell];
    const Vec& g0 = traj.grid_gradients[cell];
    const Vec& g1 = traj.grid_gradients[cell + 1];
    PhaseState out;
    out.x = q + s * v - 0.5 * s * s * g0;
    out.v = v - 0.5 * s * (g0 + g1);
    return out;
}

PhaseState exact_flow(const PhaseState& s, double T, const Potential& U, ExactFlowMode mode,
                      int N_base, int refinement) {
    if (mode == ExactFlowMode::analytic_gaussian) {
        const auto om2 = U.quadratic_curvature();
        if (!om2) throw std::invalid_argument("exact_flow: analytic mode needs a quadratic potential");
        if (*om2 == 0.0) return {s.x + T * s.v, s.v};
        const double w = std::sqrt(*om2);
        const double c = std::cos(w * T), sn = std::sin(w * T);
        return {c * s.x + sn / w * s.v, -w * sn * s.x + c * s.v};
    }
    if (T == 0.0) return s;
    if (N_base <= 0) N_base = 1;
    IntegratorParams fine(T, N_base * refinement);
    Trajectory traj = verlet_flow(s, fine, U);
    return traj.end_state();
}

DerivativeFlow derivative_flow(const PhaseState& s, const IntegratorParams& p, const Potential& U,
                               bool keep_per_grid) {
    const int d = static_cast<int>(s.x.size());
    const int N = p.N;
    const double h = p.h();

    Trajectory traj = verlet_flow(s, p, U);

    Mat Dq = Mat::Zero(d, d);
    Mat Dv = Mat::Identity(d, d);
    DerivativeFlow out;
    if (keep_per_grid) {
        out.per_grid_d2q.reserve(N + 1);
        out.per_grid_d2v.reserve(N + 1);
        out.per_grid_d2q.push_back(Dq);
        out.per_grid_d2v.push_back(Dv);
    }

    Vec col(d), hcol(d);
    Mat P(d, d);  // H(q_k) Dq_k
    // P at step k is reused by the position update at k and the velocity kick.
    auto apply_hessian = [&](const Vec& q, const Mat& M, Mat& R) {
        for (int j = 0; j < d; ++j) {
            col = M.col(j);
            U.hessian_vec_into(q, col, hcol);
            R.col(j) = hcol;
        }
    };

    Mat P1(d, d);
    for (int k = 0; k < N; ++k) {
        apply_hessian(traj.grid_positions[k], Dq, P);
        Mat Dq_next = Dq + h * Dv - 0.5 * h * h * P;
        apply_hessian(traj.grid_positions[k + 1], Dq_next, P1);
        Dv -= 0.5 * h * (P + P1);
        Dq = std::move(Dq_next);
        if (!Dq.allFinite() || !Dv.allFinite()) throw integrator_blowup(k + 1);
        if (keep_per_grid) {
            out.per_grid_d2q.push_back(Dq);
            out.per_grid_d2v.push_back(Dv);
        }
    }
    out.d2q = std::move(Dq);
    out.d2v = std::move(Dv);
    return out;
}

DerivativeFlow exact_derivative_flow(const PhaseState& s, double T, const Potential& U,
                                     ExactFlowMode mode, int N_base, int refinement) {
    const int d = static_cast<int>(s.x.size());
    if (mode == ExactFlowMode::analytic_gaussian) {
        const auto om2 = U.quadratic_curvature();
        if (!om2)
            throw std::invalid_argument("exact_derivative_flow: analytic mode needs a quadratic potential");
        DerivativeFlow out;
        if (*om2 == 0.0) {
            out.d2q = T * Mat::Identity(d, d);
            out.d2v = Mat::Identity(d, d);
            return out;
        }
        const double w = std::sqrt(*om2);
        out.d2q = std::sin(w * T) / w * Mat::Identity(d, d);
        out.d2v = std::cos(w * T) * Mat::Identity(d, d);
        return out;
    }
    if (N_base <= 0) N_base = 1;
    IntegratorParams fine(T, N_base * refinement);
    return derivative_flow(s, fine, U, false);
}

}  // namespace uhmc
