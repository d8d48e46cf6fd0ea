#include "uhmc/variational.hpp"

#include <Eigen/LU>
#include <cmath>

namespace uhmc {

double discrete_lagrangian(const Vec& x, const Vec& y, double h, const Potential& U) {
    if (h <= 0.0) throw std::invalid_argument("discrete_lagrangian: h must be positive");
    return 0.5 * h * ((y - x).squaredNorm() / (h * h) - U.energy(y) - U.energy(x));
}

double action_sum(const DiscretePath& path, const Potential& U) {
    if (path.points.size() < 2) throw std::invalid_argument("action_sum: need at least 2 points");
    const double h = path.params.h();
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < path.points.size(); ++k)
        s += discrete_lagrangian(path.points[k], path.points[k + 1], h, U);
    return s;
}

std::vector<Vec> euler_lagrange_residual(const DiscretePath& path, const Potential& U) {
    const double h = path.params.h();
    const int M = static_cast<int>(path.points.size()) - 2;  // interior nodes
    std::vector<Vec> r(std::max(M, 0));
    Vec g(path.points[0].size());
    for (int k = 1; k <= M; ++k) {
        U.gradient_into(path.points[k], g);
        r[k - 1] = (2.0 * path.points[k] - path.points[k - 1] - path.points[k + 1]) / h - h * g;
    }
    return r;
}

namespace {

double sup_norm(const std::vector<Vec>& r) {
    double m = 0.0;
    for (const auto& v : r) m = std::max(m, v.lpNorm<Eigen::Infinity>());
    return m;
}

// Solves the block-tridiagonal Newton system
//   -(1/h) x_{k-1} + D_k x_k - (1/h) x_{k+1} = rhs_k,  D_k = (2/h) I - h H(q_k),
// by forward elimination with dense d x d pivots.
std::vector<Vec> block_thomas(const std::vector<Mat>& D, const std::vector<Vec>& rhs, double h) {
    const int M = static_cast<int>(D.size());
    const double c = 1.0 / h;  // off-diagonal blocks are -c I
    std::vector<Eigen::PartialPivLU<Mat>> lu;
    lu.reserve(M);
    std::vector<Vec> y(M);
    Mat Uk = D[0];
    lu.emplace_back(Uk);
    y[0] = rhs[0];
    // Forward sweep: U_k = D_k - c^2 U_{k-1}^{-1}, y_k = rhs_k + c U_{k-1}^{-1} y_{k-1}.
    for (int k = 1; k < M; ++k) {
        Mat Uinv_prev = lu[k - 1].inverse();
        Uk = D[k] - c * c * Uinv_prev;
        lu.emplace_back(Uk);
        y[k] = rhs[k] + c * (Uinv_prev * y[k - 1]);
    }
    std::vector<Vec> x(M);
    x[M - 1] = lu[M - 1].solve(y[M - 1]);
    for (int k = M - 2; k >= 0; --k) x[k] = lu[k].solve(y[k] + c * x[k + 1]);
    return x;
}

}  // namespace

DiscretePath solve_discrete_bvp(const Vec& a, const Vec& b, const IntegratorParams& p,
                                const Potential& U, double tol, int max_iter, int* iters_out) {
    const int N = p.N;
    const double h = p.h();
    const int d = static_cast<int>(a.size());

    DiscretePath path;
    path.params = p;
    path.points.resize(N + 1);
    for (int k = 0; k <= N; ++k) path.points[k] = a + (double(k) / N) * (b - a);
    if (iters_out) *iters_out = 0;
    if (N == 1) return path;  // no interior nodes

    const int M = N - 1;
    std::vector<Vec> r = euler_lagrange_residual(path, U);
    double rn = sup_norm(r);
    std::vector<Mat> D(M);
    Vec e, col(d);

    int it = 0;
    for (; it < max_iter && rn > tol; ++it) {
        for (int k = 0; k < M; ++k)
            D[k] = (2.0 / h) * Mat::Identity(d, d) - h * U.dense_hessian(path.points[k + 1]);
        std::vector<Vec> rhs(M);
        for (int k = 0; k < M; ++k) rhs[k] = -r[k];
        std::vector<Vec> delta = block_thomas(D, rhs, h);

        // Damped update: halve the step while the residual grows.
        double step = 1.0;
        std::vector<Vec> trial(M);
        for (int bt = 0; bt < 30; ++bt) {
            DiscretePath cand = path;
            for (int k = 0; k < M; ++k) cand.points[k + 1] = path.points[k + 1] + step * delta[k];
            std::vector<Vec> rc = euler_lagrange_residual(cand, U);
            const double rcn = sup_norm(rc);
            if (rcn < rn || rcn <= tol) {
                path = std::move(cand);
                r = std::move(rc);
                rn = rcn;
                break;
            }
            step *= 0.5;
            if (bt == 29) {
                // Stalled Newton: fall back to a gradient-descent step on S_h
                // (the residual is the interior gradient of the action sum).
                double alpha = h;  // scales against the 2/h diagonal
                for (int gd = 0; gd < 40; ++gd) {
                    DiscretePath gcand = path;
                    for (int k = 0; k < M; ++k) gcand.points[k + 1] = path.points[k + 1] - alpha * r[k];
                    std::vector<Vec> rg = euler_lagrange_residual(gcand, U);
                    if (sup_norm(rg) < rn) {
                        path = std::move(gcand);
                        r = std::move(rg);
                        rn = sup_norm(r);
                        break;
                    }
                    alpha *= 0.5;
                }
            }
        }
    }
    if (rn > tol)
        throw bvp_failure("solve_discrete_bvp: no convergence (residual " + std::to_string(rn) + ")", rn);
    if (iters_out) *iters_out = it;
    return path;
}

PhiResult phi_same_endpoint(const Vec& x, const Vec& y, const Vec& v, const IntegratorParams& p,
                            const Potential& U) {
    const double h = p.h();
    Trajectory fwd = verlet_flow({x, v}, p, U);
    const Vec& b = fwd.end_position();

    PhiResult res;
    res.path = solve_discrete_bvp(y, b, p, U, 1e-10, 100, &res.newton_iters);
    Vec g0 = U.gradient(res.path.points[0]);
    res.u = (res.path.points[1] - res.path.points[0]) / h + 0.5 * h * g0;

    DerivativeFlow from_x = derivative_flow({x, v}, p, U);
    DerivativeFlow from_y = derivative_flow({y, res.u}, p, U);
    Eigen::PartialPivLU<Mat> lu_y(from_y.d2q);
    res.jac = lu_y.solve(from_x.d2q);
    Eigen::PartialPivLU<Mat> lu_x(from_x.d2q);
    auto log_abs_det = [](const Eigen::PartialPivLU<Mat>& lu) {
        double s = 0.0;
        const auto& m = lu.matrixLU();
        for (int i = 0; i < m.rows(); ++i) s += std::log(std::abs(m(i, i)));
        return s;
    };
    const double ld_y = log_abs_det(lu_y);
    if (!std::isfinite(ld_y))
        throw bvp_failure("phi_same_endpoint: singular D2 q_T(y, u)", 0.0);
    res.logdet = log_abs_det(lu_x) - ld_y;

    std::vector<Vec> r = euler_lagrange_residual(res.path, U);
    for (const auto& rr : r) res.residual = std::max(res.residual, rr.lpNorm<Eigen::Infinity>());
    return res;
}

PhiResult phi_exact_endpoint(const Vec& x, const Vec& v, const IntegratorParams& p,
                             const Potential& U, ExactFlowMode mode, int refinement) {
    Trajectory fwd = verlet_flow({x, v}, p, U);
    const Vec& b = fwd.end_position();
    const double tol = (mode == ExactFlowMode::analytic_gaussian) ? 1e-10 : 1e-8;

    Vec u = v;
    Vec F = exact_flow({x, u}, p.T, U, mode, p.N, refinement).x - b;
    double fn = F.norm();
    int it = 0;
    Mat J;
    for (; it < 100 && fn > tol; ++it) {
        J = exact_derivative_flow({x, u}, p.T, U, mode, p.N, refinement).d2q;
        Vec delta = Eigen::PartialPivLU<Mat>(J).solve(-F);
        double step = 1.0;
        for (int bt = 0; bt < 30; ++bt) {
            Vec cand = u + step * delta;
            Vec Fc = exact_flow({x, cand}, p.T, U, mode, p.N, refinement).x - b;
            const double fcn = Fc.norm();
            if (fcn < fn || fcn <= tol) {
                u = std::move(cand);
                F = std::move(Fc);
                fn = fcn;
                break;
            }
            step *= 0.5;
        }
    }
    if (fn > tol)
        throw bvp_failure("phi_exact_endpoint: shooting did not converge (|F| " + std::to_string(fn) + ")",
                          fn);

    PhiResult res;
    res.u = u;
    res.newton_iters = it;
    res.residual = fn;
    DerivativeFlow exact = exact_derivative_flow({x, u}, p.T, U, mode, p.N, refinement);
    DerivativeFlow tilde = derivative_flow({x, v}, p, U);
    Eigen::PartialPivLU<Mat> lu_e(exact.d2q);
    res.jac = lu_e.solve(tilde.d2q);
    Eigen::PartialPivLU<Mat> lu_t(tilde.d2q);
    auto log_abs_det = [](const Eigen::PartialPivLU<Mat>& lu) {
        double s = 0.0;
        const auto& m = lu.matrixLU();
        for (int i = 0; i < m.rows(); ++i) s += std::log(std::abs(m(i, i)));
        return s;
    };
    res.logdet = log_abs_det(lu_t) - log_abs_det(lu_e);
    return res;
}

}  // namespace uhmc
