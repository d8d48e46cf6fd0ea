#include "uhmc/validation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "uhmc/bounds.hpp"
#include "uhmc/metrics.hpp"
#include "uhmc/variational.hpp"

namespace uhmc {
namespace {

double op_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

std::string dump(const char* label, const Vec& v) {
    std::ostringstream os;
    os << label << "=[";
    for (int i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "]";
    return os.str();
}

struct Recorder {
    InequalityCheckResult res;
    // small absolute + relative allowance for solver tolerance and roundoff
    double tol_rel = 1e-9;

    explicit Recorder(std::string name) { res.name = std::move(name); }

    void record(double lhs, double rhs, const std::function<std::string()>& context) {
        ++res.checked;
        const double margin = rhs + tol_rel * (1.0 + std::abs(rhs)) - lhs;
        res.worst_margin = std::min(res.worst_margin, margin);
        if (margin < 0.0) {
            ++res.violations;
            if (res.counterexample.empty()) {
                std::ostringstream os;
                os << context() << " lhs=" << lhs << " rhs=" << rhs;
                res.counterexample = os.str();
            }
        }
    }
    void skip() { ++res.skipped; }
};

// Max over the position interpolant, sampled at knots and interior points.
double max_interp_norm(const Trajectory& traj, int per_cell) {
    double m = 0.0;
    const double h = traj.params.h();
    for (int k = 0; k < traj.params.N; ++k)
        for (int j = 0; j < per_cell; ++j)
            m = std::max(m, interpolate(traj, k * h + j * h / per_cell).x.norm());
    m = std::max(m, traj.grid_positions.back().norm());
    return m;
}

double max_interp_diff(const Trajectory& a, const Trajectory& b, int per_cell) {
    double m = 0.0;
    const double h = a.params.h();
    for (int k = 0; k < a.params.N; ++k)
        for (int j = 0; j < per_cell; ++j) {
            const double t = k * h + j * h / per_cell;
            m = std::max(m, (interpolate(a, t).x - interpolate(b, t).x).norm());
        }
    m = std::max(m, (a.grid_positions.back() - b.grid_positions.back()).norm());
    return m;
}

// Verlet position error bound of the discretization analysis.
double verlet_error_rhs(double h, double T, double L, double L_H, double nx, double nv) {
    return h * h *
           (7.0 / 45.0 * L * nx + 1547.0 / 1800.0 * L * T * nv + 1.0 / 120.0 * L_H * nx * nx +
            3.0 / 10.0 * L_H * T * T * nv * nv);
}

// Derivative-flow error bound.
double verlet_deriv_error_rhs(double h, double T, double L, double L_H, double L_I, double nx,
                              double nv) {
    return h * h *
           (43.0 / 50.0 * L * T + 1183.0 / 4500.0 * L_H * T * nx + 1847.0 / 1250.0 * L_H * T * T * nv +
            (3.0 / 250.0 * L_H * L_H * T * T * T + 1.0 / 100.0 * L_I * T) * nx * nx +
            (54.0 / 125.0 * L_H * L_H * std::pow(T, 5) + 9.0 / 25.0 * L_I * T * T * T) * nv * nv);
}

// Exact-endpoint Phi distance bound (7/6 of the position error bound).
double phi_exact_distance_rhs(double h, double T, double L, double L_H, double nx, double nv) {
    return 7.0 / 6.0 * verlet_error_rhs(h, T, L, L_H, nx, nv);
}

// Exact-endpoint DPhi bound (before the min with 1/2).
double phi_exact_jac_rhs(double h, double T, double L, double L_H, double L_I, double nx, double nv) {
    return h * h *
           (43.0 / 45.0 * L + 1946.0 / 6075.0 * L_H * nx + 873707.0 / 486000.0 * L_H * T * nv +
            (121.0 / 5400.0 * L_H * L_H * T * T + 1.0 / 90.0 * L_I) * nx * nx +
            (121.0 / 150.0 * L_H * L_H * std::pow(T, 4) + 2.0 / 5.0 * L_I * T * T) * nv * nv);
}

}  // namespace

std::vector<InequalityCheckResult> check_general_inequalities(const Potential& U, const IntegratorParams& p,
                                                   const InequalitySuiteConfig& cfg) {
    const int d = U.dim();
    const double T = p.T, h = p.h();
    const double L = U.lip_grad(), L_H = U.lip_hess(), L_I = U.lip_third();
    const bool constraint = p.constraint_ok(L);
    const bool analytic = U.quadratic_curvature().has_value();
    const double h_ref = h / cfg.refinement;
    RngStream rng(cfg.seed, 0x11);

    Recorder apriori_q("apriori_position_bound");
    Recorder apriori_v("apriori_velocity_bound");
    Recorder apriori_pair("apriori_two_trajectory_bound");
    Recorder dflow_q("derivative_flow_position_bound");
    Recorder dflow_v("derivative_flow_velocity_bound");
    Recorder dflow_pair("derivative_flow_pair_bound");
    Recorder trap("trapezoid_rule_defect");
    Recorder verr("verlet_position_error_bound");
    Recorder derr("verlet_derivative_error_bound");
    Recorder phi1("phi_same_endpoint_distance_bound");
    Recorder dphi1("phi_same_endpoint_jacobian_bound");
    Recorder phi2("phi_exact_endpoint_distance_bound");
    Recorder dphi2("phi_exact_endpoint_jacobian_bound");
    Recorder phiinv("phi_inverse_composition");

    const double growth = 1.0 + L * (T * T + T * h);

    for (int t = 0; t < cfg.draws; ++t) {
        RngStream dr = rng.fork(t);
        const Vec x = cfg.input_scale * dr.gaussian_vec(d);
        const Vec v = dr.gaussian_vec(d);
        const Vec y = cfg.input_scale * dr.gaussian_vec(d);
        const Vec u = dr.gaussian_vec(d);
        auto ctx = [&] { return dump("x", x) + " " + dump("v", v) + " " + dump("y", y) + " " + dump("u", u); };

        // A priori bounds on the trajectory and its velocity.
        Trajectory tx = verlet_flow({x, v}, p, U);
        {
            const double cap = growth * std::max(x.norm(), (x + T * v).norm());
            apriori_q.record(max_interp_norm(tx, 4), cap, ctx);
            double mv = 0.0;
            for (const auto& w : tx.grid_velocities) mv = std::max(mv, w.norm());
            apriori_v.record(mv, v.norm() + L * T * cap, ctx);
            Trajectory ty = verlet_flow({y, u}, p, U);
            const double cap2 =
                growth * std::max((x - y).norm(), (x - y + T * (v - u)).norm());
            apriori_pair.record(max_interp_diff(tx, ty, 4), cap2, ctx);
        }

        // Derivative-flow a priori bounds (gated by the step-size constraint).
        if (constraint) {
            DerivativeFlow fx = derivative_flow({x, v}, p, U, true);
            double mq = 0.0, mv = 0.0;
            for (const auto& M : fx.per_grid_d2q) mq = std::max(mq, op_norm(M));
            for (const auto& M : fx.per_grid_d2v) mv = std::max(mv, op_norm(M));
            dflow_q.record(mq, 1.2 * T, ctx);
            dflow_v.record(mv, 1.2, ctx);
            DerivativeFlow fy = derivative_flow({y, u}, p, U, true);
            double md = 0.0;
            for (std::size_t i = 0; i < fx.per_grid_d2q.size(); ++i)
                md = std::max(md, op_norm(fx.per_grid_d2q[i] - fy.per_grid_d2q[i]));
            const double cap = L_H * 1.44 * T * T * T * growth *
                               std::max((x - y).norm(), (x - y + T * (v - u)).norm());
            dflow_pair.record(md, cap, ctx);
        } else {
            dflow_q.skip();
            dflow_v.skip();
            dflow_pair.skip();
        }

        // Trapezoidal-variant defect on scalar test integrands.
        {
            const double om = 0.5 + 4.5 * dr.uniform();
            const double ph = 2.0 * M_PI * dr.uniform();
            auto f = [&](double s) { return std::sin(om * s + ph); };
            const double exact =
                integrate_adaptive([&](double s) { return (T - s) * f(s); }, 0.0, T, 1e-13);
            double cells = 0.0;
            for (int k = 0; k < p.N; ++k) {
                const double tk = k * h;
                cells += 0.5 * h * (T - tk - 0.5 * h) * (f(tk) + f(tk + h));
            }
            const double B1 = om, B2 = om * om;
            trap.record(std::abs(exact - cells), h * h / 12.0 * (B2 * T * T + B1 * T),
                        [&] { return "omega=" + std::to_string(om) + " phase=" + std::to_string(ph); });
        }

        if (!constraint) {
            verr.skip();
            derr.skip();
            phi1.skip();
            dphi1.skip();
            phi2.skip();
            dphi2.skip();
            phiinv.skip();
            continue;
        }

        // Verlet position error against the exact flow.
        {
            double lhs = 0.0, slack = 0.0;
            if (analytic) {
                const double om2 = *U.quadratic_curvature();
                const double w = std::sqrt(om2);
                for (int k = 0; k <= 4 * p.N; ++k) {
                    const double s = T * k / (4.0 * p.N);
                    const Vec qs = (om2 == 0.0) ? Vec(x + s * v)
                                                : Vec(std::cos(w * s) * x + std::sin(w * s) / w * v);
                    lhs = std::max(lhs, (interpolate(tx, s).x - qs).norm());
                }
            } else {
                IntegratorParams fine(T, p.N * cfg.refinement);
                Trajectory tref = verlet_flow({x, v}, fine, U);
                for (int k = 0; k <= fine.N; ++k) {
                    const double s = std::min(k * fine.h(), T);
                    lhs = std::max(lhs, (interpolate(tx, s).x - tref.grid_positions[k]).norm());
                }
                slack = verlet_error_rhs(h_ref, T, L, L_H, x.norm(), v.norm());
            }
            verr.record(lhs, verlet_error_rhs(h, T, L, L_H, x.norm(), v.norm()) + slack, ctx);
        }

        // Derivative-flow error against the exact flow, at the grid knots.
        {
            DerivativeFlow coarse = derivative_flow({x, v}, p, U, true);
            double lhs = 0.0, slack = 0.0;
            if (analytic) {
                const double om2 = *U.quadratic_curvature();
                const double w = std::sqrt(om2);
                for (int k = 0; k <= p.N; ++k) {
                    const double s = k * h;
                    const Mat exact = (om2 == 0.0) ? Mat(s * Mat::Identity(d, d))
                                                   : Mat(std::sin(w * s) / w * Mat::Identity(d, d));
                    lhs = std::max(lhs, op_norm(coarse.per_grid_d2q[k] - exact));
                }
            } else {
                IntegratorParams fine(T, p.N * cfg.refinement);
                DerivativeFlow ref = derivative_flow({x, v}, fine, U, true);
                for (int k = 0; k <= p.N; ++k)
                    lhs = std::max(lhs, op_norm(coarse.per_grid_d2q[k] -
                                                ref.per_grid_d2q[static_cast<std::size_t>(k) *
                                                                 cfg.refinement]));
                slack = verlet_deriv_error_rhs(h_ref, T, L, L_H, L_I, x.norm(), v.norm());
            }
            derr.record(lhs, verlet_deriv_error_rhs(h, T, L, L_H, L_I, x.norm(), v.norm()) + slack, ctx);
        }

        // Same-endpoint Phi bounds.
        {
            PhiResult phi = phi_same_endpoint(x, y, v, p, U);
            phi1.record(T * (phi.u - v).norm(), 1.5 * (x - y).norm(), ctx);
            dphi1.record(op_norm(phi.jac - Mat::Identity(d, d)),
                         0.5 * std::min(1.0, 11.0 * L_H * T * T * (x - y).norm()), ctx);
            PhiResult back = phi_same_endpoint(y, x, phi.u, p, U);
            phiinv.record((back.u - v).norm(), 1e-8 * (1.0 + v.norm()), ctx);
        }

        // Exact-endpoint Phi bounds.
        {
            const ExactFlowMode mode =
                analytic ? ExactFlowMode::analytic_gaussian : ExactFlowMode::reference_fine_step;
            PhiResult phi = phi_exact_endpoint(x, v, p, U, mode, cfg.refinement);
            double slack_d = 0.0, slack_j = 0.0;
            if (!analytic) {
                slack_d = phi_exact_distance_rhs(h_ref, T, L, L_H, x.norm(), phi.u.norm());
                slack_j = 1.5 * phi_exact_jac_rhs(h_ref, T, L, L_H, L_I, x.norm(), phi.u.norm());
            }
            phi2.record(T * (phi.u - v).norm(),
                        phi_exact_distance_rhs(h, T, L, L_H, x.norm(), v.norm()) + slack_d, ctx);
            dphi2.record(op_norm(phi.jac - Mat::Identity(d, d)),
                         std::min(0.5, phi_exact_jac_rhs(h, T, L, L_H, L_I, x.norm(), v.norm())) +
                             slack_j,
                         ctx);
        }
    }

    return {apriori_q.res, apriori_v.res, apriori_pair.res, dflow_q.res, dflow_v.res,
            dflow_pair.res, trap.res,     verr.res,         derr.res,   phi1.res,
            dphi1.res,     phi2.res,      dphi2.res,        phiinv.res};
}

namespace {

// Blockwise view of an (n k) x (n k) matrix.
Mat block_of(const Mat& M, int i, int j, int k) { return M.block(i * k, j * k, k, k); }

double sum_block_norms(const Vec& x, const Vec& y, int n, int k, double T, const Vec& u,
                       const Vec& v) {
    double s = 0.0;
    for (int l = 0; l < n; ++l) {
        const double a = (x.segment(l * k, k) - y.segment(l * k, k)).norm();
        const double b = (x.segment(l * k, k) - y.segment(l * k, k) +
                          T * (u.segment(l * k, k) - v.segment(l * k, k)))
                             .norm();
        s += std::max(a, b);
    }
    return s;
}

}  // namespace

std::vector<InequalityCheckResult> check_mean_field_inequalities(const MeanFieldPotential& mfp,
                                                      const IntegratorParams& p,
                                                      const InequalitySuiteConfig& cfg) {
    const int n = mfp.n, k = mfp.k, d = n * k;
    const double T = p.T, h = p.h();
    const double Le = mfp.L_eff(), LHe = mfp.L_H_eff(), LIe = mfp.L_I_eff();
    const double L2 = mfp.L() + 2.0 * mfp.eps * mfp.Lt();  // diagonal-block constant
    const bool constraint = Le * (T * T + T * h) <= 1.0 / 6.0 + 1e-15;
    const double h_ref = h / cfg.refinement;
    const Potential U = mf_assemble(mfp);
    RngStream rng(cfg.seed, 0x22);

    Recorder ap_q("mf_apriori_position_sum");
    Recorder ap_v("mf_apriori_velocity_sum");
    Recorder ap_pair("mf_apriori_two_trajectory_sum");
    Recorder ap_qi("mf_apriori_position_per_particle");
    Recorder ap_vi("mf_apriori_velocity_per_particle");
    Recorder df_col("mf_derivative_flow_column_sum");
    Recorder df_row("mf_derivative_flow_row_sum");
    Recorder df_vel("mf_derivative_flow_velocity_sum");
    Recorder df_pair("mf_derivative_flow_pair_double_sum");
    Recorder verr("mf_verlet_position_error_sum");
    Recorder derr("mf_verlet_derivative_error_double_sum");
    Recorder phi1("mf_phi_distance_l1");
    Recorder dphi1_op("mf_phi_jacobian_operator");
    Recorder dphi1_f("mf_phi_jacobian_frobenius");
    Recorder phi2("mf_phi_exact_distance_l1");
    Recorder dphi2_f("mf_phi_exact_jacobian_frobenius");

    const double growth = 1.0 + Le * (T * T + T * h);

    auto seg_norms = [&](const Vec& z) {
        Vec out(n);
        for (int l = 0; l < n; ++l) out[l] = z.segment(l * k, k).norm();
        return out;
    };
    auto mf_verr_rhs = [&](double hh, const Vec& nx, const Vec& nv) {
        return hh * hh *
               (Le * nx.sum() + Le * T * nv.sum() + LHe * nx.squaredNorm() +
                LHe * T * nv.squaredNorm());
    };
    auto mf_derr_rhs = [&](double hh, const Vec& nx, const Vec& nv) {
        return hh * hh *
               (Le * T * n + LHe * T * nx.sum() + 2.0 * LHe * T * T * nv.sum() +
                (2.0 * LHe * LHe * T * T * T + LIe * T) * nx.squaredNorm() +
                (2.0 * LHe * LHe * std::pow(T, 5) + LIe * T * T * T) * nv.squaredNorm());
    };
    auto mf_phi2_rhs = [&](double hh, const Vec& nx, const Vec& nv) {
        return 72.0 / 65.0 * hh * hh *
               (Le * nx.sum() + Le * T * nv.sum() + LHe * nx.squaredNorm() +
                LHe * T * nv.squaredNorm());
    };
    auto mf_dphi2_rhs = [&](double hh, const Vec& nx, const Vec& nv) {
        return std::sqrt(double(k)) * hh * hh *
               (Le * T * n + LHe * T * nx.sum() + 3.0 * LHe * T * T * nv.sum() +
                (LIe * T + 2.0 * LHe * LHe * T * T * T) * nx.squaredNorm() +
                (LIe * T * T * T + 3.0 * LHe * LHe * std::pow(T, 5)) * nv.squaredNorm());
    };

    for (int t = 0; t < cfg.draws; ++t) {
        RngStream dr = rng.fork(t);
        const Vec x = cfg.input_scale * dr.gaussian_vec(d);
        const Vec v = dr.gaussian_vec(d);
        const Vec y = cfg.input_scale * dr.gaussian_vec(d);
        const Vec u = dr.gaussian_vec(d);
        const Vec nx = seg_norms(x), nv = seg_norms(v);
        auto ctx = [&] { return dump("x", x) + " " + dump("v", v); };

        Trajectory tx = verlet_flow({x, v}, p, U);
        Trajectory ty = verlet_flow({y, u}, p, U);

        // Summed and per-particle a priori estimates.
        {
            // per-particle maxima over knots and quarter-cell samples
            Eigen::MatrixXd qmax = Eigen::MatrixXd::Zero(n, 1), vmax = Eigen::MatrixXd::Zero(n, 1);
            Eigen::VectorXd dmax = Eigen::VectorXd::Zero(n);
            for (int kk = 0; kk <= 4 * p.N; ++kk) {
                const double s = T * kk / (4.0 * p.N);
                const Vec qs = interpolate(tx, s).x;
                const Vec qs2 = interpolate(ty, s).x;
                for (int l = 0; l < n; ++l) {
                    qmax(l, 0) = std::max(qmax(l, 0), qs.segment(l * k, k).norm());
                    dmax[l] = std::max(dmax[l], (qs.segment(l * k, k) - qs2.segment(l * k, k)).norm());
                }
            }
            for (const auto& w : tx.grid_velocities)
                for (int l = 0; l < n; ++l) vmax(l, 0) = std::max(vmax(l, 0), w.segment(l * k, k).norm());

            double base = 0.0;
            for (int l = 0; l < n; ++l)
                base += std::max(nx[l], (x.segment(l * k, k) + T * v.segment(l * k, k)).norm());
            ap_q.record(qmax.sum(), growth * base, ctx);
            ap_v.record(vmax.sum(), nv.sum() + Le * T * growth * base, ctx);
            ap_pair.record(dmax.sum(), growth * sum_block_norms(x, y, n, k, T, v, u), ctx);

            // per-particle versions with the cross-particle correction
            const double gi = 1.0 + L2 * (T * T + T * h);
            for (int i = 0; i < n; ++i) {
                double cross = 0.0;
                for (int l = 0; l < n; ++l)
                    if (l != i) cross += qmax(l, 0);
                const double cap_i =
                    gi * std::max(nx[i], (x.segment(i * k, k) + T * v.segment(i * k, k)).norm()) +
                    2.0 * mfp.eps * mfp.Lt() * (T * T + T * h) / n * cross;
                ap_qi.record(qmax(i, 0), cap_i, ctx);
                const double cap_vi =
                    nv[i] +
                    2.0 * mfp.eps * mfp.Lt() * T / n * (1.0 + L2 * (T * T + T * h)) * cross +
                    L2 * T * (1.0 + L2 * (T * T + T * h)) *
                        std::max(nx[i], (x.segment(i * k, k) + T * v.segment(i * k, k)).norm());
                ap_vi.record(vmax(i, 0), cap_vi, ctx);
            }
        }

        if (!constraint) {
            df_col.skip();
            df_row.skip();
            df_vel.skip();
            df_pair.skip();
            verr.skip();
            derr.skip();
            phi1.skip();
            dphi1_op.skip();
            dphi1_f.skip();
            phi2.skip();
            dphi2_f.skip();
            continue;
        }

        // Blockwise derivative-flow bounds.
        {
            DerivativeFlow fx = derivative_flow({x, v}, p, U, true);
            DerivativeFlow fy = derivative_flow({y, u}, p, U, true);
            Eigen::MatrixXd colsum = Eigen::MatrixXd::Zero(n, n);  // (l, j): max_t |d q^l / d v^j|
            Eigen::MatrixXd velsum = Eigen::MatrixXd::Zero(n, n);
            for (std::size_t g = 0; g < fx.per_grid_d2q.size(); ++g)
                for (int l = 0; l < n; ++l)
                    for (int j = 0; j < n; ++j) {
                        colsum(l, j) =
                            std::max(colsum(l, j), op_norm(block_of(fx.per_grid_d2q[g], l, j, k)));
                        velsum(l, j) =
                            std::max(velsum(l, j), op_norm(block_of(fx.per_grid_d2v[g], l, j, k)));
                    }
            for (int j = 0; j < n; ++j) {
                df_col.record(colsum.col(j).sum(), 1.2 * T, ctx);
                df_row.record(colsum.row(j).sum(), 1.4 * T, ctx);
                df_vel.record(velsum.col(j).sum(), 1.2, ctx);
            }
            double pairsum = 0.0;
            Eigen::MatrixXd pairmax = Eigen::MatrixXd::Zero(n, n);
            for (std::size_t g = 0; g < fx.per_grid_d2q.size(); ++g)
                for (int l = 0; l < n; ++l)
                    for (int j = 0; j < n; ++j)
                        pairmax(l, j) = std::max(
                            pairmax(l, j), op_norm(block_of(fx.per_grid_d2q[g], l, j, k) -
                                                   block_of(fy.per_grid_d2q[g], l, j, k)));
            pairsum = pairmax.sum();
            df_pair.record(pairsum,
                           42.0 / 25.0 * LHe * T * T * T * growth *
                               sum_block_norms(x, y, n, k, T, v, u),
                           ctx);
        }

        // Discretization errors against the fine-step reference.
        IntegratorParams fine(T, p.N * cfg.refinement);
        {
            Trajectory tref = verlet_flow({x, v}, fine, U);
            Eigen::VectorXd emax = Eigen::VectorXd::Zero(n);
            for (int g = 0; g <= fine.N; ++g) {
                const double s = std::min(g * fine.h(), T);
                const Vec diff = interpolate(tx, s).x - tref.grid_positions[g];
                for (int l = 0; l < n; ++l)
                    emax[l] = std::max(emax[l], diff.segment(l * k, k).norm());
            }
            verr.record(emax.sum(), mf_verr_rhs(h, nx, nv) + mf_verr_rhs(h_ref, nx, nv), ctx);

            DerivativeFlow coarse = derivative_flow({x, v}, p, U, true);
            DerivativeFlow ref = derivative_flow({x, v}, fine, U, true);
            Eigen::MatrixXd dmax = Eigen::MatrixXd::Zero(n, n);
            for (int g = 0; g <= p.N; ++g) {
                const Mat diff = coarse.per_grid_d2q[g] -
                                 ref.per_grid_d2q[static_cast<std::size_t>(g) * cfg.refinement];
                for (int l = 0; l < n; ++l)
                    for (int j = 0; j < n; ++j)
                        dmax(l, j) = std::max(dmax(l, j), op_norm(block_of(diff, l, j, k)));
            }
            derr.record(dmax.sum(), mf_derr_rhs(h, nx, nv) + mf_derr_rhs(h_ref, nx, nv), ctx);
        }

        // Same-endpoint Phi bounds in the l1-of-blocks metric.
        {
            PhiResult phi = phi_same_endpoint(x, y, v, p, U);
            double phisum = 0.0;
            for (int l = 0; l < n; ++l)
                phisum += (phi.u.segment(l * k, k) - v.segment(l * k, k)).norm();
            double xysum = 0.0;
            for (int l = 0; l < n; ++l)
                xysum += (x.segment(l * k, k) - y.segment(l * k, k)).norm();
            phi1.record(T * phisum, 1.5 * xysum, ctx);
            dphi1_op.record(op_norm(phi.jac - Mat::Identity(d, d)), 0.5, ctx);
            dphi1_f.record((phi.jac - Mat::Identity(d, d)).norm(),
                           49.0 / 8.0 * std::sqrt(double(k)) * LHe * T * T * xysum, ctx);
        }

        // Exact-endpoint Phi bounds (reference flow, slack from the same
        // bounds at the fine step).
        {
            PhiResult phi =
                phi_exact_endpoint(x, v, p, U, ExactFlowMode::reference_fine_step, cfg.refinement);
            const Vec nu = seg_norms(phi.u);
            double phisum = 0.0;
            for (int l = 0; l < n; ++l)
                phisum += (phi.u.segment(l * k, k) - v.segment(l * k, k)).norm();
            phi2.record(T * phisum, mf_phi2_rhs(h, nx, nv) + mf_phi2_rhs(h_ref, nx, nu), ctx);
            dphi2_f.record(T * (phi.jac - Mat::Identity(d, d)).norm(),
                           mf_dphi2_rhs(h, nx, nv) + 1.5 * mf_dphi2_rhs(h_ref, nx, nu), ctx);
        }
    }

    return {ap_q.res,   ap_v.res,    ap_pair.res, ap_qi.res, ap_vi.res, df_col.res,
            df_row.res, df_vel.res,  df_pair.res, verr.res,  derr.res,  phi1.res,
            dphi1_op.res, dphi1_f.res, phi2.res,  dphi2_f.res};
}

InequalityCheckResult check_overlap_ordering(int draws, std::uint64_t seed) {
    Recorder rec("overlap_pinsker_ordering");
    rec.tol_rel = 1e-7;
    RngStream rng(seed, 0x33);
    for (int t = 0; t < draws; ++t) {
        RngStream dr = rng.fork(t);
        const double mu = 1.2 * (dr.uniform() - 0.5);
        const double sig = 1.0 + 0.9 * (dr.uniform() - 0.5);  // |sig - 1| <= 0.45 < 1/2
        // Phi(v) = mu + sig v
        const double tv = tv_gaussian_1d(0.0, 1.0, mu, sig);
        PhiMapView map;
        map.phi = [mu, sig](const Vec& v) { return Vec((sig * v).array() + mu); };
        map.jac = [sig](const Vec&) { return Mat::Constant(1, 1, sig); };
        const double kl = kl_phi_numeric(map, 1);
        // E[|Phi(xi)-xi|^2 + 2 (sig-1)^2] = mu^2 + 3 (sig-1)^2
        const double moment_cap = std::sqrt(mu * mu + 3.0 * (sig - 1.0) * (sig - 1.0));
        auto ctx = [&] { return "mu=" + std::to_string(mu) + " sig=" + std::to_string(sig); };
        rec.record(tv, std::sqrt(2.0 * kl), ctx);
        rec.record(std::sqrt(2.0 * kl), moment_cap, ctx);
    }
    return rec.res;
}

namespace {

// Linear transition maps X' = A x + B xi of the uHMC kernel for a quadratic
// potential (constant Hessian).
void linear_chain_matrices(const Potential& U, const IntegratorParams& p, Mat& A, Mat& B) {
    const int d = U.dim();
    const Mat H = U.dense_hessian(Vec::Zero(d));
    const double h = p.h();
    Mat Aq = Mat::Identity(d, d), Av = Mat::Zero(d, d);
    Mat Bq = Mat::Zero(d, d), Bv = Mat::Identity(d, d);
    for (int s = 0; s < p.N; ++s) {
        const Mat Pq = H * Aq, PqB = H * Bq;
        Mat Aq1 = Aq + h * Av - 0.5 * h * h * Pq;
        Mat Bq1 = Bq + h * Bv - 0.5 * h * h * PqB;
        Av -= 0.5 * h * (Pq + H * Aq1);
        Bv -= 0.5 * h * (PqB + H * Bq1);
        Aq = std::move(Aq1);
        Bq = std::move(Bq1);
    }
    A = Aq;
    B = Bq;
}

// TV between N(m1, Sigma) and N(m2, Sigma), Sigma = B B^T.
double tv_equal_cov_gaussian(const Mat& B, const Vec& dm) {
    Eigen::LLT<Mat> llt(B * B.transpose());
    const Vec z = llt.matrixL().solve(dm);
    return 2.0 * normal_cdf(0.5 * z.norm()) - 1.0;
}

}  // namespace

InequalityCheckResult check_regularization_gaussian(int dim, double omega2, const IntegratorParams& p,
                                               int draws, std::uint64_t seed) {
    Recorder rec("kernel_regularization_gaussian");
    const Potential U = make_gaussian(dim, omega2);
    Mat A, B;
    linear_chain_matrices(U, p, A, B);
    const double reg = regularization_constant(p.T, dim, U.lip_hess());
    RngStream rng(seed, 0x44);
    for (int t = 0; t < draws; ++t) {
        RngStream dr = rng.fork(t);
        Vec x = dr.gaussian_vec(dim);
        Vec y = x + dr.gaussian_vec(dim).normalized() * dr.uniform();  // |x - y| <= 1
        const double tv = tv_equal_cov_gaussian(B, Vec(A * (x - y)));
        rec.record(tv, reg * (x - y).norm(),
                   [&] { return dump("x", x) + " " + dump("y", y); });
    }
    return rec.res;
}

InequalityCheckResult check_regularization_mean_field_gaussian(const MeanFieldPotential& mfp,
                                                          const IntegratorParams& p, int draws,
                                                          std::uint64_t seed) {
    Recorder rec("mf_kernel_regularization");
    const Potential U = mf_assemble(mfp);
    const int d = U.dim();
    Mat A, B;
    linear_chain_matrices(U, p, A, B);
    const double T2 = p.T * p.T;
    const double LHe = mfp.L_H_eff();
    const double reg = 1.5 * std::sqrt(1.0 / T2 + 34.0 * mfp.k * LHe * LHe * T2 * T2);
    RngStream rng(seed, 0x55);
    for (int t = 0; t < draws; ++t) {
        RngStream dr = rng.fork(t);
        Vec x = dr.gaussian_vec(d);
        Vec y = x + dr.gaussian_vec(d).normalized() * dr.uniform();
        const double tv = tv_equal_cov_gaussian(B, Vec(A * (x - y)));
        rec.record(tv, reg * l1_block_distance(x, y, mfp.n, mfp.k),
                   [&] { return dump("x", x) + " " + dump("y", y); });
    }
    return rec.res;
}

}  // namespace uhmc
