#include "uhmc/coupling.hpp"

#include <Eigen/LU>
#include <cmath>

#include "uhmc/bounds.hpp"

namespace uhmc {
namespace {

constexpr int kResidualCap = 10000;

double log_abs_det(const Mat& m) {
    Eigen::PartialPivLU<Mat> lu(m);
    double s = 0.0;
    for (int i = 0; i < m.rows(); ++i) s += std::log(std::abs(lu.matrixLU()(i, i)));
    return s;
}

// log of phi(Phi(v)) |det DPhi(v)| / phi(v)
double log_accept_ratio(const Vec& v, const Vec& phi_v, double logdet) {
    return -0.5 * phi_v.squaredNorm() + 0.5 * v.squaredNorm() + logdet;
}

// Inverse of the exact-endpoint map: v' with Verlet endpoint of (x, v') equal
// to the exact-flow endpoint of (x, w); logdet is log |det DPhi^{-1}(w)|.
struct ExactInverse {
    Vec u;
    double logdet;
};

ExactInverse phi_exact_endpoint_inverse(const Vec& x, const Vec& w, const IntegratorParams& p,
                                        const Potential& U, ExactFlowMode mode, int refinement) {
    const Vec b = exact_flow({x, w}, p.T, U, mode, p.N, refinement).x;
    DiscretePath path = solve_discrete_bvp(x, b, p, U);
    const double h = p.h();
    Vec g0 = U.gradient(path.points[0]);
    ExactInverse out;
    out.u = (path.points[1] - path.points[0]) / h + 0.5 * h * g0;
    const Mat d2q_exact = exact_derivative_flow({x, w}, p.T, U, mode, p.N, refinement).d2q;
    const Mat d2q_tilde = derivative_flow({x, out.u}, p, U).d2q;
    out.logdet = log_abs_det(d2q_exact) - log_abs_det(d2q_tilde);
    return out;
}

}  // namespace

CouplingOutcome one_shot_step(const Vec& x, const Vec& y, const ChainConfig& cfg, RngStream& rng,
                              OneShotMode mode, ExactFlowMode exact_mode) {
    cfg.check();
    const Potential& U = cfg.potential;
    const IntegratorParams& p = cfg.params;
    const int d = static_cast<int>(x.size());
    const Vec xi = rng.gaussian_vec(d);

    Trajectory fwd = verlet_flow({x, xi}, p, U);
    CouplingOutcome out;
    out.x_next = fwd.end_position();

    if (mode == OneShotMode::same_endpoint && x == y) {
        // Phi is the identity; the chains stay merged.
        out.y_next = out.x_next;
        out.met = true;
        out.alpha = 1.0;
        out.branch = CouplingBranch::accepted_phi;
        out.eta = xi;
        return out;
    }

    PhiResult phi = (mode == OneShotMode::same_endpoint)
                        ? phi_same_endpoint(x, y, xi, p, U)
                        : phi_exact_endpoint(x, xi, p, U, exact_mode);
    out.alpha = std::min(1.0, std::exp(log_accept_ratio(xi, phi.u, phi.logdet)));

    if (rng.uniform() <= out.alpha) {
        // eta = Phi(xi): the endpoints coincide by the defining identity of
        // Phi, so Y' is assigned X' to make the coalescence exact.
        out.y_next = out.x_next;
        out.met = true;
        out.branch = CouplingBranch::accepted_phi;
        out.eta = phi.u;
#ifndef NDEBUG
        const Vec replay = (mode == OneShotMode::same_endpoint)
                               ? verlet_flow({y, phi.u}, p, U).end_position()
                               : exact_flow({x, phi.u}, p.T, U, exact_mode, p.N).x;
        if ((replay - out.x_next).norm() > 1e-9 * (1.0 + out.x_next.norm()))
            throw std::logic_error("one_shot_step: replay identity violated");
#endif
        return out;
    }

    // Residual branch: propose w ~ N(0, I), accept with probability
    // 1 - min(phi(Phi^{-1}(w)) |det DPhi^{-1}(w)| / phi(w), 1).
    out.branch = CouplingBranch::residual;
    for (int attempt = 1; attempt <= kResidualCap; ++attempt) {
        const Vec w = rng.gaussian_vec(d);
        double lr;
        if (mode == OneShotMode::same_endpoint) {
            PhiResult inv = phi_same_endpoint(y, x, w, p, U);
            lr = log_accept_ratio(w, inv.u, inv.logdet);
        } else {
            ExactInverse inv = phi_exact_endpoint_inverse(x, w, p, U, exact_mode, 64);
            lr = log_accept_ratio(w, inv.u, inv.logdet);
        }
        if (rng.uniform() >= std::min(1.0, std::exp(lr))) {
            out.residual_draws = attempt;
            out.eta = w;
            out.y_next = (mode == OneShotMode::same_endpoint)
                             ? verlet_flow({y, w}, p, U).end_position()
                             : exact_flow({x, w}, p.T, U, exact_mode, p.N).x;
            out.met = false;
            return out;
        }
    }
    throw residual_sampling_failure(kResidualCap);
}

CouplingOutcome synchronous_step(const Vec& x, const Vec& y, const ChainConfig& cfg, RngStream& rng) {
    const int d = static_cast<int>(x.size());
    const Vec xi = rng.gaussian_vec(d);
    CouplingOutcome out;
    out.x_next = verlet_flow({x, xi}, cfg.params, cfg.potential).end_position();
    if (x == y) {
        out.y_next = out.x_next;
        out.met = true;
    } else {
        out.y_next = verlet_flow({y, xi}, cfg.params, cfg.potential).end_position();
        out.met = false;
    }
    out.alpha = 0.0;
    out.branch = CouplingBranch::residual;
    out.eta = xi;
    return out;
}

ThresholdPolicy ThresholdPolicy::for_potential(const Potential& U, const IntegratorParams& p) {
    ThresholdPolicy policy;
    const double reg = regularization_constant(p.T, U.dim(), U.lip_hess());
    policy.threshold = std::min(0.1, 1.0 / (3.0 * reg));
    return policy;
}

CouplingTimeRecord coupled_meeting_time(const Vec& x0, const Vec& y0, const ChainConfig& cfg,
                                        const RngStream& rng, const ThresholdPolicy& policy) {
    CouplingTimeRecord rec;
    auto dist = [&](const Vec& a, const Vec& b) {
        return policy.metric == CouplingMetric::euclidean
                   ? (a - b).norm()
                   : l1_block_distance(a, b, policy.blocks_n, policy.blocks_k);
    };
    Vec x = x0, y = y0;
    if (x == y) {
        rec.met = true;
        rec.tau = 0;
        return rec;
    }
    if (policy.record_trace) rec.trace.push_back(dist(x, y));
    int consecutive_oneshot = 0;
    for (int n = 1; n <= policy.max_steps; ++n) {
        RngStream sr = rng.fork(static_cast<std::uint64_t>(n));
        const double dn = dist(x, y);
        CouplingOutcome outcome;
        if (dn <= policy.threshold && consecutive_oneshot < policy.max_oneshot_attempts) {
            outcome = one_shot_step(x, y, cfg, sr);
            ++rec.oneshot_attempts;
            ++consecutive_oneshot;
        } else {
            outcome = synchronous_step(x, y, cfg, sr);
            ++rec.phase1_steps;
            consecutive_oneshot = 0;
        }
        x = outcome.x_next;
        y = outcome.y_next;
        if (policy.record_trace) rec.trace.push_back(dist(x, y));
        if (outcome.met || x == y) {
            rec.met = true;
            rec.tau = n;
            return rec;
        }
    }
    rec.met = false;
    rec.tau = policy.max_steps;
    return rec;
}

}  // namespace uhmc
