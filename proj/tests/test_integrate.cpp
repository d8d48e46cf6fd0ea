#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "uhmc/integrate.hpp"
#include "uhmc/rng.hpp"

using namespace uhmc;

namespace {
Vec vec1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}
}  // namespace

TEST_CASE("integrator params") {
    IntegratorParams p(0.35, 8);
    CHECK(p.N * p.h() == p.T);
    CHECK(p.constraint_ok(1.0));       // 1 * (0.1225 + 0.0153) < 1/6
    CHECK_FALSE(p.constraint_ok(2.0));
    CHECK_THROWS_AS(IntegratorParams(0.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(IntegratorParams(1.0, 0), std::invalid_argument);
}

TEST_CASE("one verlet step") {
    SUBCASE("free flight") {
        const Potential f = make_free(1);
        const PhaseState out = verlet_step({vec1(1.0), vec1(2.0)}, 0.1, f);
        CHECK(out.x[0] == doctest::Approx(1.2).epsilon(1e-15));
        CHECK(out.v[0] == 2.0);
    }
    SUBCASE("harmonic hand evaluation") {
        const Potential g = make_gaussian(1, 1.0);
        const PhaseState out = verlet_step({vec1(1.0), vec1(0.0)}, 0.1, g);
        CHECK(out.x[0] == doctest::Approx(0.995).epsilon(1e-15));
        CHECK(out.v[0] == doctest::Approx(-0.09975).epsilon(1e-13));
    }
    SUBCASE("a cached gradient saves one evaluation") {
        const Potential g = make_gaussian(1, 1.0);
        const Vec gx = g.gradient(vec1(1.0));
        g.reset_gradient_evals();
        Vec gout(1);
        verlet_step({vec1(1.0), vec1(0.0)}, 0.1, g, &gx, &gout);
        CHECK(g.gradient_evals() == 1);
        g.reset_gradient_evals();
        verlet_step({vec1(1.0), vec1(0.0)}, 0.1, g);
        CHECK(g.gradient_evals() == 2);
    }
    SUBCASE("time reversibility") {
        const Potential g = make_gaussian(1, 1.0);
        const PhaseState fwd = verlet_step({vec1(1.0), vec1(0.3)}, 0.1, g);
        const PhaseState back = verlet_step({fwd.x, -fwd.v}, 0.1, g);
        CHECK(std::abs(back.x[0] - 1.0) < 1e-12);
        CHECK(std::abs(-back.v[0] - 0.3) < 1e-12);
    }
}

TEST_CASE("verlet flow") {
    SUBCASE("free flight endpoint") {
        const Potential f = make_free(2);
        Vec x(2), v(2);
        x << 1.0, -2.0;
        v << 0.5, 0.25;
        const Trajectory traj = verlet_flow({x, v}, IntegratorParams(0.4, 5), f);
        CHECK((traj.end_position() - (x + 0.4 * v)).norm() < 1e-15);
    }
    SUBCASE("endpoint equals repeated single steps and the gradient count is N+1") {
        const Potential g = make_gaussian(1, 1.0);
        const IntegratorParams p(0.35, 8);
        g.reset_gradient_evals();
        const Trajectory traj = verlet_flow({vec1(1.0), vec1(0.2)}, p, g);
        CHECK(g.gradient_evals() == 9);
        PhaseState s{vec1(1.0), vec1(0.2)};
        for (int i = 0; i < 8; ++i) s = verlet_step(s, p.h(), g);
        CHECK(std::abs(traj.end_position()[0] - s.x[0]) < 1e-14);
        CHECK(std::abs(traj.end_velocity()[0] - s.v[0]) < 1e-14);
        // consecutive grid states satisfy the update exactly
        for (int k = 0; k < p.N; ++k) {
            const Vec& q0 = traj.grid_positions[k];
            const Vec& v0 = traj.grid_velocities[k];
            const Vec pred = q0 + p.h() * v0 - 0.5 * p.h() * p.h() * traj.grid_gradients[k];
            CHECK((pred - traj.grid_positions[k + 1]).norm() < 1e-12);
        }
    }
    SUBCASE("harmonic endpoint error is within the discretization bound") {
        const Potential g = make_gaussian(1, 1.0);
        const IntegratorParams p(0.35, 8);
        const Trajectory traj = verlet_flow({vec1(1.0), vec1(0.0)}, p, g);
        const double err = std::abs(traj.end_position()[0] - std::cos(0.35));
        const double rhs = p.h() * p.h() * (7.0 / 45.0);  // L=1, |x|=1, v=0
        CHECK(err <= rhs);
    }
    SUBCASE("doubling N quarters the endpoint error") {
        const Potential g = make_gaussian(1, 1.0);
        double prev = 0.0;
        for (int N : {8, 16, 32}) {
            const Trajectory traj = verlet_flow({vec1(1.0), vec1(0.4)}, IntegratorParams(0.35, N), g);
            const double err =
                std::abs(traj.end_position()[0] - oracle::harmonic_q(1.0, 0.35, 1.0, 0.4));
            if (prev > 0.0) {
                CHECK(prev / err > 3.6);
                CHECK(prev / err < 4.4);
            }
            prev = err;
        }
    }
    SUBCASE("blow-up is reported with the step index") {
        const Potential g = make_gaussian(1, 1.0);
        CHECK_THROWS_AS(verlet_flow({vec1(1e307), vec1(0.0)}, IntegratorParams(30.0, 10), g),
                        integrator_blowup);
    }
}

TEST_CASE("interpolation") {
    const Potential g = make_gaussian(1, 1.0);
    const IntegratorParams p(0.8, 8);
    const Trajectory traj = verlet_flow({vec1(1.0), vec1(0.0)}, p, g);
    SUBCASE("grid knots are reproduced exactly") {
        for (const IntegratorParams& pp :
             {IntegratorParams(0.8, 8), IntegratorParams(0.35, 7), IntegratorParams(0.33, 6)}) {
            const Trajectory tr = verlet_flow({vec1(1.0), vec1(0.3)}, pp, g);
            for (int k = 0; k <= pp.N; ++k) {
                const PhaseState s = interpolate(tr, k * pp.h());
                CHECK(s.x[0] == tr.grid_positions[k][0]);
                CHECK(s.v[0] == tr.grid_velocities[k][0]);
            }
            const PhaseState end = interpolate(tr, pp.T);
            CHECK(end.x[0] == tr.grid_positions[pp.N][0]);
        }
    }
    SUBCASE("free flight interpolant") {
        const Potential f = make_free(1);
        const Trajectory ft = verlet_flow({vec1(2.0), vec1(-1.0)}, p, f);
        for (double t : {0.05, 0.33, 0.79}) {
            const PhaseState s = interpolate(ft, t);
            CHECK(s.x[0] == doctest::Approx(2.0 - t).epsilon(1e-14));
            CHECK(s.v[0] == -1.0);
        }
    }
    SUBCASE("first-cell midpoint hand evaluation") {
        const Trajectory t2 = verlet_flow({vec1(1.0), vec1(0.0)}, IntegratorParams(0.8, 8), g);
        const PhaseState s = interpolate(t2, 0.05);  // h = 0.1, midpoint of cell 0
        CHECK(s.x[0] == doctest::Approx(0.99875).epsilon(1e-14));
    }
    SUBCASE("out-of-range t is rejected") {
        CHECK_THROWS_AS(interpolate(traj, -0.01), std::invalid_argument);
        CHECK_THROWS_AS(interpolate(traj, 0.81), std::invalid_argument);
    }
}

TEST_CASE("exact flow") {
    const Potential g = make_gaussian(1, 1.0);
    SUBCASE("quarter rotation") {
        const PhaseState s = exact_flow({vec1(1.0), vec1(0.0)}, M_PI / 2.0,
                                        g, ExactFlowMode::analytic_gaussian);
        CHECK(std::abs(s.x[0]) < 1e-15);
        CHECK(s.v[0] == doctest::Approx(-1.0).epsilon(1e-15));
    }
    SUBCASE("zero time is the identity") {
        const PhaseState s = exact_flow({vec1(0.7), vec1(-0.2)}, 0.0, g,
                                        ExactFlowMode::analytic_gaussian);
        CHECK(s.x[0] == 0.7);
        CHECK(s.v[0] == -0.2);
    }
    SUBCASE("reference mode approaches the analytic flow") {
        const PhaseState a = exact_flow({vec1(1.0), vec1(0.0)}, 0.35, g,
                                        ExactFlowMode::analytic_gaussian);
        const PhaseState r = exact_flow({vec1(1.0), vec1(0.0)}, 0.35, g,
                                        ExactFlowMode::reference_fine_step, 8, 64);
        CHECK(std::abs(a.x[0] - r.x[0]) < 1e-8);
        CHECK(std::abs(a.v[0] - r.v[0]) < 3e-8);
    }
    SUBCASE("analytic mode rejects non-quadratic potentials") {
        const Potential dw = make_double_well_tail_convex(1, 0.5);
        CHECK_THROWS_AS(
            exact_flow({vec1(1.0), vec1(0.0)}, 0.35, dw, ExactFlowMode::analytic_gaussian),
            std::invalid_argument);
    }
}

TEST_CASE("derivative flow") {
    SUBCASE("free flight") {
        const Potential f = make_free(3);
        RngStream rng(1, 0);
        const DerivativeFlow df =
            derivative_flow({rng.gaussian_vec(3), rng.gaussian_vec(3)}, IntegratorParams(0.4, 5), f);
        CHECK((df.d2q - 0.4 * Mat::Identity(3, 3)).norm() < 1e-14);
        CHECK((df.d2v - Mat::Identity(3, 3)).norm() < 1e-14);
    }
    SUBCASE("harmonic flow matches the explicit matrix power") {
        const Potential g = make_gaussian(1, 1.0);
        const IntegratorParams p(0.35, 8);
        const DerivativeFlow df = derivative_flow({vec1(0.3), vec1(-0.7)}, p, g);
        const oracle::Mat2 M = oracle::verlet_flow_matrix(1.0, p.h(), 8);
        CHECK(std::abs(df.d2q(0, 0) - M.b) < 1e-12);
        CHECK(std::abs(df.d2v(0, 0) - M.d) < 1e-12);
    }
    SUBCASE("integral form of the linearized dynamics is satisfied") {
        for (const Potential& U :
             {make_gaussian(2, 1.2), make_double_well_tail_convex(2, 0.4)}) {
            const IntegratorParams p(0.35, 8);
            RngStream rng(2, 0);
            const Vec x = rng.gaussian_vec(2), v = rng.gaussian_vec(2);
            const Trajectory traj = verlet_flow({x, v}, p, U);
            const DerivativeFlow df = derivative_flow({x, v}, p, U, true);
            const double h = p.h();
            // per-cell closed form of the two integrals in the linearized flow
            Mat iq = p.T * Mat::Identity(2, 2);
            Mat iv = Mat::Identity(2, 2);
            std::vector<Mat> A(p.N + 1);
            for (int k = 0; k <= p.N; ++k) {
                A[k] = Mat(2, 2);
                for (int j = 0; j < 2; ++j)
                    A[k].col(j) = U.hessian_vec(traj.grid_positions[k], df.per_grid_d2q[k].col(j));
            }
            for (int k = 0; k < p.N; ++k) {
                const double wk = h * (p.T - k * h - 0.5 * h);
                iq -= 0.5 * wk * (A[k] + A[k + 1]);
                iq += 0.25 * h * h * (A[k + 1] - A[k]);
                iv -= 0.5 * h * (A[k] + A[k + 1]);
            }
            CHECK((df.d2q - iq).norm() < 1e-12 * (1.0 + iq.norm()));
            CHECK((df.d2v - iv).norm() < 1e-12 * (1.0 + iv.norm()));
        }
    }
    SUBCASE("derivative flow matches finite differences of the flow") {
        const Potential dw = make_double_well_tail_convex(2, 0.5);
        const IntegratorParams p(0.3, 6);
        RngStream rng(3, 0);
        const Vec x = rng.gaussian_vec(2), v = rng.gaussian_vec(2);
        const DerivativeFlow df = derivative_flow({x, v}, p, dw);
        const Vec dir = rng.gaussian_vec(2).normalized();
        const Vec fd = oracle::fd_jacobian_apply(
            [&](const Vec& u) { return Vec(verlet_flow({x, u}, p, dw).end_position()); }, v, dir);
        CHECK((df.d2q * dir - fd).norm() < 1e-6);
    }
    SUBCASE("operator norm bound under the step-size constraint") {
        RngStream rng(4, 0);
        for (const Potential& U : {make_gaussian(2, 1.0), make_double_well_tail_convex(2, 0.5)}) {
            const IntegratorParams p(0.3, 8);
            for (int t = 0; t < 1000; ++t) {
                const DerivativeFlow df =
                    derivative_flow({rng.gaussian_vec(2), rng.gaussian_vec(2)}, p, U);
                Eigen::JacobiSVD<Mat> svd(df.d2q);
                CHECK(svd.singularValues()(0) <= 1.2 * p.T + 1e-12);
            }
        }
    }
}
