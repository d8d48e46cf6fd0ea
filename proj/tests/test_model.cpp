#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "uhmc/model.hpp"
#include "uhmc/rng.hpp"

using namespace uhmc;

namespace {

Vec vec1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

// The shipped potentials plus an assembled mean-field system.
std::vector<Potential> shipped_potentials() {
    MeanFieldPotential mfp{3, 2, make_gaussian(2, 1.0), make_gaussian(2, 1.0), 0.1};
    return {make_gaussian(1, 1.0), make_gaussian(2, 4.0), make_double_well_tail_convex(1, 0.5),
            make_double_well_tail_convex(3, -0.7), mf_assemble(mfp)};
}

}  // namespace

TEST_CASE("gaussian potential basics") {
    const Potential g = make_gaussian(1, 1.0);
    CHECK(g.energy(vec1(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g.gradient(vec1(2.0))[0] == doctest::Approx(2.0).epsilon(1e-15));

    const Potential g3 = make_gaussian(3, 1.0);
    CHECK(g3.energy(Vec::Zero(3)) == 0.0);
    CHECK(g3.gradient(Vec::Zero(3)).norm() == 0.0);

    const Potential g4 = make_gaussian(1, 4.0);
    CHECK(g4.lip_grad() == 4.0);
    CHECK(g4.lip_hess() == 0.0);
    CHECK(g4.convexity()->K == 4.0);

    CHECK_THROWS_AS(make_gaussian(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_gaussian(1, -2.0), std::invalid_argument);
}

TEST_CASE("double well reduces to the gaussian at a = 0") {
    const Potential dw = make_double_well_tail_convex(2, 0.0);
    const Potential g = make_gaussian(2, 1.0);
    RngStream rng(1, 0);
    for (int i = 0; i < 100; ++i) {
        const Vec x = rng.gaussian_vec(2);
        CHECK(dw.energy(x) == doctest::Approx(g.energy(x)).epsilon(1e-14));
        CHECK((dw.gradient(x) - g.gradient(x)).norm() < 1e-14);
    }
    CHECK(dw.lip_grad() == 1.0);
}

TEST_CASE("double well gradient vanishes at the origin and constants are as declared") {
    const Potential dw = make_double_well_tail_convex(1, 0.5);
    CHECK(dw.energy(Vec::Zero(1)) == 0.0);
    CHECK(dw.gradient(Vec::Zero(1))[0] == 0.0);
    CHECK(dw.lip_grad() == 1.5);
    CHECK(dw.lip_hess() == 0.5);
    CHECK(dw.lip_third() == 0.5);
    CHECK_THROWS_AS(make_double_well_tail_convex(1, 1.0), std::invalid_argument);
}

TEST_CASE("strong convexity probing for the double well") {
    const Potential dw = make_double_well_tail_convex(1, 0.5);
    const auto prof = dw.convexity();
    REQUIRE(prof.has_value());
    RngStream rng(2, 0);
    for (int i = 0; i < 10000; ++i) {
        const Vec x = 3.0 * rng.gaussian_vec(1);
        const Vec y = 3.0 * rng.gaussian_vec(1);
        if ((x - y).norm() < prof->R) continue;
        const double lhs = (x - y).dot(dw.gradient(x) - dw.gradient(y));
        CHECK(lhs >= prof->K * (x - y).squaredNorm() - 1e-12);
    }
}

TEST_CASE("secant bound holds for every shipped potential") {
    RngStream rng(3, 0);
    for (const Potential& U : shipped_potentials()) {
        for (int i = 0; i < 10000; ++i) {
            const Vec x = 2.0 * rng.gaussian_vec(U.dim());
            const Vec y = 2.0 * rng.gaussian_vec(U.dim());
            const double lhs = (U.gradient(x) - U.gradient(y)).norm();
            CHECK(lhs <= U.lip_grad() * (x - y).norm() * (1.0 + 1e-12) + 1e-15);
        }
    }
}

TEST_CASE("hessian_vec agrees with finite differences of the gradient") {
    RngStream rng(4, 0);
    for (const Potential& U : shipped_potentials()) {
        for (int i = 0; i < 50; ++i) {
            const Vec x = rng.gaussian_vec(U.dim());
            const Vec u = rng.gaussian_vec(U.dim());
            const Vec hv = U.hessian_vec(x, u);
            const Vec fd = oracle::fd_jacobian_apply(
                [&](const Vec& z) { return U.gradient(z); }, x, u);
            CHECK((hv - fd).norm() <= 1e-6 * (1.0 + hv.norm()));
        }
    }
}

TEST_CASE("operator norm of probed hessians never exceeds the Frobenius norm") {
    RngStream rng(5, 0);
    for (const Potential& U : shipped_potentials()) {
        for (int i = 0; i < 20; ++i) {
            const Mat H = U.dense_hessian(rng.gaussian_vec(U.dim()));
            Eigen::JacobiSVD<Mat> svd(H);
            CHECK(svd.singularValues()(0) <= H.norm() + 1e-12);
        }
    }
}

TEST_CASE("mean-field assembly") {
    SUBCASE("interaction off gives block copies of grad V") {
        MeanFieldPotential mfp{3, 2, make_gaussian(2, 2.0), make_gaussian(2, 1.0), 0.0};
        const Potential U = mf_assemble(mfp);
        RngStream rng(6, 0);
        const Vec x = rng.gaussian_vec(6);
        const Vec g = U.gradient(x);
        for (int i = 0; i < 3; ++i)
            CHECK((g.segment(2 * i, 2) - mfp.V.gradient(x.segment(2 * i, 2))).norm() < 1e-14);
    }

    SUBCASE("hand-evaluated two-particle gradient") {
        MeanFieldPotential mfp{2, 1, make_gaussian(1, 1.0), make_gaussian(1, 1.0), 0.1};
        const Potential U = mf_assemble(mfp);
        Vec x(2);
        x << 1.0, -1.0;
        const Vec g = U.gradient(x);
        CHECK(g[0] == doctest::Approx(1.2).epsilon(1e-14));
        CHECK(g[1] == doctest::Approx(-1.2).epsilon(1e-14));
    }

    SUBCASE("assembled gradient matches finite differences of assembled energy") {
        MeanFieldPotential mfp{3, 2, make_gaussian(2, 1.0), make_gaussian(2, 0.8), 0.2};
        const Potential U = mf_assemble(mfp);
        RngStream rng(7, 0);
        for (int i = 0; i < 100; ++i) {
            const Vec x = rng.gaussian_vec(6);
            const Vec g = U.gradient(x);
            const Vec fd = oracle::fd_gradient([&](const Vec& z) { return U.energy(z); }, x);
            CHECK((g - fd).norm() <= 1e-6 * (1.0 + g.norm()));
        }
    }

    SUBCASE("blockwise Lipschitz bound on the gradient") {
        MeanFieldPotential mfp{3, 2, make_gaussian(2, 1.0), make_gaussian(2, 1.0), 0.25};
        const Potential U = mf_assemble(mfp);
        RngStream rng(11, 0);
        const double own = mfp.L() + 2.0 * mfp.eps * mfp.Lt();
        const double cross = 2.0 * mfp.eps * mfp.Lt() / mfp.n;
        for (int t = 0; t < 2000; ++t) {
            const Vec x = 2.0 * rng.gaussian_vec(6), y = 2.0 * rng.gaussian_vec(6);
            const Vec gx = U.gradient(x), gy = U.gradient(y);
            for (int i = 0; i < 3; ++i) {
                double cap = own * (x.segment(2 * i, 2) - y.segment(2 * i, 2)).norm();
                for (int l = 0; l < 3; ++l)
                    if (l != i) cap += cross * (x.segment(2 * l, 2) - y.segment(2 * l, 2)).norm();
                CHECK((gx.segment(2 * i, 2) - gy.segment(2 * i, 2)).norm() <= cap + 1e-12);
            }
        }
    }

    SUBCASE("blockwise Lipschitz structure of the hessian") {
        MeanFieldPotential mfp{4, 2, make_gaussian(2, 1.0), make_gaussian(2, 1.0), 0.3};
        const Potential U = mf_assemble(mfp);
        RngStream rng(8, 0);
        const double diag_cap = mfp.L() + 2.0 * mfp.eps * mfp.Lt();
        const double off_cap = 2.0 * mfp.eps * mfp.Lt() / mfp.n;
        for (int t = 0; t < 10; ++t) {
            const Mat H = U.dense_hessian(rng.gaussian_vec(8));
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    Eigen::JacobiSVD<Mat> svd(Mat(H.block(2 * i, 2 * j, 2, 2)));
                    CHECK(svd.singularValues()(0) <= (i == j ? diag_cap : off_cap) + 1e-12);
                }
        }
    }

    SUBCASE("W must be even for the shipped examples") {
        MeanFieldPotential mfp{2, 2, make_gaussian(2, 1.0), make_gaussian(2, 1.0), 0.5};
        RngStream rng(9, 0);
        for (int i = 0; i < 100; ++i) {
            const Vec z = rng.gaussian_vec(2);
            CHECK(mfp.W.energy(z) == doctest::Approx(mfp.W.energy(-z)).epsilon(1e-14));
        }
    }

    SUBCASE("dimension mismatch is rejected") {
        MeanFieldPotential bad{2, 2, make_gaussian(3, 1.0), make_gaussian(2, 1.0), 0.1};
        CHECK_THROWS_AS(mf_assemble(bad), std::invalid_argument);
        MeanFieldPotential small{1, 2, make_gaussian(2, 1.0), make_gaussian(2, 1.0), 0.1};
        CHECK_THROWS_AS(mf_assemble(small), std::invalid_argument);
    }

    SUBCASE("effective constants") {
        MeanFieldPotential mfp{2, 1, make_double_well_tail_convex(1, 0.5), make_gaussian(1, 2.0),
                               0.25};
        CHECK(mfp.L_eff() == doctest::Approx(1.5 + 4.0 * 0.25 * 2.0));
        CHECK(mfp.L_H_eff() == doctest::Approx(0.5));
        CHECK(mfp.L_I_eff() == doctest::Approx(0.5));
        CHECK(mf_assemble(mfp).lip_grad() == doctest::Approx(mfp.L_eff()));
    }
}

TEST_CASE("gaussian moments satisfy the Jensen ordering") {
    for (int d : {1, 2, 8}) {
        const TargetMoments m = gaussian_moments(d, 2.0);
        CHECK(m.m4 >= m.m2 * m.m2);
        CHECK(m.m2 == doctest::Approx(d / 2.0));
    }
}

TEST_CASE("gradient evaluations are counted across copies") {
    const Potential g = make_gaussian(2, 1.0);
    const Potential copy = g;
    g.reset_gradient_evals();
    copy.gradient(Vec::Zero(2));
    g.gradient(Vec::Zero(2));
    CHECK(g.gradient_evals() == 2);
}
