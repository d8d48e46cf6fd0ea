#include "uhmc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace uhmc {

Potential::Potential(int dim, EnergyFn energy, GradientFn gradient, HessVecFn hessian_vec,
                     double L, double L_H, double L_I)
    : dim_(dim),
      energy_(std::move(energy)),
      gradient_(std::move(gradient)),
      hessian_vec_(std::move(hessian_vec)),
      L_(L),
      L_H_(L_H),
      L_I_(L_I) {
    if (dim <= 0) throw std::invalid_argument("Potential: dim must be positive");
    if (L < 0 || L_H < 0 || L_I < 0) throw std::invalid_argument("Potential: negative smoothness constant");
}

void Potential::gradient_into(const Vec& x, Vec& out) const {
    grad_count_->fetch_add(1, std::memory_order_relaxed);
    gradient_(x, out);
}

Vec Potential::gradient(const Vec& x) const {
    Vec g(dim_);
    gradient_into(x, g);
    return g;
}

void Potential::hessian_vec_into(const Vec& x, const Vec& u, Vec& out) const { hessian_vec_(x, u, out); }

Vec Potential::hessian_vec(const Vec& x, const Vec& u) const {
    Vec out(dim_);
    hessian_vec_(x, u, out);
    return out;
}

Mat Potential::dense_hessian(const Vec& x) const {
    Mat H(dim_, dim_);
    Vec e = Vec::Zero(dim_);
    Vec col(dim_);
    for (int j = 0; j < dim_; ++j) {
        e[j] = 1.0;
        hessian_vec_(x, e, col);
        H.col(j) = col;
        e[j] = 0.0;
    }
    return H;
}

Potential make_gaussian(int dim, double omega2) {
    if (omega2 <= 0.0) throw std::invalid_argument("make_gaussian: omega2 must be positive");
    Potential p(
        dim,
        [omega2](const Vec& x) { return 0.5 * omega2 * x.squaredNorm(); },
        [omega2](const Vec& x, Vec& g) { g = omega2 * x; },
        [omega2](const Vec&, const Vec& u, Vec& out) { out = omega2 * u; },
        omega2, 0.0, 0.0);
    p.with_convexity({omega2, 0.0})
        .with_quadratic_curvature(omega2)
        .with_name("gaussian");
    return p;
}

Potential make_free(int dim) {
    Potential p(
        dim,
        [](const Vec&) { return 0.0; },
        [](const Vec& x, Vec& g) { g = Vec::Zero(x.size()); },
        [](const Vec&, const Vec& u, Vec& out) { out = Vec::Zero(u.size()); },
        0.0, 0.0, 0.0);
    p.with_quadratic_curvature(0.0).with_name("free");
    return p;
}

Potential make_double_well_tail_convex(int dim, double a) {
    if (std::abs(a) >= 1.0)
        throw std::invalid_argument("make_double_well_tail_convex: |a| must be < 1");
    Potential p(
        dim,
        [a](const Vec& x) {
            double s = 0.5 * x.squaredNorm();
            for (int i = 0; i < x.size(); ++i) s += a * (std::cos(x[i]) - 1.0);
            return s;
        },
        [a](const Vec& x, Vec& g) {
            g.resize(x.size());
            for (int i = 0; i < x.size(); ++i) g[i] = x[i] - a * std::sin(x[i]);
        },
        [a](const Vec& x, const Vec& u, Vec& out) {
            out.resize(x.size());
            for (int i = 0; i < x.size(); ++i) out[i] = (1.0 - a * std::cos(x[i])) * u[i];
        },
        1.0 + std::abs(a), std::abs(a), std::abs(a));
    p.with_convexity({1.0 - std::abs(a), 0.0}).with_name("double_well");
    return p;
}

Potential mf_assemble(const MeanFieldPotential& mfp) {
    if (mfp.n < 2 || mfp.k < 1) throw std::invalid_argument("mf_assemble: need n >= 2, k >= 1");
    if (mfp.V.dim() != mfp.k || mfp.W.dim() != mfp.k)
        throw std::invalid_argument("mf_assemble: V and W must live on R^k");
    const int n = mfp.n;
    const int k = mfp.k;
    const double eps = mfp.eps;
    const Potential V = mfp.V;
    const Potential W = mfp.W;

    auto energy = [n, k, eps, V, W](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += V.energy(x.segment(i * k, k));
        if (eps != 0.0) {
            double w = 0.0;
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l)
                    if (l != i) w += W.energy(x.segment(i * k, k) - x.segment(l * k, k));
            s += eps / n * w;
        }
        return s;
    };
    auto gradient = [n, k, eps, V, W](const Vec& x, Vec& g) {
        g.resize(n * k);
        Vec gi(k), z(k), gw(k);
        for (int i = 0; i < n; ++i) {
            V.gradient_into(x.segment(i * k, k), gi);
            g.segment(i * k, k) = gi;
        }
        if (eps != 0.0) {
            for (int i = 0; i < n; ++i) {
                for (int l = 0; l < n; ++l) {
                    if (l == i) continue;
                    z = x.segment(i * k, k) - x.segment(l * k, k);
                    W.gradient_into(z, gw);
                    g.segment(i * k, k) += (eps / n) * gw;
                    W.gradient_into(-z, gw);
                    g.segment(i * k, k) -= (eps / n) * gw;
                }
            }
        }
    };
    auto hess_vec = [n, k, eps, V, W](const Vec& x, const Vec& u, Vec& out) {
        out.resize(n * k);
        Vec hi(k), z(k), du(k), hw(k);
        for (int i = 0; i < n; ++i) {
            V.hessian_vec_into(x.segment(i * k, k), u.segment(i * k, k), hi);
            out.segment(i * k, k) = hi;
        }
        if (eps != 0.0) {
            for (int i = 0; i < n; ++i) {
                for (int l = 0; l < n; ++l) {
                    if (l == i) continue;
                    z = x.segment(i * k, k) - x.segment(l * k, k);
                    du = u.segment(i * k, k) - u.segment(l * k, k);
                    W.hessian_vec_into(z, du, hw);
                    out.segment(i * k, k) += (eps / n) * hw;
                    W.hessian_vec_into(-z, du, hw);
                    out.segment(i * k, k) += (eps / n) * hw;
                }
            }
        }
    };

    Potential p(n * k, energy, gradient, hess_vec, mfp.L_eff(), mfp.L_H_eff(), mfp.L_I_eff());
    p.with_name("mean_field");
    if (mfp.V.convexity() && eps == 0.0) p.with_convexity(*mfp.V.convexity());
    if (mfp.V.quadratic_curvature() && mfp.W.quadratic_curvature() && eps == 0.0)
        p.with_quadratic_curvature(*mfp.V.quadratic_curvature());
    return p;
}

TargetMoments gaussian_moments(int dim, double omega2) {
    TargetMoments m;
    const double s2 = 1.0 / omega2;
    m.m2 = dim * s2;
    m.m4 = double(dim) * (dim + 2.0) * s2 * s2;
    m.source = TargetMoments::Source::analytic;
    return m;
}

}  // namespace uhmc
