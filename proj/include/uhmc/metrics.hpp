#pragma once

#include <functional>

#include "uhmc/model.hpp"
#include "uhmc/rng.hpp"

namespace uhmc {

double normal_cdf(double z);
double normal_pdf(double z);

// Adaptive Simpson quadrature with absolute tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-12, int max_depth = 60);

struct SampleSet {
    int dim = 0;
    std::vector<Vec> points;
    std::vector<double> weights;  // empty = uniform

    static SampleSet from_scalars(const std::vector<double>& xs);
};

// TV between two 1D Gaussians by adaptive integration of (1/2) int |p1 - p2|.
double tv_gaussian_1d(double m1, double s1, double m2, double s2, double abs_tol = 1e-10);

// TV between N(0, s1^2 I_d) and N(0, s2^2 I_d) via the radial densities.
double tv_gaussian_isotropic(double s1, double s2, int d, double abs_tol = 1e-11);

struct EmpiricalTv {
    double estimate = 0.0;
    double lo = 0.0;  // bootstrap 95% interval
    double hi = 0.0;
    int bins_per_dim = 0;
};

// Histogram lower-bound estimator: half the L1 distance of binned frequencies
// on a common bounding box, with a bootstrap percentile error bar
// (200 resamples). Only d <= 3; the histogram bias grows quickly above that.
EmpiricalTv empirical_tv(const SampleSet& a, const SampleSet& b, int bins_per_dim,
                         std::uint64_t bootstrap_seed = 7, int bootstrap_resamples = 200);

// Exact L1-Wasserstein distance between two 1D empirical measures
// (integral of |F_a - F_b|; reduces to sorted matching for equal sizes).
double w1_empirical_1d(const SampleSet& a, const SampleSet& b);

// l1(x, y) = sum_i |x^i - y^i| over particle blocks.
double l1_block_distance(const Vec& x, const Vec& y, int n, int k);

// Differentiable map with Jacobian access, as consumed by the KL quadrature
// and the overlap bound.
struct PhiMapView {
    std::function<Vec(const Vec&)> phi;
    std::function<Mat(const Vec&)> jac;
};

struct KlGridSpec {
    double half_width = 10.0;
    int points_per_dim = 401;
};

// KL(Law(xi) || Law(Phi^{-1}(xi))) for xi ~ N(0, I_d), d in {1, 2}:
//   int phi(v) [ |Phi(v)-v|^2/2 + Trace(DPhi(v)-I) - log |det DPhi(v)| ] dv
// by tensor-grid quadrature. sqrt(2 KL) upper-bounds the TV distance.
double kl_phi_numeric(const PhiMapView& map, int d, const KlGridSpec& grid = {});

}  // namespace uhmc
