#include "uhmc/metrics.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uhmc {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

namespace {

double simpson(double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, flm, m, fm);
    const double right = simpson(m, fm, frm, b, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(a, fa, fm, b, fb);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

SampleSet SampleSet::from_scalars(const std::vector<double>& xs) {
    SampleSet s;
    s.dim = 1;
    s.points.reserve(xs.size());
    for (double x : xs) {
        Vec v(1);
        v[0] = x;
        s.points.push_back(v);
    }
    return s;
}

double tv_gaussian_1d(double m1, double s1, double m2, double s2, double abs_tol) {
    if (s1 <= 0.0 || s2 <= 0.0) throw std::invalid_argument("tv_gaussian_1d: scales must be positive");
    if (m1 == m2 && s1 == s2) return 0.0;
    const double lo = std::min(m1 - 12.0 * s1, m2 - 12.0 * s2);
    const double hi = std::max(m1 + 12.0 * s1, m2 + 12.0 * s2);
    auto f = [&](double x) {
        return std::abs(normal_pdf((x - m1) / s1) / s1 - normal_pdf((x - m2) / s2) / s2);
    };
    const double v = 0.5 * integrate_adaptive(f, lo, hi, abs_tol);
    return std::min(std::max(v, 0.0), 1.0);
}

double tv_gaussian_isotropic(double s1, double s2, int d, double abs_tol) {
    if (s1 <= 0.0 || s2 <= 0.0)
        throw std::invalid_argument("tv_gaussian_isotropic: scales must be positive");
    if (d < 1) throw std::invalid_argument("tv_gaussian_isotropic: d must be positive");
    if (s1 == s2) return 0.0;
    // radial density r^{d-1} exp(-r^2/(2 s^2)) / (2^{d/2-1} Gamma(d/2) s^d)
    auto log_norm = [&](double s) {
        return (0.5 * d - 1.0) * std::log(2.0) + std::lgamma(0.5 * d) + d * std::log(s);
    };
    const double ln1 = log_norm(s1), ln2 = log_norm(s2);
    auto f = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double lr = std::log(r);
        const double a = std::exp((d - 1) * lr - 0.5 * r * r / (s1 * s1) - ln1);
        const double b = std::exp((d - 1) * lr - 0.5 * r * r / (s2 * s2) - ln2);
        return std::abs(a - b);
    };
    const double hi = (std::sqrt(double(d)) + 14.0) * std::max(s1, s2);
    const double v = 0.5 * integrate_adaptive(f, 0.0, hi, abs_tol);
    return std::min(std::max(v, 0.0), 1.0);
}

namespace {

std::vector<double> normalized_weights(const SampleSet& s) {
    std::vector<double> w = s.weights;
    if (w.empty()) w.assign(s.points.size(), 1.0 / double(s.points.size()));
    const double tot = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w) x /= tot;
    return w;
}

double histogram_tv(const std::vector<int>& ca, const std::vector<int>& cb, std::size_t na,
                    std::size_t nb) {
    double s = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i)
        s += std::abs(double(ca[i]) / double(na) - double(cb[i]) / double(nb));
    return 0.5 * s;
}

}  // namespace

EmpiricalTv empirical_tv(const SampleSet& a, const SampleSet& b, int bins_per_dim,
                         std::uint64_t bootstrap_seed, int bootstrap_resamples) {
    if (a.dim != b.dim) throw std::invalid_argument("empirical_tv: dimension mismatch");
    if (a.points.empty() || b.points.empty()) throw std::invalid_argument("empirical_tv: empty sample set");
    if (a.dim > 3) throw std::invalid_argument("empirical_tv: histogram mode supports d <= 3");
    if (bins_per_dim < 1) throw std::invalid_argument("empirical_tv: need at least one bin");
    const int d = a.dim;

    Vec lo = a.points[0], hi = a.points[0];
    auto extend = [&](const SampleSet& s) {
        for (const auto& p : s.points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    };
    extend(a);
    extend(b);
    for (int j = 0; j < d; ++j)
        if (hi[j] <= lo[j]) hi[j] = lo[j] + 1.0;

    std::size_t cells = 1;
    for (int j = 0; j < d; ++j) cells *= static_cast<std::size_t>(bins_per_dim);
    auto cell_of = [&](const Vec& p) {
        std::size_t idx = 0;
        for (int j = 0; j < d; ++j) {
            int bj = static_cast<int>((p[j] - lo[j]) / (hi[j] - lo[j]) * bins_per_dim);
            bj = std::min(std::max(bj, 0), bins_per_dim - 1);
            idx = idx * bins_per_dim + static_cast<std::size_t>(bj);
        }
        return idx;
    };

    std::vector<int> cells_a(a.points.size()), cells_b(b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) cells_a[i] = static_cast<int>(cell_of(a.points[i]));
    for (std::size_t i = 0; i < b.points.size(); ++i) cells_b[i] = static_cast<int>(cell_of(b.points[i]));

    auto count = [&](const std::vector<int>& idx) {
        std::vector<int> c(cells, 0);
        for (int i : idx) ++c[static_cast<std::size_t>(i)];
        return c;
    };
    EmpiricalTv out;
    out.bins_per_dim = bins_per_dim;
    out.estimate = histogram_tv(count(cells_a), count(cells_b), a.points.size(), b.points.size());

    RngStream rng(bootstrap_seed, 0);
    std::vector<double> reps;
    reps.reserve(bootstrap_resamples);
    std::vector<int> ra(cells_a.size()), rb(cells_b.size());
    for (int r = 0; r < bootstrap_resamples; ++r) {
        for (auto& c : ra)
            c = cells_a[static_cast<std::size_t>(rng.uniform() * double(cells_a.size())) % cells_a.size()];
        for (auto& c : rb)
            c = cells_b[static_cast<std::size_t>(rng.uniform() * double(cells_b.size())) % cells_b.size()];
        reps.push_back(histogram_tv(count(ra), count(rb), ra.size(), rb.size()));
    }
    std::sort(reps.begin(), reps.end());
    out.lo = reps[static_cast<std::size_t>(0.025 * (reps.size() - 1))];
    out.hi = reps[static_cast<std::size_t>(0.975 * (reps.size() - 1))];
    return out;
}

double w1_empirical_1d(const SampleSet& a, const SampleSet& b) {
    if (a.dim != 1 || b.dim != 1) throw std::invalid_argument("w1_empirical_1d: dim must be 1");
    if (a.points.empty() || b.points.empty())
        throw std::invalid_argument("w1_empirical_1d: empty sample set");
    struct Atom {
        double x, wa, wb;
    };
    std::vector<Atom> atoms;
    atoms.reserve(a.points.size() + b.points.size());
    const auto wa = normalized_weights(a);
    const auto wb = normalized_weights(b);
    for (std::size_t i = 0; i < a.points.size(); ++i) atoms.push_back({a.points[i][0], wa[i], 0.0});
    for (std::size_t i = 0; i < b.points.size(); ++i) atoms.push_back({b.points[i][0], 0.0, wb[i]});
    std::sort(atoms.begin(), atoms.end(), [](const Atom& p, const Atom& q) { return p.x < q.x; });
    // integral of |F_a(t) - F_b(t)| dt
    double Fa = 0.0, Fb = 0.0, w1 = 0.0;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        Fa += atoms[i].wa;
        Fb += atoms[i].wb;
        w1 += std::abs(Fa - Fb) * (atoms[i + 1].x - atoms[i].x);
    }
    return w1;
}

double l1_block_distance(const Vec& x, const Vec& y, int n, int k) {
    if (x.size() != y.size() || x.size() != static_cast<long>(n) * k)
        throw std::invalid_argument("l1_block_distance: block layout mismatch");
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (x.segment(i * k, k) - y.segment(i * k, k)).norm();
    return s;
}

double kl_phi_numeric(const PhiMapView& map, int d, const KlGridSpec& grid) {
    if (d != 1 && d != 2) throw std::invalid_argument("kl_phi_numeric: d must be 1 or 2");
    const int m = grid.points_per_dim;
    const double R = grid.half_width;
    const double step = 2.0 * R / (m - 1);

    auto integrand = [&](const Vec& v) {
        const Vec pv = map.phi(v);
        const Mat J = map.jac(v);
        Eigen::PartialPivLU<Mat> lu(J);
        double logdet = 0.0;
        for (int i = 0; i < d; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
        const double quad = 0.5 * (pv - v).squaredNorm();
        const double tr = (J - Mat::Identity(d, d)).trace();
        double dens = std::exp(-0.5 * v.squaredNorm()) / std::pow(2.0 * M_PI, 0.5 * d);
        return dens * (quad + tr - logdet);
    };

    double total = 0.0;
    if (d == 1) {
        Vec v(1);
        for (int i = 0; i < m; ++i) {
            v[0] = -R + i * step;
            const double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
            total += w * integrand(v);
        }
        total *= step;
    } else {
        Vec v(2);
        for (int i = 0; i < m; ++i) {
            const double wi = (i == 0 || i == m - 1) ? 0.5 : 1.0;
            v[0] = -R + i * step;
            for (int j = 0; j < m; ++j) {
                const double wj = (j == 0 || j == m - 1) ? 0.5 : 1.0;
                v[1] = -R + j * step;
                total += wi * wj * integrand(v);
            }
        }
        total *= step * step;
    }
    if (total < -1e-10) throw std::runtime_error("kl_phi_numeric: negative value, quadrature failure");
    return std::max(total, 0.0);
}

}  // namespace uhmc
