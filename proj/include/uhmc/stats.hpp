#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "uhmc/metrics.hpp"

namespace uhmc {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    LinearFit f;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ym = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = f.intercept + f.slope * x[i];
        ss_res += (y[i] - pred) * (y[i] - pred);
        ss_tot += (y[i] - ym) * (y[i] - ym);
    }
    f.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::size_t n = 0;
};

inline SampleMoments sample_moments(const std::vector<double>& xs) {
    SampleMoments m;
    m.n = xs.size();
    if (m.n == 0) return m;
    for (double x : xs) m.mean += x;
    m.mean /= double(m.n);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : xs) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(m.n);
    m3 /= double(m.n);
    m4 /= double(m.n);
    m.variance = m2 * double(m.n) / std::max<double>(1.0, double(m.n) - 1.0);
    m.skewness = (m2 > 0) ? m3 / std::pow(m2, 1.5) : 0.0;
    m.excess_kurtosis = (m2 > 0) ? m4 / (m2 * m2) - 3.0 : 0.0;
    return m;
}

// sup_t |F_emp(t) - Phi(t)| against the standard normal CDF.
inline double ks_statistic_standard_normal(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = normal_cdf(xs[i]);
        ks = std::max(ks, std::max(std::abs((i + 1) / n - F), std::abs(i / n - F)));
    }
    return ks;
}

// E |Z| for Z ~ N(0, I_d): sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
inline double chi_mean(int d) {
    return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d));
}

// Log-linear fit of the survival tail P[tau > m], restricted to levels with
// survival fraction in [lo_frac, hi_frac]. The default band targets the tail
// after the first one-shot epoch, where the decay is geometric.
inline LinearFit survival_tail_fit(const std::vector<int>& taus, double lo_frac = 0.001,
                                   double hi_frac = 0.2) {
    if (taus.empty()) return LinearFit{};
    std::vector<int> sorted(taus);
    std::sort(sorted.begin(), sorted.end());
    const double n = double(sorted.size());
    std::vector<double> ms, logs;
    const int tmax = sorted.back();
    for (int m = 1; m <= tmax; ++m) {
        const auto it = std::upper_bound(sorted.begin(), sorted.end(), m);
        const double surv = double(sorted.end() - it) / n;
        if (surv >= lo_frac && surv <= hi_frac) {
            ms.push_back(double(m));
            logs.push_back(std::log(surv));
        }
    }
    if (ms.size() < 3) return LinearFit{};
    return linear_fit(ms, logs);
}

}  // namespace uhmc
