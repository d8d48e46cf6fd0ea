#include "uhmc/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace uhmc {

double regularization_constant(double T, int d, double L_H) {
    if (T <= 0.0) throw std::invalid_argument("regularization_constant: T must be positive");
    const double T2 = T * T;
    return 1.5 * std::sqrt(1.0 / T2 + 27.0 * d * L_H * L_H * T2 * T2);
}

double mixing_time_bound(double eps, const RateCertificate& cert, double w1_init, double T, int d,
                         double L_H) {
    if (eps <= 0.0) throw std::invalid_argument("mixing_time_bound: eps must be positive");
    const double T2 = T * T;
    const double pref = 3.0 * std::sqrt(1.0 / T2 + 27.0 * d * L_H * L_H * T2 * T2);
    const double arg = pref * cert.M1 * w1_init / (2.0 * eps);
    return std::max(0.0, 2.0 + std::log(arg) / cert.c);
}

double tv_convergence_bound(int m, const RateCertificate& cert, double w1_init, double T, int d,
                            double L_H) {
    if (m < 0) throw std::invalid_argument("tv_convergence_bound: m must be nonnegative");
    return regularization_constant(T, d, L_H) * cert.M1 * w1_init * std::exp(-cert.c * m);
}

BiasConstantBreakdown bias_constant_C(int d, double T, double L, double L_H, double L_I,
                                      const TargetMoments& moments) {
    const double T2 = T * T, T4 = T2 * T2, T6 = T4 * T2, T8 = T4 * T4;
    const double L2 = L * L, LH2 = L_H * L_H, LI2 = L_I * L_I, LH4 = LH2 * LH2;
    const double dd = static_cast<double>(d);
    BiasConstantBreakdown b;
    b.d3_group = dd * dd * dd * (4.0 * LI2 * T4 + 14.0 * LH2 * L_I * T6 + 14.0 * LH4 * T8);
    b.d2_group = dd * dd * (35.0 * LH2 * T2 + 8.0 * LI2 * T4 + 28.0 * LH2 * L_I * T6 + 28.0 * LH4 * T8);
    b.d1_group = dd * (16.0 * L2 + 4.0 * LH2 * T2);
    b.m2_group = (2.0 * dd * LH2 + L2 / T2) * moments.m2;
    b.m4_group = (dd * LI2 + dd * LH2 * L_I * T2 + dd * LH4 * T4 + LH2 / T2) * moments.m4;
    b.value = std::sqrt(b.d3_group + b.d2_group + b.d1_group + b.m2_group + b.m4_group);
    return b;
}

double tv_bias_bound(double h, double T, int d, double L_H, double M2, double C) {
    if (h < 0.0) throw std::invalid_argument("tv_bias_bound: h must be nonnegative");
    return h * h * (regularization_constant(T, d, L_H) * M2 + C);
}

RateCertificate logconcave_rates(double K, double L, double R, double T, double h) {
    if (K <= 0.0 || L < K) throw std::invalid_argument("logconcave_rates: need 0 < K <= L");
    RateCertificate cert;
    if (R == 0.0) {
        cert.c = K * T * T / 10.0;
        cert.M1 = 1.0;
        cert.source = RateCertificate::Source::logconcave_synchronous;
        cert.validity.emplace_back("LT2_le_quarter", L * T * T <= 0.25);
        return cert;
    }
    const double ratio = std::sqrt((L + K) / K);
    cert.M1 = std::exp(2.5 * (1.0 + 4.0 * R / T * ratio));
    cert.c = K * T * T / 156.0 * std::exp(-10.0 * R / T * ratio);
    cert.source = RateCertificate::Source::nonconvex_BEZ;
    const double lhs = L * (T + h) * (T + h);
    const double cap = std::min({3.0 * K / (10.0 * L), 0.25,
                                 3.0 * K / (256.0 * 5.0 * 64.0 * L * R * R * (L + K))});
    cert.validity.emplace_back("L(T+h)^2_le_cap", lhs <= cap);
    cert.validity.emplace_back("h_le_KT_over_(525L+235K)", h <= K * T / (525.0 * L + 235.0 * K));
    return cert;
}

RateCertificate mean_field_rates(const MeanFieldPotential& mfp, double K, double R, double T,
                                 double h) {
    if (K <= 0.0) throw std::invalid_argument("mean_field_rates: need K > 0");
    const double L = mfp.L();
    const double Lt = mfp.Lt();
    const double eps = mfp.eps;
    const double ratio = std::sqrt((L + K) / K);
    RateCertificate cert;
    const double M = std::exp(2.5 * (1.0 + 4.0 * R / T * ratio));
    cert.M1 = std::sqrt(static_cast<double>(mfp.n)) * M;
    cert.c = K * T * T / 156.0 * std::exp(-10.0 * R / T * ratio);
    cert.source = RateCertificate::Source::mean_field_BS;

    const double lhs = L * (T + h) * (T + h);
    const double cap = (R == 0.0)
                           ? 0.6 * std::min(3.0 * K / (10.0 * L), 0.25)
                           : 0.6 * std::min({3.0 * K / (10.0 * L), 0.25,
                                             3.0 * K / (256.0 * 5.0 * 64.0 * L * R * R * (L + K))});
    cert.validity.emplace_back("L(T+h)^2_le_cap", lhs <= cap);
    const double eps_cap =
        std::min(K / 6.0, 0.5 * std::pow(K / (36.0 * 149.0), 2.0) *
                              std::pow(T + 8.0 * R * ratio, 2.0) * std::exp(-40.0 * R / T * ratio));
    cert.validity.emplace_back("eps_Lt_lt_cap", std::abs(eps) * Lt < eps_cap);
    cert.validity.emplace_back("h_le_KT_over_(525L+235K)", h <= K * T / (525.0 * L + 235.0 * K));
    return cert;
}

namespace {

double mf_regularization_constant(double T, int k, double LH_eff) {
    const double T2 = T * T;
    return 1.5 * std::sqrt(1.0 / T2 + 34.0 * k * LH_eff * LH_eff * T2 * T2);
}

// The n^2 k group uses the factored form 180 (2k + k^2) T^4 (LI' + LH'^2 T^2)^2
// and the |x|^4 group uses 40 k (LI' + LH'^2 T^2)^2; these are the two
// dimensionally consistent factorizations of the expanded expression.
double mf_bias_constant(const MeanFieldPotential& mfp, double T, const TargetMoments& m) {
    const double n = mfp.n, k = mfp.k;
    const double Le = mfp.L_eff(), LHe = mfp.L_H_eff(), LIe = mfp.L_I_eff();
    const double T2 = T * T, T4 = T2 * T2;
    const double sum_m2 = m.per_particle_m2.sum();
    const double sum_m4 = m.per_particle_m4.sum();
    const double quartic = LIe + LHe * LHe * T2;
    const double g_n2k = n * n * k *
                         (17.0 * Le * Le + 28.0 * LHe * LHe * T2 + 104.0 * k * LHe * LHe * T2 +
                          180.0 * (2.0 * k + k * k) * T4 * quartic * quartic);
    const double g_m2 = n * (10.0 * k * LHe * LHe + 7.0 * Le * Le / T2) * sum_m2;
    const double g_m4 = n * (40.0 * k * quartic * quartic + 7.0 * LHe * LHe / T2) * sum_m4;
    return std::sqrt(g_n2k + g_m2 + g_m4);
}

}  // namespace

std::vector<BoundReport> mean_field_bounds(const MeanFieldPotential& mfp, double T, double h,
                                           const MeanFieldBoundInputs& in) {
    if (in.moments.per_particle_m2.size() != mfp.n || in.moments.per_particle_m4.size() != mfp.n)
        throw std::invalid_argument("mean_field_bounds: per-particle moments required");
    std::vector<BoundReport> reports;
    const double Le = mfp.L_eff(), LHe = mfp.L_H_eff();
    const bool constraint = (Le * (T * T + T * h) <= 1.0 / 6.0 + 1e-15);

    BoundReport reg;
    reg.name = "mf_regularization_constant";
    reg.value = mf_regularization_constant(T, mfp.k, LHe);
    reg.inputs = {{"T", T}, {"k", double(mfp.k)}, {"L_H_eff", LHe}};
    reg.constraint_flags = {{"step_size_constraint_mf", constraint}};
    reports.push_back(reg);

    BoundReport c_mf;
    c_mf.name = "mf_bias_constant_C";
    c_mf.value = mf_bias_constant(mfp, T, in.moments);
    c_mf.inputs = {{"n", double(mfp.n)}, {"k", double(mfp.k)},   {"T", T},
                   {"L_eff", Le},        {"L_H_eff", LHe},       {"L_I_eff", mfp.L_I_eff()},
                   {"sum_m2", in.moments.per_particle_m2.sum()}, {"sum_m4", in.moments.per_particle_m4.sum()}};
    c_mf.constraint_flags = {{"step_size_constraint_mf", constraint}};
    reports.push_back(c_mf);

    RateCertificate cert = mean_field_rates(mfp, in.K, in.R, T, h);
    BoundReport mix;
    mix.name = "mf_mixing_time_bound";
    {
        const double M = cert.M1 / std::sqrt(double(mfp.n));  // ell_1 version uses M, not sqrt(n) M
        const double arg = 2.0 * reg.value * M * in.w1_ell1_init / (2.0 * in.eps_mix);
        mix.value = std::max(0.0, 2.0 + std::log(arg) / cert.c);
    }
    mix.inputs = {{"eps", in.eps_mix}, {"c", cert.c}, {"M", cert.M1 / std::sqrt(double(mfp.n))},
                  {"w1_ell1_init", in.w1_ell1_init}};
    mix.constraint_flags = cert.validity;
    mix.constraint_flags.emplace_back("step_size_constraint_mf", constraint);
    reports.push_back(mix);

    BoundReport bias;
    bias.name = "mf_tv_bias_bound";
    bias.value = h * h * (reg.value * in.M2 + c_mf.value);
    bias.inputs = {{"h", h}, {"M2", in.M2}, {"C_mf", c_mf.value}, {"reg", reg.value}};
    bias.constraint_flags = {{"step_size_constraint_mf", constraint}};
    reports.push_back(bias);
    return reports;
}

OverlapEstimate overlap_bound_mc(const PhiMapView& map, int d, int trials, RngStream& rng) {
    if (trials < 1000) throw std::invalid_argument("overlap_bound_mc: need at least 10^3 trials");
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Vec xi = rng.gaussian_vec(d);
        const Vec pxi = map.phi(xi);
        const Mat J = map.jac(xi);
        const double val = (pxi - xi).squaredNorm() + 2.0 * (J - Mat::Identity(d, d)).squaredNorm();
        sum += val;
        sumsq += val * val;
    }
    const double mean = sum / trials;
    const double var = std::max(0.0, sumsq / trials - mean * mean) / (trials - 1.0);
    OverlapEstimate est;
    est.value = std::sqrt(mean);
    est.std_error = (mean > 0.0) ? 0.5 * std::sqrt(var) / std::sqrt(mean) : std::sqrt(var);
    return est;
}

}  // namespace uhmc
