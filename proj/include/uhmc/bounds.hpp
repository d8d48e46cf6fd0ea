#pragma once

#include <string>
#include <utility>
#include <vector>

#include "uhmc/metrics.hpp"
#include "uhmc/model.hpp"

namespace uhmc {

// Contraction certificate for the W^1 convergence assumption:
//   W^1(nu pi^m, mu) <= M1 e^{-c m} W^1(nu, mu).
struct RateCertificate {
    double c = 0.0;
    double M1 = 1.0;
    enum class Source { logconcave_synchronous, nonconvex_BEZ, mean_field_BS, user_supplied };
    Source source = Source::user_supplied;
    // Every precondition of the source formula, re-evaluated; a false flag
    // means the numbers are still produced but not guaranteed.
    std::vector<std::pair<std::string, bool>> validity;

    bool all_valid() const {
        for (const auto& [_, ok] : validity)
            if (!ok) return false;
        return true;
    }
};

struct BoundReport {
    std::string name;
    double value = 0.0;
    std::vector<std::pair<std::string, double>> inputs;
    std::vector<std::pair<std::string, bool>> constraint_flags;
};

// (3/2) (T^-2 + 27 d L_H^2 T^4)^{1/2}: converts W^1 distance into TV distance
// after one transition step.
double regularization_constant(double T, int d, double L_H);

// 2 + (1/c) log( 3 (T^-2 + 27 d L_H^2 T^4)^{1/2} M1 W1 / (2 eps) ),
// clamped below at zero.
double mixing_time_bound(double eps, const RateCertificate& cert, double w1_init, double T, int d,
                         double L_H);

// TV bound after m + 1 transitions:
//   (3/2) (T^-2 + 27 d L_H^2 T^4)^{1/2} M1 W1 e^{-c m};
// log-linear in m by construction (consecutive values differ by e^{-c}
// exactly).
double tv_convergence_bound(int m, const RateCertificate& cert, double w1_init, double T, int d,
                            double L_H);

struct BiasConstantBreakdown {
    double d3_group = 0.0;
    double d2_group = 0.0;
    double d1_group = 0.0;
    double m2_group = 0.0;
    double m4_group = 0.0;
    double value = 0.0;  // sqrt of the sum
};

// The constant C of the invariant-measure bias bound.
BiasConstantBreakdown bias_constant_C(int d, double T, double L, double L_H, double L_I,
                                      const TargetMoments& moments);

// h^2 [ (3/2) (T^-2 + 27 d L_H^2 T^4)^{1/2} M2 + C ]
double tv_bias_bound(double h, double T, int d, double L_H, double M2, double C);

// Rate certificate for (asymptotically) strongly logconcave targets:
// R = 0: synchronous coupling, c = K T^2 / 10, M1 = 1;
// R > 0: M1 = exp((5/2)(1 + (4R/T) sqrt((L+K)/K))),
//        c = (K T^2 / 156) exp(-10 (R/T) sqrt((L+K)/K)).
RateCertificate logconcave_rates(double K, double L, double R, double T, double h);

// Componentwise-coupling certificate for the mean-field model; same (M, c)
// formulas with the V constants, plus the interaction-strength precondition.
// In the Euclidean metric A5 holds with M1 = sqrt(n) M.
RateCertificate mean_field_rates(const MeanFieldPotential& mfp, double K, double R, double T,
                                 double h);

// Inputs consumed by the mean-field bound set that are not derivable from the
// potential itself.
struct MeanFieldBoundInputs {
    TargetMoments moments;       // per-particle vectors filled
    double K = 1.0;              // convexity constants of V
    double R = 0.0;
    double M2 = 0.0;             // A6 constant for the ell_1 Wasserstein bias
    double w1_ell1_init = 1.0;   // W^1_{ell_1}(mu_tilde, nu)
    double eps_mix = 0.05;       // accuracy for the mixing-time bound
};

// Regularization prefactor, C_mf, the mixing-time bound and the bias bound
// for the mean-field model.
std::vector<BoundReport> mean_field_bounds(const MeanFieldPotential& mfp, double T, double h,
                                           const MeanFieldBoundInputs& in);

struct OverlapEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Monte-Carlo estimate of sqrt( E[ |Phi(xi)-xi|^2 + 2 |DPhi(xi)-I|_F^2 ] ),
// the overlap bound on TV(Law(xi), Law(Phi(xi))).
OverlapEstimate overlap_bound_mc(const PhiMapView& map, int d, int trials, RngStream& rng);

}  // namespace uhmc
