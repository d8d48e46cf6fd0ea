#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace uhmc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Strong-convexity certificate: (x-y).(grad U(x)-grad U(y)) >= K|x-y|^2
// whenever |x-y| >= R.
struct ConvexityProfile {
    double K = 0.0;
    double R = 0.0;
};

// Target potential with derivative access and declared smoothness constants.
// The constants are declared, never estimated; randomized probing in the test
// suite only validates them. Evaluation functions are pure and the object is
// immutable after construction, so potentials can be shared across threads.
class Potential {
public:
    using EnergyFn = std::function<double(const Vec&)>;
    using GradientFn = std::function<void(const Vec&, Vec&)>;
    using HessVecFn = std::function<void(const Vec&, const Vec&, Vec&)>;

    Potential() = default;
    Potential(int dim, EnergyFn energy, GradientFn gradient, HessVecFn hessian_vec,
              double L, double L_H, double L_I);

    int dim() const { return dim_; }
    double energy(const Vec& x) const { return energy_(x); }
    void gradient_into(const Vec& x, Vec& out) const;
    Vec gradient(const Vec& x) const;
    void hessian_vec_into(const Vec& x, const Vec& u, Vec& out) const;
    Vec hessian_vec(const Vec& x, const Vec& u) const;
    // Columns assembled through hessian_vec.
    Mat dense_hessian(const Vec& x) const;

    double lip_grad() const { return L_; }     // L  = sup |D^2 U|
    double lip_hess() const { return L_H_; }   // L_H = sup |D^3 U|
    double lip_third() const { return L_I_; }  // L_I = sup |D^4 U|

    const std::optional<ConvexityProfile>& convexity() const { return convexity_; }
    Potential& with_convexity(ConvexityProfile p) {
        convexity_ = p;
        return *this;
    }

    // Set for quadratic potentials U(x) = omega^2 |x|^2 / 2; enables the
    // closed-form Hamiltonian flow.
    std::optional<double> quadratic_curvature() const { return quadratic_curvature_; }
    Potential& with_quadratic_curvature(double omega2) {
        quadratic_curvature_ = omega2;
        return *this;
    }

    const std::string& name() const { return name_; }
    Potential& with_name(std::string n) {
        name_ = std::move(n);
        return *this;
    }

    // Gradient evaluations since construction (or last reset), shared across
    // copies of this potential. Used for the cost accounting checks.
    std::uint64_t gradient_evals() const { return grad_count_->load(std::memory_order_relaxed); }
    void reset_gradient_evals() const { grad_count_->store(0, std::memory_order_relaxed); }

private:
    int dim_ = 0;
    EnergyFn energy_;
    GradientFn gradient_;
    HessVecFn hessian_vec_;
    double L_ = 0.0;
    double L_H_ = 0.0;
    double L_I_ = 0.0;
    std::optional<ConvexityProfile> convexity_;
    std::optional<double> quadratic_curvature_;
    std::string name_ = "potential";
    std::shared_ptr<std::atomic<std::uint64_t>> grad_count_ =
        std::make_shared<std::atomic<std::uint64_t>>(0);
};

// U(x) = omega2 |x|^2 / 2. Rejects omega2 <= 0.
Potential make_gaussian(int dim, double omega2);

// U == 0 free flight; useful as a degenerate test case.
Potential make_free(int dim);

// U(x) = |x|^2/2 + a * sum_i (cos(x_i) - 1), |a| < 1.
// Globally K = 1-|a| strongly convex, so the profile carries R = 0;
// L = 1+|a|, L_H = L_I = |a|.
Potential make_double_well_tail_convex(int dim, double a);

// Mean-field system of n particles in R^k:
//   U(x) = sum_i V(x^i) + (eps/n) sum_i sum_{l != i} W(x^i - x^l).
// W must be even for the shipped examples (checked by probing in tests);
// general W is accepted but left unvalidated.
struct MeanFieldPotential {
    int n = 0;
    int k = 0;
    Potential V;
    Potential W;
    double eps = 0.0;

    double L() const { return V.lip_grad(); }
    double L_H() const { return V.lip_hess(); }
    double L_I() const { return V.lip_third(); }
    double Lt() const { return W.lip_grad(); }
    double Lt_H() const { return W.lip_hess(); }
    double Lt_I() const { return W.lip_third(); }

    // Effective constants used by the mean-field bounds.
    double L_eff() const { return L() + 4.0 * eps * Lt(); }
    double L_H_eff() const { return L_H() + 8.0 * eps * Lt_H(); }
    double L_I_eff() const { return L_I() + 14.0 * eps * Lt_I(); }
};

// Assembled potential on R^{nk}; gradient block i is
//   grad V(x^i) + (eps/n) sum_{l != i} [grad W(x^i-x^l) - grad W(x^l-x^i)].
Potential mf_assemble(const MeanFieldPotential& mfp);

// Moment inputs for the bias constants.
struct TargetMoments {
    double m2 = 0.0;                              // int |x|^2 mu(dx)
    double m4 = 0.0;                              // int |x|^4 mu(dx)
    Eigen::VectorXd per_particle_m2;              // mean-field variant
    Eigen::VectorXd per_particle_m4;
    enum class Source { analytic, monte_carlo } source = Source::analytic;
};

// Exact moments of the Gaussian target exp(-omega2 |x|^2/2).
TargetMoments gaussian_moments(int dim, double omega2);

}  // namespace uhmc
