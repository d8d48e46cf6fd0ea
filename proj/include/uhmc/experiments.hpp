#pragma once

#include <optional>

#include "uhmc/bounds.hpp"
#include "uhmc/config.hpp"
#include "uhmc/coupling.hpp"
#include "uhmc/validation.hpp"

namespace uhmc {

struct ExperimentResult {
    int exit_code = 0;
    std::string summary;  // printed by the CLI
};

Potential model_from_config(const Config& cfg);
std::optional<MeanFieldPotential> mean_field_from_config(const Config& cfg);
IntegratorParams params_from_config(const Config& cfg);

ExperimentResult run_sample(const Config& cfg);
ExperimentResult run_couple(const Config& cfg);
ExperimentResult run_mixing_time(const Config& cfg);
ExperimentResult run_bias_scan(const Config& cfg);
ExperimentResult run_validation(const Config& cfg);
ExperimentResult run_bounds(const Config& cfg);

// 1D uHMC kernel on the gaussian target is the AR(1) chain
// x' = A x + B xi; the invariant variance is B^2 / (1 - A^2).
struct GaussianKernelOracle {
    double A = 0.0;
    double B = 0.0;
    double sigma_tilde2() const { return B * B / (1.0 - A * A); }
};
GaussianKernelOracle gaussian_kernel_oracle(double omega2, const IntegratorParams& p);

}  // namespace uhmc
