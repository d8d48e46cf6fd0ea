#pragma once

#include <cstddef>
#include <string_view>

namespace uhmc::simd {

// Vector kernels used in the integrator and distance inner loops.
//
// Every kernel exists as a scalar reference implementation and, on x86-64,
// as an AVX2 variant. The elementwise kernels (axpy, scal, verlet_position,
// velocity_kick) are bit-identical across variants: both translation units
// are built with FP contraction off and the AVX2 code uses separate mul/add.
// The reductions (dot, sumsq, dist_sq) accumulate in four lanes and may
// differ from the scalar result by rounding; equivalence tests bound the
// relative difference.
struct Kernels {
    // y += a*x
    void (*axpy)(std::size_t n, double a, const double* x, double* y);
    // x *= a
    void (*scal)(std::size_t n, double a, double* x);
    double (*dot)(std::size_t n, const double* x, const double* y);
    double (*sumsq)(std::size_t n, const double* x);
    double (*dist_sq)(std::size_t n, const double* x, const double* y);
    // q += h*v - (h*h/2)*g   (position half of a velocity Verlet step)
    void (*verlet_position)(std::size_t n, double* q, const double* v, const double* g, double h);
    // v -= c*(g0 + g1)       (velocity kick, c = h/2)
    void (*velocity_kick)(std::size_t n, double* v, const double* g0, const double* g1, double c);
    const char* name;
};

// Kernels selected at startup: AVX2 when the CPU supports it, unless the
// environment variable UHMC_KERNELS overrides the choice ("scalar", "avx2").
const Kernels& active();

const Kernels& scalar_kernels();

// nullptr when the named variant is unavailable on this machine.
const Kernels* kernels_by_name(std::string_view name);

bool avx2_available();

}  // namespace uhmc::simd
