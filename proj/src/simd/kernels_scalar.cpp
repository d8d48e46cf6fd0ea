#include "uhmc/simd/kernels.hpp"

namespace uhmc::simd {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(std::size_t n, double a, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sumsq(std::size_t n, const double* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

double dist_sq(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

void verlet_position(std::size_t n, double* q, const double* v, const double* g, double h) {
    const double c = 0.5 * h * h;
    for (std::size_t i = 0; i < n; ++i) q[i] += h * v[i] - c * g[i];
}

void velocity_kick(std::size_t n, double* v, const double* g0, const double* g1, double c) {
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * (g0[i] + g1[i]);
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k = {axpy, scal, dot, sumsq, dist_sq, verlet_position, velocity_kick, "scalar"};
    return k;
}

}  // namespace uhmc::simd
