#include "uhmc/simd/kernels.hpp"

#if defined(UHMC_HAVE_AVX2)
#include <immintrin.h>

namespace uhmc::simd {
namespace {

// No FMA intrinsics here: the elementwise kernels must match the scalar
// reference bit for bit, so multiplies and adds stay separate.

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xi = _mm256_loadu_pd(x + i);
        __m256d yi = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(yi, _mm256_mul_pd(va, xi)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scal(std::size_t n, double a, double* x) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

double dot(std::size_t n, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sumsq(std::size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xi = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(xi, xi));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

double dist_sq(std::size_t n, const double* x, const double* y) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

void verlet_position(std::size_t n, double* q, const double* v, const double* g, double h) {
    const double c = 0.5 * h * h;
    const __m256d vh = _mm256_set1_pd(h);
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d qi = _mm256_loadu_pd(q + i);
        __m256d vi = _mm256_loadu_pd(v + i);
        __m256d gi = _mm256_loadu_pd(g + i);
        qi = _mm256_add_pd(qi, _mm256_sub_pd(_mm256_mul_pd(vh, vi), _mm256_mul_pd(vc, gi)));
        _mm256_storeu_pd(q + i, qi);
    }
    for (; i < n; ++i) q[i] += h * v[i] - c * g[i];
}

void velocity_kick(std::size_t n, double* v, const double* g0, const double* g1, double c) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vi = _mm256_loadu_pd(v + i);
        __m256d gs = _mm256_add_pd(_mm256_loadu_pd(g0 + i), _mm256_loadu_pd(g1 + i));
        _mm256_storeu_pd(v + i, _mm256_sub_pd(vi, _mm256_mul_pd(vc, gs)));
    }
    for (; i < n; ++i) v[i] -= c * (g0[i] + g1[i]);
}

}  // namespace

const Kernels* avx2_kernels_impl() {
    static const Kernels k = {axpy, scal, dot, sumsq, dist_sq, verlet_position, velocity_kick, "avx2"};
    return &k;
}

}  // namespace uhmc::simd

#else

namespace uhmc::simd {
const Kernels* avx2_kernels_impl() { return nullptr; }
}  // namespace uhmc::simd

#endif
