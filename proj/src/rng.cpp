#include "uhmc/rng.hpp"

#include <cmath>

namespace uhmc {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mul_hi_lo(kPhiloxM0, c[0], hi0, lo0);
    mul_hi_lo(kPhiloxM1, c[2], hi1, lo1);
    const std::uint32_t n0 = hi1 ^ c[1] ^ k[0];
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c[3] ^ k[1];
    const std::uint32_t n3 = lo0;
    c[0] = n0;
    c[1] = n1;
    c[2] = n2;
    c[3] = n3;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

RngStream RngStream::fork(std::uint64_t substream) const {
    return RngStream(seed_, splitmix64(stream_ ^ splitmix64(substream)));
}

std::array<std::uint32_t, 4> RngStream::next_block() {
    std::uint32_t c[4] = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32),
    };
    std::uint32_t k[2] = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    ++counter_;
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k);
        k[0] += kPhiloxW0;
        k[1] += kPhiloxW1;
    }
    return {c[0], c[1], c[2], c[3]};
}

std::uint64_t RngStream::next_u64() {
    if (buf_pos_ >= 4) {
        const auto b = next_block();
        buf_[0] = b[0];
        buf_[1] = b[1];
        buf_[2] = b[2];
        buf_[3] = b[3];
        buf_pos_ = 0;
    }
    const std::uint64_t lo = buf_[buf_pos_];
    const std::uint64_t hi = buf_[buf_pos_ + 1];
    buf_pos_ += 2;
    return (hi << 32) | lo;
}

double RngStream::uniform() {
    const std::uint64_t bits = next_u64() >> 11;  // 53 bits
    double u = static_cast<double>(bits) * 0x1.0p-53;
    if (u == 0.0) u = 0x1.0p-53;
    return u;
}

double RngStream::gaussian() {
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_gauss_ = r * std::sin(a);
    has_cached_gauss_ = true;
    return r * std::cos(a);
}

void RngStream::gaussian_fill(double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = gaussian();
}

Eigen::VectorXd RngStream::gaussian_vec(int n) {
    Eigen::VectorXd v(n);
    gaussian_fill(v.data(), static_cast<std::size_t>(n));
    return v;
}

}  // namespace uhmc
