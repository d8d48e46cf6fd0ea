#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

namespace uhmc {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// Streams are keyed by (seed, stream id); the block counter advances with the
// draws. Substreams derived with fork() mix a substream index into the stream
// id, so replicas, chain steps and rejection loops each get an independent,
// reproducible stream regardless of thread scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    RngStream fork(std::uint64_t substream) const;

    // uniform on [2^-53, 1], safe inside log()
    double uniform();
    double gaussian();
    void gaussian_fill(double* out, std::size_t n);
    Eigen::VectorXd gaussian_vec(int n);

    std::uint64_t stream_id() const { return stream_; }

private:
    std::array<std::uint32_t, 4> next_block();
    std::uint64_t next_u64();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::uint32_t buf_[4] = {0, 0, 0, 0};
    int buf_pos_ = 4;       // consumed
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_ = false;
};

}  // namespace uhmc
