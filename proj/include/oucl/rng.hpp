#pragma once

#include <cstdint>

namespace oucl {

// Counter-based random stream (Philox4x32-10).  A stream is keyed by
// (seed, stream_id) and produces the same sequence on every platform and
// under any parallel schedule; distinct stream_ids give independent streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();

    double uniform();      // [0, 1)
    double uniform_pos();  // (0, 1]
    double exponential(double rate);
    double gaussian();     // N(0,1), Box-Muller

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_index_ = 0;
    std::uint64_t cache_[2];
    int cache_pos_ = 2;
    double gauss_cache_ = 0.0;
    bool has_gauss_ = false;
};

}  // namespace oucl
