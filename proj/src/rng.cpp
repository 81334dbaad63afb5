#include "oucl/rng.hpp"

#include <cmath>

namespace oucl {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t t1 = c[1];
    const std::uint32_t t3 = c[3];
    c[0] = hi1 ^ t1 ^ k0;
    c[1] = lo1;
    c[2] = hi0 ^ t3 ^ k1;
    c[3] = lo0;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
    std::uint32_t c[4] = {
        static_cast<std::uint32_t>(stream_id_),
        static_cast<std::uint32_t>(stream_id_ >> 32),
        static_cast<std::uint32_t>(block_index_),
        static_cast<std::uint32_t>(block_index_ >> 32),
    };
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    cache_[0] = (static_cast<std::uint64_t>(c[0]) << 32) | c[1];
    cache_[1] = (static_cast<std::uint64_t>(c[2]) << 32) | c[3];
    cache_pos_ = 0;
    ++block_index_;
}

std::uint64_t RngStream::next_u64() {
    if (cache_pos_ >= 2) refill();
    return cache_[cache_pos_++];
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
    return 1.0 - uniform();
}

double RngStream::exponential(double rate) {
    return -std::log(uniform_pos()) / rate;
}

double RngStream::gaussian() {
    if (has_gauss_) {
        has_gauss_ = false;
        return gauss_cache_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double theta = 6.283185307179586476925286766559 * uniform();
    gauss_cache_ = r * std::sin(theta);
    has_gauss_ = true;
    return r * std::cos(theta);
}

}  // namespace oucl
