#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace ducs {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel Random
/// Numbers: As Easy as 1, 2, 3", SC'11).
///
/// The 64-bit key is the user seed; the high half of the 128-bit counter is a
/// stream id, so any (seed, stream) pair yields an independent sequence and
/// the whole state is two integers. Output is reproducible across platforms
/// and thread counts by construction.
class PhiloxRng {
public:
    using Block = std::array<std::uint32_t, 4>;

    PhiloxRng(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// One raw 128-bit block for a given block index. Stateless; the
    /// stateful draw methods below consume consecutive blocks.
    static Block block(std::array<std::uint32_t, 2> key, const Block& counter) {
        Block ctr = counter;
        for (int round = 0; round < 10; ++round) {
            const auto [hi0, lo0] = mulhilo(kMul0, ctr[0]);
            const auto [hi1, lo1] = mulhilo(kMul1, ctr[2]);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

    std::uint32_t next_u32() {
        if (buffer_pos_ == 4) refill();
        return buffer_[buffer_pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal deviate via Box-Muller; the paired deviate is cached.
    double next_normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        // Map to (0,1] so the log argument is never zero.
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_normal_ = radius * std::sin(angle);
        has_cached_normal_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform integer in [0, bound) via Lemire's multiply-shift.
    std::uint64_t next_below(std::uint64_t bound) {
        const unsigned __int128 product =
            static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(product >> 64);
    }

    /// Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::pair<std::uint32_t, std::uint32_t> mulhilo(std::uint32_t a,
                                                           std::uint32_t b) {
        const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
        return {static_cast<std::uint32_t>(product >> 32),
                static_cast<std::uint32_t>(product)};
    }

    void refill() {
        const Block counter = {static_cast<std::uint32_t>(block_index_),
                               static_cast<std::uint32_t>(block_index_ >> 32),
                               static_cast<std::uint32_t>(stream_),
                               static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = block(key_, counter);
        ++block_index_;
        buffer_pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    int buffer_pos_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Stream-id layout: one domain per consumer so seeds never collide across
/// subsystems; `index` distinguishes e.g. epochs within a domain.
namespace rng_stream {

enum Domain : std::uint64_t {
    kWeightInit = 0,
    kShuffle = 1,
    kBlobCenters = 2,
    kBlobSamples = 3,
    kSplit = 4,
    kRandomScores = 5,
};

inline std::uint64_t make(Domain domain, std::uint64_t index = 0) {
    return (static_cast<std::uint64_t>(domain) << 48) | (index & 0xFFFFFFFFFFFFull);
}

} // namespace rng_stream

} // namespace ducs
