#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace scle {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key and a 64-bit stream id; the
/// remaining 64 counter bits index blocks inside the stream. Two streams with
/// different (key, stream id) never share a block, so per-trajectory
/// streams derived from (master_seed, trajectory_index) are independent of
/// scheduling.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t key, std::uint64_t stream) noexcept;

    /// Block number `index` of this stream.
    Block block(std::uint64_t index) const noexcept;

    /// Blocks index .. index+3, interleaved for instruction-level parallelism.
    /// Identical to four calls of block().
    void blocks4(std::uint64_t index, std::uint32_t out[16]) const noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
};

/// 64-bit uniform random bit generator over one Philox stream. Word k of the
/// stream is (block k/2 words [2(k%2)], [2(k%2)+1]) as low, high halves.
class PhiloxEngine {
public:
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    PhiloxEngine(std::uint64_t key, std::uint64_t stream) noexcept : gen_(key, stream) {}

    result_type operator()() {
        if (pos_ == 16) refill();
        const std::uint64_t lo = buf_[pos_];
        const std::uint64_t hi = buf_[pos_ + 1];
        pos_ += 2;
        return lo | (hi << 32);
    }

private:
    void refill() {
        gen_.blocks4(counter_, buf_);
        counter_ += 4;
        pos_ = 0;
    }

    Philox4x32 gen_;
    std::uint64_t counter_ = 0;
    std::uint32_t buf_[16] = {};
    int pos_ = 16;
};

/// Standard-normal variates from a Philox stream (Boost.Random ziggurat).
/// Deterministic for a given (key, stream) and Boost version.
class NormalStream {
public:
    NormalStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
        : engine_(master_seed, stream_id) {}

    double next() { return dist_(engine_); }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

private:
    PhiloxEngine engine_;
    boost::random::normal_distribution<double> dist_;
};

}  // namespace scle
