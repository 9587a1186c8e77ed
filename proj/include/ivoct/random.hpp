#pragma once

#include <array>
#include <cstdint>

namespace ivoct {

/// Philox4x32-10 block function: encrypts a 128-bit counter under a 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// A stream is identified by (key, stream id); the n-th output block is
/// philox4x32({n, stream id}, key). No state is shared between instances, so
/// substreams obtained through split() can be consumed in any order or on any
/// thread without changing the values each one produces. All draws are
/// defined in terms of raw 32/64-bit outputs, so results are identical across
/// compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Independent child stream; same (parent, id) always yields the same child.
    [[nodiscard]] Rng split(std::uint64_t id) const;

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer on [0, n); n must be positive.
    std::uint64_t uniform_index(std::uint64_t n);
    /// Uniform integer on [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p);
    /// Standard normal via Box-Muller.
    double normal();

    [[nodiscard]] std::uint64_t key() const { return key_; }
    [[nodiscard]] std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
};

/// SplitMix64 finalizer, used to derive keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ivoct
