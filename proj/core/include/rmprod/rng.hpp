#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rmprod {

/// Philox4x32-10 block function: maps (counter, key) to 128 random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer; used to derive independent keys from (seed, tag).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based random stream. The stream is a pure function of
/// (key, stream id): two objects built from the same pair produce the same
/// sequence, independent of what any other stream did. Cheap to construct,
/// so every Monte Carlo trial gets its own.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t key, std::uint64_t stream_id) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }
    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal (Box-Muller; the second variate is cached).
    double normal() noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rmprod
