#ifndef RISIM_RNG_HPP
#define RISIM_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

#include "risim/types.hpp"

namespace risim {

/// Stream tags keep random draws for different purposes statistically
/// independent under a shared master seed.
enum class Stream : std::uint32_t {
    Noise = 1,
    Symbols = 2,
    Target = 3,
    Weights = 4,
    Scene = 5,
};

/// Philox-4x32-10 counter block function (Salmon et al. counter-based RNG).
/// Pure integer arithmetic, identical output on every platform.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

/// Deterministic 64-bit sub-seed for trial q under a master seed; used to
/// hand independent, order-free seeds to parallel Monte Carlo trials.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    const auto out = philox4x32(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x1234u, 0u},
        {static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)});
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

/// Counter-based random stream keyed by (seed, stream id). Draws are a pure
/// function of (seed, stream, draw index), so any trial can be regenerated in
/// isolation regardless of execution order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    CounterRng(std::uint64_t seed, Stream tag)
        : CounterRng(seed, static_cast<std::uint64_t>(tag)) {}

    CounterRng(std::uint64_t master_seed, std::uint64_t trial_index, Stream tag)
        : CounterRng(master_seed, (trial_index << 8) | static_cast<std::uint64_t>(tag)) {}

    std::uint64_t next_u64() {
        if (!has_cached_) {
            const auto out = philox4x32({static_cast<std::uint32_t>(counter_),
                                         static_cast<std::uint32_t>(counter_ >> 32),
                                         static_cast<std::uint32_t>(stream_),
                                         static_cast<std::uint32_t>(stream_ >> 32)},
                                        key_);
            ++counter_;
            cached_ = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
            has_cached_ = true;
            return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        }
        has_cached_ = false;
        return cached_;
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller on explicit uniforms (no library
    /// distribution objects, whose output is implementation-defined).
    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return spare_normal_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_normal_ = r * std::sin(kTwoPi * u2);
        have_normal_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    /// Circularly symmetric complex normal with unit total variance.
    Complex cnormal() {
        const double re = normal();
        const double im = normal();
        return {re * 0.7071067811865476, im * 0.7071067811865476};
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t cached_ = 0;
    bool has_cached_ = false;
    double spare_normal_ = 0.0;
    bool have_normal_ = false;
};

}  // namespace risim

#endif
