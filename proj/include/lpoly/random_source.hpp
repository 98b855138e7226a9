#pragma once

#include <array>
#include <cstdint>

namespace lpoly {

/// SplitMix64 finalizer. Used for seed derivation and stable hashing.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seeded stream of uniform bits keyed on (master_seed, stream_index).
///
/// Derivation: key = mix64(master_seed ^ mix64(stream_index)); the four words
/// of xoshiro256** state are key advanced through four successive SplitMix64
/// steps. All variates below are produced by integer arithmetic plus libm
/// calls, so a seed reproduces the same draws on any IEEE-754 platform.
///
/// Not thread-safe; give each worker its own stream.
class RandomSource {
public:
    RandomSource(std::uint64_t master_seed, std::uint64_t stream_index) noexcept;

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_index() const noexcept { return stream_index_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (0, 1]; safe to take a logarithm of.
    double uniform_pos() noexcept;
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Standard exponential.
    double exponential() noexcept;
    /// Standard normal (polar method, caches the spare value).
    double normal() noexcept;
    /// Fair random sign.
    double sign() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

    /// Independent stream derived from this one's key.
    RandomSource split(std::uint64_t child) const noexcept;

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::array<std::uint64_t, 4> s_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lpoly
