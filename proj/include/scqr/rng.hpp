#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace scqr {

// SplitMix64 step; used for seeding and for deriving child seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Mixes a base seed with a stream index into an independent child seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// xoshiro256** (Blackman & Vigna) seeded through SplitMix64.
///
/// Every derived quantity (uniforms, normals, integer ranges, shuffles) is
/// computed here from the raw 64-bit stream using only IEEE arithmetic, so a
/// given seed produces the same sequence on every platform. Standard library
/// distributions are deliberately not used since their output is
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;
    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Uniform on (0, 1); never returns 0.
    double uniform_open() noexcept;
    double uniform(double lo, double hi) noexcept;
    // Uniform integer in [0, n) by rejection (no modulo bias). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    // Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept;

    template <class T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace scqr
