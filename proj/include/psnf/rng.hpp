#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace psnf {

// Portable generator used everywhere randomness is needed. Standard-library
// distributions are not bit-reproducible across implementations, so the
// uniform and normal transforms live here too; every consumer documents its
// draw order against this one generator.

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Hash a (tag, index, ...) path onto a master seed to obtain an independent
/// stream seed. Used to give every sweep cell its own generator so results
/// do not depend on scheduling.
inline std::uint64_t derive_stream(std::uint64_t master,
                                   std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t w : path) s = mix64(s ^ w);
    return s;
}

/// xoshiro256++ (Blackman & Vigna), seeded through splitmix64.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1), 53-bit resolution. One next() per draw.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Integer in [0, n). Multiply-shift; bias is < n / 2^64.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Box-Muller without caching: exactly two next() per draw.
    double normal(double mean, double sd) {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/// Stream tags for derive_stream paths (kept in one place so the layout of
/// the seed space is documented).
namespace streams {
inline constexpr std::uint64_t parameter_draw = 1;
inline constexpr std::uint64_t controller = 2;
inline constexpr std::uint64_t mpc_period = 3;
}  // namespace streams

}  // namespace psnf
