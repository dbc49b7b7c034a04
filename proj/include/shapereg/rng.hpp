#pragma once

#include <cmath>
#include <cstdint>

namespace shapereg {

// Deterministic random streams. Everything below is fixed-algorithm so that
// results are bit-identical across platforms, standard libraries and thread
// counts. std::random distributions are implementation-defined and must not
// be used anywhere in this library.

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

// Stable seed derivation: base seed + up to three labels (e.g. n, replicate,
// role) are folded through the SplitMix64 finalizer. This is the documented
// hash used for all derived experiment streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = detail::mix64(base ^ 0x9E3779B97F4A7C15ull);
    h = detail::mix64(h ^ (a * 0xA24BAED4963EE407ull));
    h = detail::mix64(h ^ (b * 0x9FB21C651E98DF25ull));
    h = detail::mix64(h ^ (c * 0xD6E8FEB86659FD93ull));
    return h;
}

// Stream roles used with derive_seed. Keeping them in one place guarantees
// that independent parts of an experiment never share a stream.
namespace role {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t fit = 2;
inline constexpr std::uint64_t grid = 3;
inline constexpr std::uint64_t mc = 4;
inline constexpr std::uint64_t prototypes = 5;
inline constexpr std::uint64_t query = 6;
inline constexpr std::uint64_t oracle = 7;
} // namespace role

// SplitMix64 generator (Steele, Lea, Flood 2014). Passes BigCrush; one
// 64-bit word of state, trivially seedable.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(detail::mix64(seed ^ 0x1F123BB5159A55E5ull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return detail::mix64(state_);
    }

    /// Uniform draw in the open interval (0,1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform draw in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Lemire multiply-shift; bias < n / 2^64.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (cosine branch only).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Exponential with the given rate.
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Gamma(shape=2, rate) as a sum of two exponentials.
    double gamma2(double rate) { return exponential(rate) + exponential(rate); }

  private:
    std::uint64_t state_;
};

} // namespace shapereg
