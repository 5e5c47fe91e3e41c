#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "saf/field.hpp"

namespace saf {

/// Identifies one reproducible random stream. The same (seed, stream_id)
/// always yields the same sample sequence, regardless of which worker or
/// run consumes it.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Mixes extra 64-bit tags into a stream id. Used to derive independent
/// substreams (e.g. per grid point, per trial) from one base seed.
inline std::uint64_t derive_stream(std::uint64_t base, std::uint64_t tag) {
    std::uint64_t s = base ^ (tag + 0x9e3779b97f4a7c15ULL + (base << 6) + (base >> 2));
    return detail::splitmix64(s);
}

template <typename... Tags>
std::uint64_t derive_stream(std::uint64_t base, std::uint64_t tag, Tags... rest) {
    return derive_stream(derive_stream(base, tag), static_cast<std::uint64_t>(rest)...);
}

/// xoshiro256++ generator seeded from (seed, stream_id) through splitmix64.
/// Self-contained so sequences are identical on every platform; the
/// <random> distributions are implementation-defined and would not be.
class Rng {
  public:
    explicit Rng(RngSeed s) {
        std::uint64_t sm = s.seed;
        sm = detail::splitmix64(sm) ^ s.stream_id;
        for (auto& w : state_) w = detail::splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform in (0, 1]; never returns 0 so log() below is safe.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

    /// Standard normal via Box-Muller (explicit, platform-independent).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Unit-variance scalar of the requested field: N(0,1) for double,
    /// N(0,1/2) + j N(0,1/2) for complex.
    template <Scalar T>
    T gaussian() {
        if constexpr (is_complex_v<T>) {
            const double re = normal();
            const double im = normal();
            return cx(re, im) * std::numbers::sqrt2 / 2.0;
        } else {
            return normal();
        }
    }

  private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace saf
