#pragma once

#include <array>
#include <cstdint>

namespace raresim {

/// Deterministic splittable random stream. A given (seed, stream_id) pair
/// reproduces the same sequence on every run and platform; distinct stream
/// ids give statistically independent sequences, so chains and runs can
/// draw from their own streams without coordination.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
        for (auto& s : state_) s = splitmix64(x);
        // xoshiro must not start from the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Derived independent stream; does not disturb this stream's state.
    RngStream substream(std::uint64_t i) const {
        std::uint64_t x = seed_ ^ (0xbf58476d1ce4e5b9ULL * (stream_id_ + 1));
        std::uint64_t mixed = splitmix64(x) ^ (0x94d049bb133111ebULL * (i + 1));
        RngStream out;
        out.seed_ = seed_;
        out.stream_id_ = stream_id_ * 0x100000001ULL + i + 1;
        std::uint64_t y = mixed;
        for (auto& s : out.state_) s = splitmix64(y);
        if ((out.state_[0] | out.state_[1] | out.state_[2] | out.state_[3]) == 0)
            out.state_[0] = 1;
        return out;
    }

    // xoshiro256++
    std::uint64_t next_u64() {
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

    /// Uniform draw strictly inside (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Standard normal draw (inverse-CDF transform of uniform()).
    double normal();

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // rejection to avoid modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> state_{};
};

}  // namespace raresim
