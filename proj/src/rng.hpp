#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace dpc {

// Counter-based seeding plus xoshiro256++. Deterministic across platforms
// and compilers, unlike the std:: distributions, and each stream index gets
// a statistically independent generator. Streams are assigned to work items
// (one per trace), never to threads, so trace i sees the same draws no
// matter how many workers run.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Xoshiro256pp {
public:
    Xoshiro256pp() : Xoshiro256pp(0, 0) {}

    Xoshiro256pp(std::uint64_t master_seed, std::uint64_t stream) {
        std::uint64_t sm = master_seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
        for (auto& w : s_) w = splitmix64(sm);
        // all-zero state is the one invalid state
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // strictly positive exponential deviate; rate <= 0 means the clock never fires
    double exponential(double rate) {
        if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
        return -std::log1p(-uniform()) / rate;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace dpc
