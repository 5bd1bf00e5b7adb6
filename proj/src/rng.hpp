#pragma once

// splitmix64: tiny, seedable, platform-independent. Distributions are
// hand-rolled from the raw 64-bit stream so sampled datasets and EM inits
// are bit-for-bit reproducible across compilers and standard libraries.

#include <cstdint>

namespace fuse {

struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    SplitMix64 rng{seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL)};
    rng.next();
    return rng.next();
}

}  // namespace fuse
