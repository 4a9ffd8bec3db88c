#pragma once
// Tiny deterministic RNG (splitmix64): bit-identical across platforms, which
// keeps seeded runs reproducible everywhere (std distributions are not).

#include <cstdint>

namespace windsim {

struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform01() { return (next() >> 11) * 0x1.0p-53; }           // [0, 1)
    double sym() { return 2.0 * uniform01() - 1.0; }                    // [-1, 1)
    double range(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    int irange(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

}  // namespace windsim
