#pragma once

#include <cstdint>
#include <string_view>

namespace subgcache {

// splitmix64: tiny, portable, and fully specified, unlike <random>
// distributions whose output is implementation-defined. All frozen weights
// and salts in this project derive from it so results are identical across
// compilers and platforms.
struct SplitMix64 {
    uint64_t state;

    explicit constexpr SplitMix64(uint64_t seed) : state(seed) {}

    constexpr uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [lo, hi) from the top 24 bits; exact in float.
    float uniform(float lo, float hi) {
        float u = static_cast<float>(next() >> 40) * 0x1.0p-24f;
        return lo + (hi - lo) * u;
    }

    double uniform_double(double lo, double hi) {
        double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }
};

constexpr uint64_t splitmix64_once(uint64_t x) {
    SplitMix64 s(x);
    return s.next();
}

// FNV-1a, used for text hashing and content digests.
constexpr uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr uint64_t fnv1a64_bytes(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace subgcache
