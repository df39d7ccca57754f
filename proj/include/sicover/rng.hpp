#pragma once

#include <cmath>
#include <cstdint>

namespace sicover {

// Counter-based stream derivation: every logical stream is keyed by a tuple
// (seed, replicate, band, atom, purpose) hashed into an independent generator
// state, so replicates can run in parallel with reproducible draws.

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t h, uint64_t v) { return mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2))); }

struct StreamKey {
    uint64_t seed = 0;
    uint64_t replicate = 0;
    uint64_t band = 0;
    uint64_t atom = 0;
    uint64_t purpose = 0;

    uint64_t digest() const {
        uint64_t h = mix64(seed);
        h = hash_combine(h, replicate);
        h = hash_combine(h, band);
        h = hash_combine(h, atom);
        h = hash_combine(h, purpose);
        return h;
    }
};

/// xoshiro256** seeded from a stream key via splitmix.
class Rng {
public:
    explicit Rng(uint64_t digest) {
        uint64_t z = digest;
        for (auto& si : s_) si = mix64(z += 0x9e3779b97f4a7c15ull);
    }
    explicit Rng(const StreamKey& key) : Rng(key.digest()) {}

    uint64_t next() {
        auto rotl = [](uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0,1) with 53-bit resolution.
    double u01() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    /// Poisson(mean). Exact inversion for small means; large means are split into
    /// independent chunks so the inversion stays numerically safe.
    uint64_t poisson(double mean) {
        if (mean <= 0) return 0;
        if (mean <= 16.0) return poisson_small(mean);
        const uint64_t chunks = uint64_t(std::ceil(mean / 16.0));
        const double part = mean / double(chunks);
        uint64_t total = 0;
        for (uint64_t i = 0; i < chunks; ++i) total += poisson_small(part);
        return total;
    }

private:
    uint64_t poisson_small(double mean) {
        const double L = std::exp(-mean);
        uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= u01();
        } while (p > L);
        return k - 1;
    }

    uint64_t s_[4];
};

}  // namespace sicover
