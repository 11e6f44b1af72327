#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lmprep::util {

// splitmix64, used to spread user seeds and to mix several seed words into
// one engine seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t a) {
    uint64_t s = a;
    return splitmix64(s);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t s = a;
    uint64_t x = splitmix64(s);
    s ^= b + 0x9E3779B97F4A7C15ULL + (x << 6) + (x >> 2);
    return splitmix64(s);
}

inline uint64_t mix_seed(uint64_t a, uint64_t b, uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// Deterministic RNG wrapper. std::mt19937_64 output is fully specified by
// the standard; the bounded/real draws below avoid std::*_distribution,
// whose algorithms are implementation-defined. Everything here is therefore
// bit-stable across platforms and compilers.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(mix_seed(seed)) {}
    Rng(uint64_t seed_a, uint64_t seed_b) : engine_(mix_seed(seed_a, seed_b)) {}
    Rng(uint64_t seed_a, uint64_t seed_b, uint64_t seed_c)
        : engine_(mix_seed(seed_a, seed_b, seed_c)) {}

    uint64_t next_u64() { return engine_(); }

    // Unbiased draw from [0, bound) by rejection.
    uint64_t next_below(uint64_t bound) {
        if (bound <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return double(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

// In-place Fisher-Yates shuffle; exact uniform permutation given the seed.
template <class T>
void seeded_shuffle(std::vector<T>& items, uint64_t seed) {
    Rng rng(seed);
    for (size_t i = items.size(); i > 1; --i) {
        size_t j = size_t(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace lmprep::util
