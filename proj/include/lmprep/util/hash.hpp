#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace lmprep::util {

struct Hash128 {
    uint64_t lo = 0;
    uint64_t hi = 0;

    bool operator==(const Hash128&) const = default;
    bool operator<(const Hash128& o) const { return hi != o.hi ? hi < o.hi : lo < o.lo; }

    std::string hex() const {
        static const char* d = "0123456789abcdef";
        std::string s(32, '0');
        uint64_t parts[2] = {hi, lo};
        for (int p = 0; p < 2; ++p)
            for (int i = 0; i < 16; ++i)
                s[p * 16 + i] = d[(parts[p] >> (60 - 4 * i)) & 0xF];
        return s;
    }
};

struct Hash128Hasher {
    size_t operator()(const Hash128& h) const { return size_t(h.lo); }
};

namespace detail {
inline uint64_t rotl64(uint64_t x, int8_t r) { return (x << r) | (x >> (64 - r)); }

inline uint64_t fmix64(uint64_t k) {
    k ^= k >> 33;
    k *= 0xFF51AFD7ED558CCDULL;
    k ^= k >> 33;
    k *= 0xC4CEB9FE1A85EC53ULL;
    k ^= k >> 33;
    return k;
}
} // namespace detail

// MurmurHash3 x64 128-bit (public domain reference algorithm). Used for
// dedup fingerprints and content multiset checks; 128 bits make accidental
// collisions a non-issue at corpus scale.
//
// The raw-buffer entry point carries its own name on purpose: with an
// overload, murmur3_128("literal", seed) would pick the void* version via
// the standard pointer conversion and hash `seed` bytes instead.
inline Hash128 murmur3_128_bytes(const void* key, size_t len, uint64_t seed = 0) {
    using detail::fmix64;
    using detail::rotl64;
    const uint8_t* data = static_cast<const uint8_t*>(key);
    const size_t nblocks = len / 16;

    uint64_t h1 = seed, h2 = seed;
    const uint64_t c1 = 0x87C37B91114253D5ULL;
    const uint64_t c2 = 0x4CF5AD432745937FULL;

    for (size_t i = 0; i < nblocks; ++i) {
        uint64_t k1, k2;
        std::memcpy(&k1, data + i * 16, 8);
        std::memcpy(&k2, data + i * 16 + 8, 8);

        k1 *= c1; k1 = rotl64(k1, 31); k1 *= c2; h1 ^= k1;
        h1 = rotl64(h1, 27); h1 += h2; h1 = h1 * 5 + 0x52DCE729;
        k2 *= c2; k2 = rotl64(k2, 33); k2 *= c1; h2 ^= k2;
        h2 = rotl64(h2, 31); h2 += h1; h2 = h2 * 5 + 0x38495AB5;
    }

    const uint8_t* tail = data + nblocks * 16;
    uint64_t k1 = 0, k2 = 0;
    switch (len & 15) {
        case 15: k2 ^= uint64_t(tail[14]) << 48; [[fallthrough]];
        case 14: k2 ^= uint64_t(tail[13]) << 40; [[fallthrough]];
        case 13: k2 ^= uint64_t(tail[12]) << 32; [[fallthrough]];
        case 12: k2 ^= uint64_t(tail[11]) << 24; [[fallthrough]];
        case 11: k2 ^= uint64_t(tail[10]) << 16; [[fallthrough]];
        case 10: k2 ^= uint64_t(tail[9]) << 8; [[fallthrough]];
        case 9:  k2 ^= uint64_t(tail[8]);
                 k2 *= c2; k2 = rotl64(k2, 33); k2 *= c1; h2 ^= k2;
                 [[fallthrough]];
        case 8:  k1 ^= uint64_t(tail[7]) << 56; [[fallthrough]];
        case 7:  k1 ^= uint64_t(tail[6]) << 48; [[fallthrough]];
        case 6:  k1 ^= uint64_t(tail[5]) << 40; [[fallthrough]];
        case 5:  k1 ^= uint64_t(tail[4]) << 32; [[fallthrough]];
        case 4:  k1 ^= uint64_t(tail[3]) << 24; [[fallthrough]];
        case 3:  k1 ^= uint64_t(tail[2]) << 16; [[fallthrough]];
        case 2:  k1 ^= uint64_t(tail[1]) << 8; [[fallthrough]];
        case 1:  k1 ^= uint64_t(tail[0]);
                 k1 *= c1; k1 = rotl64(k1, 31); k1 *= c2; h1 ^= k1;
    }

    h1 ^= uint64_t(len);
    h2 ^= uint64_t(len);
    h1 += h2;
    h2 += h1;
    h1 = fmix64(h1);
    h2 = fmix64(h2);
    h1 += h2;
    h2 += h1;
    return Hash128{h1, h2};
}

inline Hash128 murmur3_128(std::string_view s, uint64_t seed = 0) {
    return murmur3_128_bytes(s.data(), s.size(), seed);
}

inline uint64_t murmur3_64(std::string_view s, uint64_t seed = 0) {
    return murmur3_128(s, seed).lo;
}

} // namespace lmprep::util
