#pragma once

#include <cstdint>
#include <cstring>

#include "svc/expr.hpp"

namespace svc {
namespace detail {

// SipHash-2-4, the reference public-domain construction. Keyed, 64-bit,
// PRF-quality, and bit-exact everywhere, which is what sample identity needs.
inline uint64_t rotl64(uint64_t x, int b) { return (x << b) | (x >> (64 - b)); }

inline uint64_t siphash24(const void* data, size_t len, uint64_t k0, uint64_t k1) {
    uint64_t v0 = 0x736f6d6570736575ULL ^ k0;
    uint64_t v1 = 0x646f72616e646f6dULL ^ k1;
    uint64_t v2 = 0x6c7967656e657261ULL ^ k0;
    uint64_t v3 = 0x7465646279746573ULL ^ k1;

    auto round = [&] {
        v0 += v1;
        v1 = rotl64(v1, 13);
        v1 ^= v0;
        v0 = rotl64(v0, 32);
        v2 += v3;
        v3 = rotl64(v3, 16);
        v3 ^= v2;
        v0 += v3;
        v3 = rotl64(v3, 21);
        v3 ^= v0;
        v2 += v1;
        v1 = rotl64(v1, 17);
        v1 ^= v2;
        v2 = rotl64(v2, 32);
    };

    const uint8_t* p = static_cast<const uint8_t*>(data);
    const uint8_t* end = p + len - (len % 8);
    for (; p != end; p += 8) {
        uint64_t m;
        std::memcpy(&m, p, 8);
        v3 ^= m;
        round();
        round();
        v0 ^= m;
    }

    uint64_t b = static_cast<uint64_t>(len) << 56;
    switch (len & 7) {
        case 7: b |= static_cast<uint64_t>(p[6]) << 48; [[fallthrough]];
        case 6: b |= static_cast<uint64_t>(p[5]) << 40; [[fallthrough]];
        case 5: b |= static_cast<uint64_t>(p[4]) << 32; [[fallthrough]];
        case 4: b |= static_cast<uint64_t>(p[3]) << 24; [[fallthrough]];
        case 3: b |= static_cast<uint64_t>(p[2]) << 16; [[fallthrough]];
        case 2: b |= static_cast<uint64_t>(p[1]) << 8; [[fallthrough]];
        case 1: b |= static_cast<uint64_t>(p[0]); break;
        case 0: break;
    }
    v3 ^= b;
    round();
    round();
    v0 ^= b;
    v2 ^= 0xff;
    round();
    round();
    round();
    round();
    return v0 ^ v1 ^ v2 ^ v3;
}

}  // namespace detail

// Normalized keyed hash of a canonical key string: H64(key, salt) / 2^64,
// uniform on [0,1). The salt is part of the sample identity.
inline double hash_unit(const std::string& canonical_key, uint64_t salt) {
    uint64_t h = detail::siphash24(canonical_key.data(), canonical_key.size(), salt,
                                   salt ^ 0x9e3779b97f4a7c15ULL);
    return static_cast<double>(h) * 0x1p-64;
}

// Inclusion test for the hash operator: closed upper bound, h <= m. Ratio 0
// admits nothing (an empty sample, not a 2^-64 fluke).
inline bool hash_admits(const std::string& canonical_key, double ratio, uint64_t salt) {
    if (ratio <= 0.0) return false;
    if (ratio >= 1.0) return true;
    return hash_unit(canonical_key, salt) <= ratio;
}

inline std::string hash_key_of(const Record& rec, const Schema& schema,
                               const std::vector<std::string>& attrs) {
    std::string out;
    for (size_t j = 0; j < attrs.size(); ++j) {
        int i = schema.index_of(attrs[j]);
        if (i < 0) throw Error("hash attribute " + attrs[j] + " missing");
        const Value& v = rec[static_cast<size_t>(i)];
        if (v.is_null()) throw Error("null value in hashed key attribute " + attrs[j]);
        if (j) out += '\x1f';
        out += encode_field(v);
    }
    return out;
}

// Expected variance of the per-key sample-size contribution when hashing a
// non-unique attribute whose per-key multiplicity has mean mu_k and variance
// sigma2_k, at ratio m (printed per-key form).
inline double sample_size_variance(double m, double mu_k, double sigma2_k) {
    return m * (1.0 - m) * mu_k * mu_k + (1.0 - m) * sigma2_k;
}

}  // namespace svc
