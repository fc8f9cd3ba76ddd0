#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "kpa/bytes.hpp"

namespace kpa {

/// All digests in the build come from one fixed 256-bit hash (SHA-256).
using Digest = std::array<uint8_t, 32>;

Digest sha256(std::span<const uint8_t> msg);

Digest hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> msg);

/// Most-significant 40 bits of hmac_sha256(key, msg), big-endian bit order.
uint64_t hmac40(std::span<const uint8_t> key, std::span<const uint8_t> msg);

/// Deterministic keyed expansion: counter-mode over HMAC, so shorter
/// outputs are prefixes of longer ones for the same seed.
Bytes prng_expand(std::span<const uint8_t> seed, size_t out_len);

/// Milenage f1..f5 outputs for one (key, rand, sqn, amf) input.
struct MilenageOutput {
    uint64_t mac;  // f1, network authentication code (64-bit)
    uint64_t res;  // f2, RES/XRES (64-bit)
    Key128 ck;     // f3, cipher key
    Key128 ik;     // f4, integrity key
    uint64_t ak;   // f5, anonymity key (48-bit)
};

/// Fixed OP for the whole build (the value used by the published Milenage
/// conformance test set 1, so those vectors apply directly).
inline constexpr Key128 kMilenageOp = {0xcd, 0xc2, 0x02, 0xd5, 0x12, 0x3e,
                                       0x20, 0xf6, 0x2b, 0x6d, 0x67, 0x6a,
                                       0xc7, 0x2c, 0xb3, 0x18};

Key128 milenage_opc(const Key128& key, const Key128& op);

MilenageOutput milenage_with_op(const Key128& key, const Key128& op,
                                const Key128& rand, uint64_t sqn,
                                uint16_t amf);

/// Milenage with the build's fixed OP.
MilenageOutput milenage(const Key128& key, const Key128& rand, uint64_t sqn,
                        uint16_t amf);

/// AES-128 single-block encryption (the Milenage kernel).
Key128 aes128_encrypt_block(const Key128& key, const Key128& block);

}  // namespace kpa
