#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpa {

using Bytes = std::vector<uint8_t>;
using Key128 = std::array<uint8_t, 16>;

inline constexpr uint64_t kSqnMax = (uint64_t{1} << 48) - 1;

inline void put_u16(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void put_u32(Bytes& out, uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(v >> shift));
}

inline void put_u48(Bytes& out, uint64_t v) {
    for (int shift = 40; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(v >> shift));
}

inline void put_u64(Bytes& out, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(v >> shift));
}

inline uint16_t read_u16(std::span<const uint8_t> in, size_t off) {
    return static_cast<uint16_t>((in[off] << 8) | in[off + 1]);
}

inline uint32_t read_u32(std::span<const uint8_t> in, size_t off) {
    uint32_t v = 0;
    for (size_t i = 0; i < 4; ++i) v = (v << 8) | in[off + i];
    return v;
}

inline uint64_t read_u48(std::span<const uint8_t> in, size_t off) {
    uint64_t v = 0;
    for (size_t i = 0; i < 6; ++i) v = (v << 8) | in[off + i];
    return v;
}

inline uint64_t read_u64(std::span<const uint8_t> in, size_t off) {
    uint64_t v = 0;
    for (size_t i = 0; i < 8; ++i) v = (v << 8) | in[off + i];
    return v;
}

/// 48-bit big-endian encoding used for SQN values in all keyed derivations.
inline std::array<uint8_t, 6> sqn_bytes(uint64_t sqn) {
    std::array<uint8_t, 6> out{};
    for (int i = 5; i >= 0; --i) {
        out[static_cast<size_t>(i)] = static_cast<uint8_t>(sqn);
        sqn >>= 8;
    }
    return out;
}

inline void append(Bytes& out, std::span<const uint8_t> data) {
    out.insert(out.end(), data.begin(), data.end());
}

inline Key128 xor128(const Key128& a, const Key128& b) {
    Key128 r;
    for (size_t i = 0; i < 16; ++i) r[i] = a[i] ^ b[i];
    return r;
}

std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(const std::string& hex);  // throws std::invalid_argument
Key128 key_from_hex(const std::string& hex);

/// 128-bit value from an integer, big-endian (handy for small test keys).
inline Key128 key_from_u64(uint64_t v) {
    Key128 k{};
    for (int i = 15; i >= 8; --i) {
        k[static_cast<size_t>(i)] = static_cast<uint8_t>(v);
        v >>= 8;
    }
    return k;
}

}  // namespace kpa
