#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpa/bytes.hpp"
#include "kpa/crypto.hpp"
#include "kpa/zuc.hpp"

namespace kpa {

struct MalformedIdentity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChainExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Permanent subscriber identity: MCC || MNC || MSIN, with a 40-bit MSIN.
/// MCC/MNC never change under pseudonym updates.
struct Imsi {
    uint16_t mcc = 0;  // 3 decimal digits
    uint16_t mnc = 0;  // 3 decimal digits (2-digit codes zero-padded)
    uint64_t msin = 0; // < 2^40

    bool operator==(const Imsi&) const = default;
};

enum class IdentityKind : uint8_t {
    RealImsi,
    SharedPseudonym,
    Anchor,
    Assistant,
};

/// An identity as it appears on the wire. The kind tag is builder-side
/// bookkeeping only; equality and serialization ignore it.
struct Pseudonym {
    uint16_t mcc = 0;
    uint16_t mnc = 0;
    uint64_t msin = 0;
    IdentityKind kind = IdentityKind::Assistant;

    friend bool operator==(const Pseudonym& a, const Pseudonym& b) {
        return a.mcc == b.mcc && a.mnc == b.mnc && a.msin == b.msin;
    }
    friend std::strong_ordering operator<=>(const Pseudonym& a,
                                            const Pseudonym& b) {
        if (auto c = a.mcc <=> b.mcc; c != 0) return c;
        if (auto c = a.mnc <=> b.mnc; c != 0) return c;
        return a.msin <=> b.msin;
    }
};

inline Pseudonym as_identity(const Imsi& imsi) {
    return {imsi.mcc, imsi.mnc, imsi.msin, IdentityKind::RealImsi};
}

/// MCC||MNC||MSIN packed into 60 bits; unique per identity value.
inline uint64_t pack_identity(const Pseudonym& p) {
    return (static_cast<uint64_t>(p.mcc) << 50) |
           (static_cast<uint64_t>(p.mnc) << 40) | p.msin;
}

/// Wire form: 3 ASCII digits MCC, 3 ASCII digits MNC, 5 bytes MSIN (BE).
inline constexpr size_t kIdentityWireSize = 11;

std::array<uint8_t, kIdentityWireSize> encode_identity(const Pseudonym& p);

/// Throws MalformedIdentity on wrong length or non-digit MCC/MNC.
Pseudonym decode_identity(std::span<const uint8_t> wire);

/// ZUC initialization vector from the shared key and an SQN value:
/// Rand = high 128 bits of H(SQN); IV = high64(f3) || low64(f4).
Key128 derive_iv(const Key128& key, uint64_t sqn);

/// High `bits` bits of the 64-bit concatenation w1||w2.
constexpr uint64_t expand_words(uint32_t w1, uint32_t w2, unsigned bits) {
    const uint64_t joined = (static_cast<uint64_t>(w1) << 32) | w2;
    return bits >= 64 ? joined : joined >> (64 - bits);
}

/// Two successive keystream words expanded to a 40-bit mask: the high
/// 40 bits of w1||w2.
uint64_t keystream40(Zuc& zuc);

/// Toy-width variant of the 40-bit expansion (bits in [1, 64]).
uint64_t keystream_bits(Zuc& zuc, unsigned bits);

/// Anchor pseudonym P0 = MCC || MNC || (MSIN ^ HMAC40(key, SQN)).
Pseudonym anchor_pseudonym(const Key128& key, const Imsi& imsi, uint64_t sqn);

enum class SqnCounter { Imsi, P0 };

/// Flat persisted form of a chain (hex fields, fixed order).
struct ChainRecord {
    Key128 key{};
    uint16_t mcc = 0;
    uint16_t mnc = 0;
    uint64_t msin = 0;
    uint64_t sqn_imsi = 0;
    uint64_t sqn_p0 = 0;
    uint64_t count = 0;
    uint64_t index = 0;

    bool operator==(const ChainRecord&) const = default;
};

/// Synchronized per-subscriber pseudonym state. UE and HSS each hold one;
/// running the same operations on both sides keeps them identical.
///
/// sqn_imsi is the authentication SQN counter (advanced once per issued
/// vector). sqn_p0 is the anchor counter: set to the SQN of the first
/// authentication, advanced only on recovery, and always equal to the seed
/// of the current keystream epoch -- which is what makes a chain fully
/// reproducible from its flat record.
class PseudonymChain {
public:
    PseudonymChain(const Key128& key, const Imsi& imsi, uint64_t initial_sqn);

    const Key128& key() const { return key_; }
    const Imsi& imsi() const { return imsi_; }
    uint64_t sqn_imsi() const { return sqn_imsi_; }
    uint64_t sqn_p0() const { return sqn_p0_; }
    uint64_t count() const { return count_; }
    uint64_t index() const { return index_; }
    bool active() const { return index_ > 0; }
    bool has_anchor() const { return has_anchor_; }

    /// Current shared pseudonym P_i. Only valid when active().
    const Pseudonym& current() const;

    /// Current anchor pseudonym P0, derived from sqn_p0.
    Pseudonym anchor() const;

    /// Throws ChainExhausted when the counter would pass 2^48 - 1.
    void advance_sqn(SqnCounter which);

    void set_sqn_imsi(uint64_t value);

    /// Establish the anchor context from the SQN of the first successful
    /// authentication. Starts the initial keystream epoch.
    void establish_anchor(uint64_t first_auth_sqn);

    /// Restart the keystream epoch from the current anchor counter
    /// (recovery path: advance_sqn(P0) first, then rebuild).
    void rebuild_epoch();

    /// Draw the next 40-bit mask from the epoch keystream; count += 2.
    uint64_t expand_keystream_40();

    /// Next shared pseudonym P_i = MCC || MNC || (MSIN ^ K_s); index += 1.
    const Pseudonym& next_pseudonym();

    ChainRecord to_record() const;

    /// Rebuilds a chain from its record by replaying the current epoch
    /// (count/2 updates from the sqn_p0 seed).
    static PseudonymChain from_record(const ChainRecord& rec);

private:
    void begin_epoch(uint64_t seed_sqn);

    Key128 key_;
    Imsi imsi_;
    uint64_t sqn_imsi_;
    uint64_t sqn_p0_ = 0;
    uint64_t count_ = 0;
    uint64_t index_ = 0;
    bool has_anchor_ = false;
    Pseudonym current_{};
    std::optional<Zuc> zuc_;
};

std::string format_record(const ChainRecord& rec);
ChainRecord parse_record(const std::string& line);  // throws MalformedIdentity

void save_registry(const std::string& path,
                   std::span<const ChainRecord> records);
std::vector<ChainRecord> load_registry(const std::string& path);

}  // namespace kpa
