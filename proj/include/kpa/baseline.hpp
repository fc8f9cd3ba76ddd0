#pragma once

#include <map>
#include <optional>

#include "kpa/crypto.hpp"
#include "kpa/kset.hpp"

namespace kpa {

using Nonce128 = std::array<uint8_t, 16>;

/// The basic k-pseudonym challenge-response protocol: a static identity
/// hidden in a k-set, mutual authentication via two keyed digests, and a
/// session key from the shared transcript. Kept as the comparison baseline
/// for the attack simulations.

/// M1 = HMAC(Key, N1 || N2 || C || Key || serialized k-set).
Digest compute_m1(const Nonce128& n1, const Nonce128& n2,
                  const Pseudonym& identity, const Key128& key,
                  std::span<const uint8_t> kset_wire);

/// In-order traversal of the set; identities without a registered key are
/// skipped. Returns the first member whose recomputed M1 matches.
std::optional<Pseudonym> server_find_identity(
    const Nonce128& n1, const Nonce128& n2,
    std::span<const Pseudonym> members, const Digest& m1,
    const std::map<Pseudonym, Key128>& key_db);

/// M2 = HMAC(Key, N2 || Key); the user checks it to authenticate the server.
Digest compute_m2(const Nonce128& n2, const Key128& key);

/// SK = PRNG(Key ^ N1 ^ N2), truncated to 128 bits.
Key128 session_key(const Key128& key, const Nonce128& n1,
                   const Nonce128& n2);

enum class BaselinePhase { Requested, Challenged, Responded, Mutual };

struct BaselineSession {
    Nonce128 n1{};
    Nonce128 n2{};
    KSet kset;
    Digest m1{};
    Digest m2{};
    Key128 sk{};
    BaselinePhase phase = BaselinePhase::Requested;
};

struct BaselineOutcome {
    bool server_accepted = false;
    bool user_accepted = false;
    Key128 sk_user{};
    Key128 sk_server{};
    BaselineSession session;
};

/// One full honest exchange driven end to end.
BaselineOutcome run_baseline_exchange(const Pseudonym& identity,
                                      const Key128& key,
                                      const AssistantPool& pool, size_t k,
                                      const std::map<Pseudonym, Key128>& key_db,
                                      Rng& rng);

}  // namespace kpa
