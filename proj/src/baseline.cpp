#include "kpa/baseline.hpp"

namespace kpa {

Digest compute_m1(const Nonce128& n1, const Nonce128& n2,
                  const Pseudonym& identity, const Key128& key,
                  std::span<const uint8_t> kset_wire) {
    Bytes msg;
    msg.reserve(32 + kIdentityWireSize + 16 + kset_wire.size());
    append(msg, n1);
    append(msg, n2);
    const auto id = encode_identity(identity);
    append(msg, id);
    append(msg, key);
    append(msg, kset_wire);
    return hmac_sha256(key, msg);
}

std::optional<Pseudonym> server_find_identity(
    const Nonce128& n1, const Nonce128& n2,
    std::span<const Pseudonym> members, const Digest& m1,
    const std::map<Pseudonym, Key128>& key_db) {
    const Bytes wire = encode_members(members);
    for (const auto& id : members) {
        const auto it = key_db.find(id);
        if (it == key_db.end()) continue;  // unknown identity, skip
        if (compute_m1(n1, n2, id, it->second, wire) == m1) return id;
    }
    return std::nullopt;
}

Digest compute_m2(const Nonce128& n2, const Key128& key) {
    Bytes msg;
    msg.reserve(32);
    append(msg, n2);
    append(msg, key);
    return hmac_sha256(key, msg);
}

Key128 session_key(const Key128& key, const Nonce128& n1,
                   const Nonce128& n2) {
    const Key128 seed = xor128(xor128(key, n1), n2);
    const Bytes expanded = prng_expand(seed, 16);
    Key128 sk;
    std::copy(expanded.begin(), expanded.end(), sk.begin());
    return sk;
}

BaselineOutcome run_baseline_exchange(const Pseudonym& identity,
                                      const Key128& key,
                                      const AssistantPool& pool, size_t k,
                                      const std::map<Pseudonym, Key128>& key_db,
                                      Rng& rng) {
    BaselineOutcome out;
    BaselineSession& s = out.session;

    rng.fill(s.n1);  // server challenge
    s.phase = BaselinePhase::Challenged;

    rng.fill(s.n2);  // user nonce
    s.kset = build_set(identity, pool, k, rng);
    s.m1 = compute_m1(s.n1, s.n2, identity, key, s.kset.wire());
    s.phase = BaselinePhase::Responded;

    const auto found =
        server_find_identity(s.n1, s.n2, s.kset.members, s.m1, key_db);
    if (!found) return out;
    out.server_accepted = true;

    const Key128& server_key = key_db.at(*found);
    s.m2 = compute_m2(s.n2, server_key);
    out.sk_server = session_key(server_key, s.n1, s.n2);

    if (s.m2 == compute_m2(s.n2, key)) {
        out.user_accepted = true;
        out.sk_user = session_key(key, s.n1, s.n2);
        s.sk = out.sk_user;
        s.phase = BaselinePhase::Mutual;
    }
    return out;
}

}  // namespace kpa
