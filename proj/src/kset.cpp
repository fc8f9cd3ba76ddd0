#include "kpa/kset.hpp"

#include <algorithm>
#include <set>

namespace kpa {

Bytes KSet::wire() const { return encode_members(members); }

Bytes encode_members(std::span<const Pseudonym> members) {
    Bytes out;
    out.reserve(2 + members.size() * kIdentityWireSize);
    put_u16(out, static_cast<uint16_t>(members.size()));
    for (const auto& m : members) {
        const auto enc = encode_identity(m);
        out.insert(out.end(), enc.begin(), enc.end());
    }
    return out;
}

std::vector<Pseudonym> decode_members(std::span<const uint8_t> wire) {
    if (wire.size() < 2)
        throw MalformedIdentity("kset: truncated wire form");
    const size_t count = read_u16(wire, 0);
    if (wire.size() != 2 + count * kIdentityWireSize)
        throw MalformedIdentity("kset: wire length does not match count");
    std::vector<Pseudonym> members;
    members.reserve(count);
    for (size_t i = 0; i < count; ++i)
        members.push_back(
            decode_identity(wire.subspan(2 + i * kIdentityWireSize,
                                         kIdentityWireSize)));
    return members;
}

KSet build_set(const Pseudonym& live, const AssistantPool& pool, size_t k,
               Rng& rng) {
    if (k < 1) throw InsufficientPool("kset: k must be >= 1");

    std::vector<size_t> usable;
    usable.reserve(pool.entries.size());
    for (size_t i = 0; i < pool.entries.size(); ++i)
        if (!(pool.entries[i] == live)) usable.push_back(i);

    if (usable.size() < k - 1)
        throw InsufficientPool("kset: pool too small for requested k");

    KSet set;
    set.members.reserve(k);
    for (size_t idx : rng.sample_indices(usable.size(), k - 1)) {
        Pseudonym assistant = pool.entries[usable[idx]];
        assistant.kind = IdentityKind::Assistant;
        set.members.push_back(assistant);
    }
    set.live_index = static_cast<size_t>(rng.below(k));
    set.members.insert(set.members.begin() +
                           static_cast<ptrdiff_t>(set.live_index),
                       live);
    return set;
}

namespace {

// Assistant generation runs the keystream from its own derivation context:
// the hash input is domain-tagged so it can never coincide with a chain
// epoch's 48-bit SQN encoding.
Key128 assistant_iv(const Key128& key, uint64_t counter) {
    Bytes tagged;
    tagged.reserve(14);
    const char* tag = "assist";
    tagged.insert(tagged.end(), tag, tag + 6);
    put_u64(tagged, counter);
    const Digest h = sha256(tagged);
    Key128 rand;
    std::copy(h.begin(), h.begin() + 16, rand.begin());
    const MilenageOutput mo = milenage(key, rand, 0, 0);
    Key128 iv;
    std::copy(mo.ck.begin(), mo.ck.begin() + 8, iv.begin());
    std::copy(mo.ik.begin() + 8, mo.ik.end(), iv.begin() + 8);
    return iv;
}

}  // namespace

AssistantPool self_generate_assistants(const Key128& key, uint64_t counter,
                                       size_t n, uint16_t mcc, uint16_t mnc,
                                       const Pseudonym& live) {
    if (n < 1)
        throw InsufficientPool("assistants: n must be >= 1");
    AssistantPool pool;
    pool.source = PoolSource::SelfGenerated;
    pool.entries.reserve(n);
    Zuc zuc(key, assistant_iv(key, counter));
    std::set<uint64_t> seen;
    while (pool.entries.size() < n) {
        const uint64_t msin = keystream40(zuc);
        Pseudonym cand{mcc, mnc, msin, IdentityKind::Assistant};
        if (cand == live || !seen.insert(msin).second) continue;
        pool.entries.push_back(cand);
    }
    return pool;
}

AssistantPool assign_assistants(std::span<const Pseudonym> others_current,
                                const Pseudonym& requester_live, size_t n,
                                Rng& rng) {
    std::vector<Pseudonym> usable;
    usable.reserve(others_current.size());
    std::set<Pseudonym> seen;
    for (const auto& p : others_current) {
        if (p == requester_live) continue;
        if (!seen.insert(p).second) continue;
        usable.push_back(p);
    }
    if (usable.size() < n)
        throw InsufficientSubscribers(
            "assistants: not enough active subscribers");
    AssistantPool pool;
    pool.source = PoolSource::HssProvided;
    pool.entries.reserve(n);
    for (size_t idx : rng.sample_indices(usable.size(), n)) {
        Pseudonym p = usable[idx];
        p.kind = IdentityKind::Assistant;
        pool.entries.push_back(p);
    }
    return pool;
}

}  // namespace kpa
