#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "kpa/identity.hpp"
#include "kpa/rng.hpp"

namespace kpa {

struct InsufficientPool : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientSubscribers : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PoolSource { HssProvided, SelfGenerated };

struct AssistantPool {
    std::vector<Pseudonym> entries;  // distinct, never the owner's live identity
    PoolSource source = PoolSource::SelfGenerated;
};

/// Ordered k-member identity set with exactly one live identity. The live
/// position is known only to the builder and never serialized.
struct KSet {
    std::vector<Pseudonym> members;
    size_t live_index = 0;

    const Pseudonym& live() const { return members[live_index]; }
    Bytes wire() const;
};

/// Wire form: count (u16, BE) followed by fixed-width encoded identities.
Bytes encode_members(std::span<const Pseudonym> members);
std::vector<Pseudonym> decode_members(std::span<const uint8_t> wire);

/// k-1 assistants sampled without replacement, live inserted at a uniformly
/// random position. Throws InsufficientPool when the pool is too small.
KSet build_set(const Pseudonym& live, const AssistantPool& pool, size_t k,
               Rng& rng);

/// Syntactically valid assistant identities generated deterministically
/// from (key, counter) with the same keystream mechanism as the pseudonym
/// chain, in a derivation context separate from the chain's epochs.
AssistantPool self_generate_assistants(const Key128& key, uint64_t counter,
                                       size_t n, uint16_t mcc, uint16_t mnc,
                                       const Pseudonym& live);

/// Assistants drawn from other subscribers' current shared pseudonyms;
/// the requester's own live identity is always excluded.
AssistantPool assign_assistants(std::span<const Pseudonym> others_current,
                                const Pseudonym& requester_live, size_t n,
                                Rng& rng);

}  // namespace kpa
