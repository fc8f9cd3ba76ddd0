#include "doctest.h"

#include <set>

#include "kpa/baseline.hpp"

using namespace kpa;

namespace {

struct Fixture {
    Rng rng{51};
    Pseudonym live{460, 11, 0xABCDE, IdentityKind::RealImsi};
    Key128 key = key_from_u64(77);
    AssistantPool pool;
    std::map<Pseudonym, Key128> key_db;

    Fixture() {
        std::set<uint64_t> seen{live.msin};
        while (pool.entries.size() < 100) {
            const uint64_t msin = rng.next_u40();
            if (!seen.insert(msin).second) continue;
            pool.entries.push_back({460, 11, msin, IdentityKind::Assistant});
        }
        key_db[live] = key;
    }
};

}  // namespace

TEST_CASE("m1 is deterministic and sensitive to every input") {
    Fixture f;
    Nonce128 n1{};
    Nonce128 n2{};
    f.rng.fill(n1);
    f.rng.fill(n2);
    const KSet set = build_set(f.live, f.pool, 4, f.rng);
    const Bytes wire = set.wire();

    const Digest m1 = compute_m1(n1, n2, f.live, f.key, wire);
    CHECK(compute_m1(n1, n2, f.live, f.key, wire) == m1);

    int n1_collisions = 0;
    for (int i = 0; i < 10000; ++i) {
        Nonce128 other = n1;
        other[f.rng.below(16)] ^= static_cast<uint8_t>(1u << f.rng.below(8));
        if (compute_m1(other, n2, f.live, f.key, wire) == m1) ++n1_collisions;
    }
    CHECK(n1_collisions == 0);

    // serialization is order-sensitive
    KSet reordered = set;
    std::swap(reordered.members[0], reordered.members[1]);
    CHECK(compute_m1(n1, n2, f.live, f.key, reordered.wire()) != m1);
}

TEST_CASE("server finds the live identity at any position") {
    Fixture f;
    Nonce128 n1{};
    Nonce128 n2{};
    f.rng.fill(n1);
    f.rng.fill(n2);

    for (size_t pos = 0; pos < 4; ++pos) {
        KSet set = build_set(f.live, f.pool, 4, f.rng);
        // move the live member to the target position
        std::swap(set.members[set.live_index], set.members[pos]);
        set.live_index = pos;
        const Digest m1 = compute_m1(n1, n2, f.live, f.key, set.wire());
        const auto found =
            server_find_identity(n1, n2, set.members, m1, f.key_db);
        REQUIRE(found.has_value());
        CHECK(*found == f.live);
    }
}

TEST_CASE("server rejects sets of unknown identities and wrong keys") {
    Fixture f;
    Nonce128 n1{};
    Nonce128 n2{};
    f.rng.fill(n1);
    f.rng.fill(n2);

    // all members unknown to the key database
    KSet strangers;
    strangers.members.assign(f.pool.entries.begin(),
                             f.pool.entries.begin() + 4);
    strangers.live_index = 0;
    const Digest m1 =
        compute_m1(n1, n2, strangers.members[0], f.key, strangers.wire());
    CHECK_FALSE(
        server_find_identity(n1, n2, strangers.members, m1, f.key_db));

    // M1 computed under a different key never verifies
    int accepted = 0;
    for (int i = 0; i < 10000; ++i) {
        const KSet set = build_set(f.live, f.pool, 4, f.rng);
        const Key128 wrong = f.rng.key();
        const Digest forged = compute_m1(n1, n2, f.live, wrong, set.wire());
        if (server_find_identity(n1, n2, set.members, forged, f.key_db))
            ++accepted;
    }
    CHECK(accepted == 0);
}

TEST_CASE("m2 authenticates the server to the user") {
    Fixture f;
    Nonce128 n2{};
    f.rng.fill(n2);
    CHECK(compute_m2(n2, f.key) == compute_m2(n2, f.key));
    CHECK(compute_m2(n2, f.key) != compute_m2(n2, key_from_u64(78)));
}

TEST_CASE("session keys agree across both ends and mix both nonces") {
    Fixture f;
    Nonce128 n1{};
    Nonce128 n2{};
    f.rng.fill(n1);
    f.rng.fill(n2);

    CHECK(session_key(f.key, n1, n2) == session_key(f.key, n1, n2));
    // xor commutativity: nonce order does not matter
    CHECK(session_key(f.key, n1, n2) == session_key(f.key, n2, n1));

    int collisions = 0;
    for (int i = 0; i < 10000; ++i) {
        Nonce128 flipped = n2;
        flipped[f.rng.below(16)] ^= static_cast<uint8_t>(1u << f.rng.below(8));
        if (session_key(f.key, n1, flipped) == session_key(f.key, n1, n2))
            ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("honest exchange completes for any k and live position") {
    Fixture f;
    for (size_t k : {1u, 2u, 4u, 8u, 16u}) {
        for (int rep = 0; rep < 20; ++rep) {
            const BaselineOutcome out = run_baseline_exchange(
                f.live, f.key, f.pool, k, f.key_db, f.rng);
            CHECK(out.server_accepted);
            CHECK(out.user_accepted);
            CHECK(out.sk_user == out.sk_server);
            CHECK(out.session.phase == BaselinePhase::Mutual);
        }
    }
}

TEST_CASE("forgeries without the key never authenticate") {
    Fixture f;
    Nonce128 n1{};
    Nonce128 n2{};
    int accepted = 0;
    for (int i = 0; i < 2000; ++i) {
        f.rng.fill(n1);
        f.rng.fill(n2);
        const KSet set = build_set(f.live, f.pool, 4, f.rng);
        Digest forged;
        f.rng.fill(forged);
        if (server_find_identity(n1, n2, set.members, forged, f.key_db))
            ++accepted;
    }
    CHECK(accepted == 0);
}
