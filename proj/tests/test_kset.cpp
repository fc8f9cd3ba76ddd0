#include "doctest.h"

#include <set>

#include "kpa/kset.hpp"
#include "kpa/stats.hpp"

using namespace kpa;

namespace {

AssistantPool make_pool(size_t n, Rng& rng) {
    AssistantPool pool;
    pool.source = PoolSource::HssProvided;
    std::set<uint64_t> seen;
    while (pool.entries.size() < n) {
        const uint64_t msin = rng.next_u40();
        if (!seen.insert(msin).second) continue;
        pool.entries.push_back({460, 11, msin, IdentityKind::Assistant});
    }
    return pool;
}

}  // namespace

TEST_CASE("build_set: degenerate k=1 and basic structure") {
    Rng rng(41);
    const Pseudonym live{460, 11, 77, IdentityKind::RealImsi};
    const AssistantPool pool = make_pool(100, rng);

    const KSet k1 = build_set(live, pool, 1, rng);
    REQUIRE(k1.members.size() == 1);
    CHECK(k1.members[0] == live);
    CHECK(k1.live_index == 0);

    const KSet k4 = build_set(live, pool, 4, rng);
    REQUIRE(k4.members.size() == 4);
    CHECK(k4.live() == live);
    std::set<Pseudonym> distinct(k4.members.begin(), k4.members.end());
    CHECK(distinct.size() == 4);
    size_t live_hits = 0;
    for (const auto& m : k4.members) live_hits += (m == live) ? 1 : 0;
    CHECK(live_hits == 1);
}

TEST_CASE("build_set rejects a pool that is too small") {
    Rng rng(42);
    const Pseudonym live{460, 11, 77, IdentityKind::RealImsi};
    const AssistantPool small = make_pool(2, rng);
    CHECK_THROWS_AS(build_set(live, small, 4, rng), InsufficientPool);

    // entries equal to the live identity do not count
    AssistantPool tainted = make_pool(3, rng);
    tainted.entries[0] = live;
    CHECK_THROWS_AS(build_set(live, tainted, 4, rng), InsufficientPool);
}

TEST_CASE("live position is uniform over many builds") {
    Rng rng(43);
    const Pseudonym live{460, 11, 77, IdentityKind::RealImsi};
    const AssistantPool pool = make_pool(100, rng);

    constexpr size_t kBuilds = 10000;
    uint64_t counts[4] = {0, 0, 0, 0};
    for (size_t i = 0; i < kBuilds; ++i) {
        const KSet set = build_set(live, pool, 4, rng);
        REQUIRE(set.members[set.live_index] == live);
        counts[set.live_index] += 1;
    }
    const double stat = chi_square_uniform(std::span(counts, 4));
    CHECK(stat < chi2_quantile(0.99, 3));  // p > 0.01
}

TEST_CASE("wire form carries members only, in order") {
    Rng rng(44);
    const Pseudonym live{460, 11, 77, IdentityKind::RealImsi};
    const AssistantPool pool = make_pool(16, rng);
    const KSet set = build_set(live, pool, 5, rng);

    const Bytes wire = set.wire();
    CHECK(wire.size() == 2 + 5 * kIdentityWireSize);
    const auto decoded = decode_members(wire);
    REQUIRE(decoded.size() == set.members.size());
    for (size_t i = 0; i < decoded.size(); ++i)
        CHECK(decoded[i] == set.members[i]);

    // identical member lists with different live positions serialize
    // identically: position information never reaches the wire
    KSet moved = set;
    moved.live_index = (set.live_index + 1) % set.members.size();
    CHECK(moved.wire() == wire);

    Bytes truncated = wire;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_members(truncated), MalformedIdentity);
}

TEST_CASE("self-generated assistants: deterministic, valid, live excluded") {
    const Key128 key = key_from_u64(9);
    const Pseudonym live{460, 11, 0x123, IdentityKind::SharedPseudonym};

    const AssistantPool a = self_generate_assistants(key, 7, 12, 460, 11, live);
    const AssistantPool b = self_generate_assistants(key, 7, 12, 460, 11, live);
    REQUIRE(a.entries.size() == 12);
    CHECK(a.entries == b.entries);
    CHECK(a.source == PoolSource::SelfGenerated);

    const AssistantPool c = self_generate_assistants(key, 8, 12, 460, 11, live);
    CHECK(a.entries != c.entries);

    std::set<Pseudonym> seen;
    for (const auto& p : a.entries) {
        CHECK(p.mcc == 460);
        CHECK(p.mnc == 11);
        CHECK(p.msin <= 0xFFFFFFFFFFULL);
        CHECK_FALSE(p == live);
        CHECK(seen.insert(p).second);
    }

    CHECK_THROWS_AS(self_generate_assistants(key, 7, 0, 460, 11, live),
                    InsufficientPool);
}

TEST_CASE("generated assistants avoid the live pseudonym across trials") {
    Rng rng(45);
    for (int i = 0; i < 10000; ++i) {
        const Pseudonym live{460, 11, rng.next_u40(),
                             IdentityKind::SharedPseudonym};
        const AssistantPool pool =
            self_generate_assistants(rng.key(), i, 3, 460, 11, live);
        for (const auto& p : pool.entries) CHECK_FALSE(p == live);
    }
}

TEST_CASE("assigned assistants come from others and exclude the requester") {
    Rng rng(46);
    std::vector<Pseudonym> others;
    std::set<Pseudonym> known;
    for (int i = 0; i < 10; ++i) {
        others.push_back({460, 11, rng.next_u40(), IdentityKind::SharedPseudonym});
        known.insert(others.back());
    }
    const Pseudonym requester = others[3];

    const AssistantPool pool = assign_assistants(others, requester, 9, rng);
    REQUIRE(pool.entries.size() == 9);
    CHECK(pool.source == PoolSource::HssProvided);
    for (const auto& p : pool.entries) {
        CHECK_FALSE(p == requester);
        CHECK(known.contains(p));
    }

    CHECK_THROWS_AS(assign_assistants(others, requester, 10, rng),
                    InsufficientSubscribers);

    // registry of exactly n+1 subscribers supports a pool of n
    const AssistantPool full = assign_assistants(others, others[0], 9, rng);
    CHECK(full.entries.size() == 9);
}
