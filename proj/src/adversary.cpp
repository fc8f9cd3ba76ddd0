#include "kpa/adversary.hpp"

#include <algorithm>
#include <set>

#include "kpa/baseline.hpp"
#include "kpa/protocol.hpp"

namespace kpa {

void ObservationLog::observe(std::span<const uint8_t> kset_wire, uint64_t t) {
    records_.push_back({t, decode_members(kset_wire)});
}

void ObservationLog::observe(std::vector<Pseudonym> members, uint64_t t) {
    records_.push_back({t, std::move(members)});
}

CandidateSet intersection_attack(const ObservationLog& log) {
    if (log.empty())
        throw EmptyLog("intersection: no observations recorded");
    const auto& records = log.records();
    PseudonymSet acc(records.front().members.begin(),
                     records.front().members.end());
    for (size_t i = 1; i < records.size(); ++i) {
        PseudonymSet seen(records[i].members.begin(),
                          records[i].members.end());
        PseudonymSet kept;
        for (const auto& p : acc)
            if (seen.contains(p)) kept.insert(p);
        acc = std::move(kept);
    }
    return {std::move(acc), records.size()};
}

CandidateSet mark_attack(std::span<const Pseudonym> observed,
                         const MarkedPool& pool) {
    CandidateSet out;
    out.rounds_used = 1;
    for (const auto& p : observed)
        if (!pool.marked.contains(p)) out.candidates.insert(p);
    return out;
}

const char* to_string(Scheme s) {
    return s == Scheme::StaticBaseline ? "static-baseline" : "variable";
}

const char* to_string(AttackKind a) {
    return a == AttackKind::Intersection ? "intersection" : "mark";
}

// ----------------------------------------------------------------- harness

namespace {

constexpr uint32_t kHssId = 0x48535331;  // "HSS1"
constexpr uint32_t kSnId = 0x534E4531;   // "SNE1"
constexpr uint16_t kMcc = 460;
constexpr uint16_t kMnc = 11;

struct Tally {
    std::vector<uint64_t> round_success;
    std::vector<uint64_t> round_total;
    uint64_t headline_success = 0;
    uint64_t headline_total = 0;
    uint64_t auth_successes = 0;
    uint64_t auth_attempts = 0;
    double candidate_size_sum = 0.0;
    uint64_t candidate_size_n = 0;

    explicit Tally(size_t rounds)
        : round_success(rounds, 0), round_total(rounds, 0) {}

    void record_guess(size_t round, bool hit) {
        round_success[round] += hit ? 1 : 0;
        round_total[round] += 1;
    }

    void record_candidates(size_t n) {
        candidate_size_sum += static_cast<double>(n);
        candidate_size_n += 1;
    }
};

bool uniform_guess(const PseudonymSet& candidates, const Pseudonym& live,
                   Rng& rng) {
    auto it = candidates.begin();
    std::advance(it, static_cast<ptrdiff_t>(rng.below(candidates.size())));
    return *it == live;
}

bool uniform_guess(const std::vector<Pseudonym>& members,
                   const Pseudonym& live, Rng& rng) {
    return members[rng.below(members.size())] == live;
}

std::vector<Pseudonym> make_static_universe(size_t n, Rng& rng,
                                            std::set<uint64_t>& used_msins) {
    std::vector<Pseudonym> out;
    out.reserve(n);
    while (out.size() < n) {
        const uint64_t msin = rng.next_u40();
        if (!used_msins.insert(msin).second) continue;
        out.push_back({kMcc, kMnc, msin, IdentityKind::Assistant});
    }
    return out;
}

AttackEstimate finish(const Tally& tally) {
    AttackEstimate est;
    est.per_round_guess_successes = tally.round_success;
    est.per_round_trials = tally.round_total;
    est.successes = tally.headline_success;
    est.trials = tally.headline_total;
    est.success_rate = tally.headline_total == 0
                           ? 0.0
                           : static_cast<double>(tally.headline_success) /
                                 static_cast<double>(tally.headline_total);
    const Interval ci =
        wilson_interval(tally.headline_success, tally.headline_total);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    est.mean_candidate_size =
        tally.candidate_size_n == 0
            ? 0.0
            : tally.candidate_size_sum /
                  static_cast<double>(tally.candidate_size_n);
    est.auth_successes = tally.auth_successes;
    est.auth_attempts = tally.auth_attempts;
    return est;
}

/// Static baseline: the target keeps one fixed identity; assistants are
/// drawn fresh each round from a fixed directory.
AttackEstimate run_static(const AttackParams& params) {
    Tally tally(params.rounds);

    Rng root(params.seed);
    for (size_t trial = 0; trial < params.trials; ++trial) {
        Rng rng = root.child(trial);

        std::set<uint64_t> used;
        const std::vector<Pseudonym> universe =
            make_static_universe(params.pool, rng, used);
        Pseudonym live{kMcc, kMnc, 0, IdentityKind::RealImsi};
        while (!used.insert(live.msin = rng.next_u40()).second) {
        }
        const Key128 key = rng.key();
        const std::map<Pseudonym, Key128> key_db{{live, key}};

        const size_t marked_count = static_cast<size_t>(
            params.marked_fraction * static_cast<double>(params.pool));
        MarkedPool marked;
        for (size_t i = 0; i < marked_count; ++i)
            marked.marked.insert(universe[i]);

        AssistantPool pool{universe, PoolSource::HssProvided};

        PseudonymSet acc;
        bool first = true;
        for (size_t round = 0; round < params.rounds; ++round) {
            const BaselineOutcome outcome = run_baseline_exchange(
                live, key, pool, params.k, key_db, rng);
            const KSet& set = outcome.session.kset;
            tally.auth_attempts += 1;
            tally.auth_successes +=
                (outcome.server_accepted && outcome.user_accepted) ? 1 : 0;

            if (params.attack == AttackKind::Intersection) {
                PseudonymSet seen(set.members.begin(), set.members.end());
                if (first) {
                    acc = std::move(seen);
                    first = false;
                } else {
                    PseudonymSet kept;
                    for (const auto& p : acc)
                        if (seen.contains(p)) kept.insert(p);
                    acc = std::move(kept);
                }
                // the static scheme guarantees the live identity stays in
                // the accumulated intersection
                tally.record_guess(round, uniform_guess(acc, live, rng));
            } else {
                const CandidateSet cand = mark_attack(set.members, marked);
                const bool hit = uniform_guess(cand.candidates, live, rng);
                tally.record_guess(round, hit);
                tally.record_candidates(cand.candidates.size());
                tally.headline_success += hit ? 1 : 0;
                tally.headline_total += 1;
            }
        }

        if (params.attack == AttackKind::Intersection) {
            tally.record_candidates(acc.size());
            tally.headline_total += 1;
            if (acc.size() == 1 && *acc.begin() == live)
                tally.headline_success += 1;
        }
    }
    return finish(tally);
}

/// Variable scheme: the target and a population of other subscribers run
/// the real protocol; assistants for rounds after the first are other
/// subscribers' rotating shared pseudonyms.
AttackEstimate run_variable(const AttackParams& params) {
    Tally tally(params.rounds);

    Rng root(params.seed);
    for (size_t trial = 0; trial < params.trials; ++trial) {
        Rng rng = root.child(trial);

        Hss hss(kHssId);
        Mme mme(kSnId, {kHssId});
        std::vector<Ue> ues;
        std::vector<uint64_t> subs;
        ues.reserve(params.pool + 1);
        std::set<uint64_t> used_msins;
        for (size_t i = 0; i <= params.pool; ++i) {
            uint64_t msin;
            while (!used_msins.insert(msin = rng.next_u40()).second) {
            }
            const Imsi imsi{kMcc, kMnc, msin};
            const Key128 key = rng.key();
            const uint64_t sqn = rng.below(uint64_t{1} << 40);
            ues.emplace_back(i, imsi, key, sqn, kHssId);
            subs.push_back(hss.provision(imsi, key, sqn));
        }

        const size_t marked_count = static_cast<size_t>(
            params.marked_fraction * static_cast<double>(params.pool));
        // adversary-controlled subscribers (1..marked_count): their
        // rotating pseudonyms are the marked identities

        auto authenticate = [&](size_t idx) {
            AuthRoundReport r =
                run_auth_round(ues[idx], mme, hss, params.k, rng);
            tally.auth_attempts += 1;
            tally.auth_successes += r.accepted ? 1 : 0;
            return r;
        };

        auto marked_values = [&] {
            MarkedPool mp;
            for (size_t idx = 1; idx <= marked_count; ++idx)
                if (ues[idx].chain().active())
                    mp.marked.insert(hss.chain(subs[idx]).current());
            return mp;
        };

        PseudonymSet acc;
        bool first = true;
        for (size_t round = 0; round < params.rounds; ++round) {
            if (round > 0 && params.pool >= params.k - 1) {
                // the k-1 assistant owners of this round come uniformly
                // from the whole population; they authenticate (first
                // attach or rotation) before their pseudonyms are handed
                // out, so assigned assistants are always current
                for (size_t j :
                     rng.sample_indices(params.pool, params.k - 1))
                    authenticate(j + 1);
                ues[0].set_assistant_pool(
                    hss.assistant_pool(subs[0], params.k - 1, rng));
            }

            const AuthRoundReport report = authenticate(0);
            const std::vector<Pseudonym> observed =
                decode_members(report.kset_wires.front());
            const Pseudonym& live = report.lives_sent.front();

            if (params.attack == AttackKind::Intersection) {
                PseudonymSet seen(observed.begin(), observed.end());
                if (first) {
                    acc = std::move(seen);
                    first = false;
                } else {
                    PseudonymSet kept;
                    for (const auto& p : acc)
                        if (seen.contains(p)) kept.insert(p);
                    acc = std::move(kept);
                }
                // cross-round intersection carries nothing against rotating
                // pseudonyms; the per-round guess is over the current set
                tally.record_guess(round, uniform_guess(observed, live, rng));
            } else {
                const CandidateSet cand =
                    mark_attack(observed, marked_values());
                const bool hit = uniform_guess(cand.candidates, live, rng);
                tally.record_guess(round, hit);
                tally.record_candidates(cand.candidates.size());
                tally.headline_success += hit ? 1 : 0;
                tally.headline_total += 1;
            }
        }

        if (params.attack == AttackKind::Intersection) {
            tally.record_candidates(acc.size());
            tally.headline_total += 1;
            const Pseudonym final_live = ues[0].live_identity();
            if (acc.size() == 1 && *acc.begin() == final_live)
                tally.headline_success += 1;
        }
    }
    return finish(tally);
}

}  // namespace

AttackEstimate estimate_success(const AttackParams& params) {
    if (params.trials < 1)
        throw std::invalid_argument("estimate_success: trials must be >= 1");
    return params.scheme == Scheme::StaticBaseline ? run_static(params)
                                                   : run_variable(params);
}

AttackEstimate estimate_mark_conditioned(size_t k, size_t m, size_t trials,
                                         uint64_t seed) {
    if (m >= k)
        throw std::invalid_argument("mark: m must be < k");
    AttackParams params;
    params.k = k;
    params.trials = trials;
    params.rounds = 1;

    Tally tally(1);
    Rng root(seed);
    constexpr size_t kUniverse = 100;
    constexpr size_t kMarked = 20;

    for (size_t trial = 0; trial < trials; ++trial) {
        Rng rng = root.child(trial);

        std::set<uint64_t> used;
        const std::vector<Pseudonym> universe =
            make_static_universe(kUniverse, rng, used);
        Pseudonym live{kMcc, kMnc, 0, IdentityKind::RealImsi};
        while (!used.insert(live.msin = rng.next_u40()).second) {
        }

        MarkedPool marked;
        for (size_t i = 0; i < kMarked; ++i) marked.marked.insert(universe[i]);

        // assemble a set with exactly m marked assistants
        std::vector<Pseudonym> members;
        for (size_t idx : rng.sample_indices(kMarked, m))
            members.push_back(universe[idx]);
        for (size_t idx : rng.sample_indices(kUniverse - kMarked, k - 1 - m))
            members.push_back(universe[kMarked + idx]);
        members.insert(members.begin() +
                           static_cast<ptrdiff_t>(rng.below(k)),
                       live);

        const CandidateSet cand = mark_attack(members, marked);
        const bool hit = uniform_guess(cand.candidates, live, rng);
        tally.record_guess(0, hit);
        tally.record_candidates(cand.candidates.size());
        tally.headline_success += hit ? 1 : 0;
        tally.headline_total += 1;
    }
    return finish(tally);
}

}  // namespace kpa
