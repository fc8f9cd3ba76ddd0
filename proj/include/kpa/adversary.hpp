#pragma once

#include <set>
#include <span>
#include <vector>

#include "kpa/kset.hpp"
#include "kpa/stats.hpp"

namespace kpa {

struct EmptyLog : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using PseudonymSet = std::set<Pseudonym>;

struct Observation {
    uint64_t t = 0;
    std::vector<Pseudonym> members;  // exactly as seen on the wire
};

/// The eavesdropper's time-ordered record of k-sets linked to one target UE.
class ObservationLog {
public:
    void observe(std::span<const uint8_t> kset_wire, uint64_t t);
    void observe(std::vector<Pseudonym> members, uint64_t t);

    const std::vector<Observation>& records() const { return records_; }
    bool empty() const { return records_.empty(); }
    size_t size() const { return records_.size(); }

private:
    std::vector<Observation> records_;
};

struct CandidateSet {
    PseudonymSet candidates;
    size_t rounds_used = 0;
};

/// Set-intersection of all observed member sets. Throws EmptyLog when the
/// log holds no observations.
CandidateSet intersection_attack(const ObservationLog& log);

/// Identities the adversary registered itself and can recognize on sight.
struct MarkedPool {
    PseudonymSet marked;
};

/// Observed members minus marked members.
CandidateSet mark_attack(std::span<const Pseudonym> observed,
                         const MarkedPool& pool);

enum class Scheme { StaticBaseline, Variable };
enum class AttackKind { Intersection, Mark };

const char* to_string(Scheme s);
const char* to_string(AttackKind a);

struct AttackParams {
    Scheme scheme = Scheme::StaticBaseline;
    AttackKind attack = AttackKind::Intersection;
    size_t k = 4;
    size_t pool = 100;          // assistant pool / other-subscriber count
    double marked_fraction = 0.0;
    size_t rounds = 10;
    size_t trials = 1000;
    uint64_t seed = 1;
};

/// Monte Carlo estimate over independent simulated runs.
///
/// Success semantics follow the attack: for the intersection attack the
/// headline rate is unique identification (the accumulated candidate set
/// is exactly the live identity) by the final round; for the mark attack
/// it is the per-observation rate of a uniform guess among the unmarked
/// members being correct. Per-round guess statistics are kept for both.
struct AttackEstimate {
    double success_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_candidate_size = 0.0;
    std::vector<uint64_t> per_round_guess_successes;
    std::vector<uint64_t> per_round_trials;
    uint64_t successes = 0;
    uint64_t trials = 0;
    uint64_t auth_successes = 0;
    uint64_t auth_attempts = 0;

    double per_round_rate(size_t round_index) const {
        return static_cast<double>(per_round_guess_successes[round_index]) /
               static_cast<double>(per_round_trials[round_index]);
    }
};

AttackEstimate estimate_success(const AttackParams& params);

/// Mark-attack measurement conditioned on exactly m marked assistants in
/// each observed set.
AttackEstimate estimate_mark_conditioned(size_t k, size_t m, size_t trials,
                                         uint64_t seed);

}  // namespace kpa
