#include "kpa/sim.hpp"

#include <charconv>
#include <set>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kpa/baseline.hpp"
#include "kpa/protocol.hpp"

#include "json.hpp"

namespace kpa {

using nlohmann::json;

const char* to_string(FaultKind f) {
    switch (f) {
        case FaultKind::HssLoss: return "hss-loss";
        case FaultKind::UeMismatch: return "ue-mismatch";
        case FaultKind::Replay: return "replay";
        case FaultKind::Tamper: return "tamper";
    }
    return "unknown";
}

// ------------------------------------------------------------- scenario IO

namespace {

FaultKind parse_fault_kind(const std::string& s) {
    if (s == "hss-loss") return FaultKind::HssLoss;
    if (s == "ue-mismatch") return FaultKind::UeMismatch;
    if (s == "replay") return FaultKind::Replay;
    if (s == "tamper") return FaultKind::Tamper;
    throw ScenarioError("scenario: unknown fault kind '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
    if (s == "variable") return Scheme::Variable;
    if (s == "baseline" || s == "static-baseline")
        return Scheme::StaticBaseline;
    throw ScenarioError("scenario: unknown scheme '" + s + "'");
}

void reject_unknown_fields(const json& obj,
                           const std::set<std::string>& known,
                           const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!known.contains(key))
            throw ScenarioError("scenario: unknown field '" + key + "' in " +
                                where);
}

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario: parse error: ") + e.what());
    }
    if (!doc.is_object())
        throw ScenarioError("scenario: top level must be an object");

    reject_unknown_fields(doc,
                          {"scheme", "subscribers", "k", "rounds",
                           "marked_fraction", "trials", "seed", "faults"},
                          "scenario");

    Scenario s;
    try {
        if (doc.contains("scheme"))
            s.scheme = parse_scheme(doc["scheme"].get<std::string>());
        if (doc.contains("subscribers"))
            s.subscribers = doc["subscribers"].get<size_t>();
        if (doc.contains("k")) {
            s.k_values.clear();
            if (doc["k"].is_array())
                for (const auto& v : doc["k"])
                    s.k_values.push_back(v.get<size_t>());
            else
                s.k_values.push_back(doc["k"].get<size_t>());
        }
        if (doc.contains("rounds")) s.rounds = doc["rounds"].get<size_t>();
        if (doc.contains("marked_fraction")) {
            s.marked_fractions.clear();
            if (doc["marked_fraction"].is_array())
                for (const auto& v : doc["marked_fraction"])
                    s.marked_fractions.push_back(v.get<double>());
            else
                s.marked_fractions.push_back(
                    doc["marked_fraction"].get<double>());
        }
        if (doc.contains("trials")) s.trials = doc["trials"].get<size_t>();
        if (doc.contains("seed")) s.seed = doc["seed"].get<uint64_t>();
        if (doc.contains("faults")) {
            for (const auto& f : doc["faults"]) {
                if (!f.is_object())
                    throw ScenarioError("scenario: fault must be an object");
                reject_unknown_fields(f, {"round", "kind"}, "fault");
                FaultInjection fi;
                fi.round = f.at("round").get<size_t>();
                fi.kind = parse_fault_kind(f.at("kind").get<std::string>());
                s.faults.push_back(fi);
            }
        }
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario: bad field: ") + e.what());
    }

    // invariants
    if (s.rounds < 1) throw ScenarioError("scenario: rounds must be >= 1");
    if (s.trials < 1) throw ScenarioError("scenario: trials must be >= 1");
    if (s.subscribers < 1)
        throw ScenarioError("scenario: subscribers must be >= 1");
    if (s.k_values.empty())
        throw ScenarioError("scenario: k sweep must be non-empty");
    for (size_t k : s.k_values)
        if (k < 1) throw ScenarioError("scenario: k must be >= 1");
    if (s.marked_fractions.empty())
        throw ScenarioError("scenario: marked_fraction sweep must be non-empty");
    for (double f : s.marked_fractions)
        if (f < 0.0 || f > 1.0)
            throw ScenarioError("scenario: marked_fraction must be in [0,1]");
    for (const auto& f : s.faults) {
        if (f.round < 1 || f.round > s.rounds)
            throw ScenarioError("scenario: fault round out of range");
        if (s.scheme == Scheme::StaticBaseline)
            throw ScenarioError(
                "scenario: fault injection applies to the variable scheme only");
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

// ------------------------------------------------------------- metrics CSV

std::string metrics_header() {
    return "scheme,attack,k,pool,marked_fraction,rounds,trials,success_rate,"
           "ci_low,ci_high,mean_candidate_size,auth_success_rate,"
           "recovery_count,imsi_exposure_count,error";
}

std::string format_row(const MetricsRow& row) {
    std::ostringstream out;
    std::string error = row.error;
    for (char& c : error)
        if (c == ',' || c == '\n') c = ';';
    out << row.scheme << ',' << row.attack << ',' << row.k << ',' << row.pool
        << ',' << fmt_double(row.marked_fraction) << ',' << row.rounds << ','
        << row.trials << ',' << fmt_double(row.success_rate) << ','
        << fmt_double(row.ci_low) << ',' << fmt_double(row.ci_high) << ','
        << fmt_double(row.mean_candidate_size) << ','
        << fmt_double(row.auth_success_rate) << ',' << row.recovery_count
        << ',' << row.imsi_exposure_count << ',' << error;
    return out.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

uint64_t parse_u64_field(const std::string& s) {
    uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("metrics: bad integer field '" + s + "'");
    return v;
}

double parse_double_field(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("metrics: bad numeric field '" + s + "'");
    return v;
}

}  // namespace

MetricsRow parse_row(const std::string& line) {
    const auto fields = split_csv(line);
    if (fields.size() != 15)
        throw std::invalid_argument("metrics: wrong column count");
    MetricsRow row;
    row.scheme = fields[0];
    row.attack = fields[1];
    row.k = parse_u64_field(fields[2]);
    row.pool = parse_u64_field(fields[3]);
    row.marked_fraction = parse_double_field(fields[4]);
    row.rounds = parse_u64_field(fields[5]);
    row.trials = parse_u64_field(fields[6]);
    row.success_rate = parse_double_field(fields[7]);
    row.ci_low = parse_double_field(fields[8]);
    row.ci_high = parse_double_field(fields[9]);
    row.mean_candidate_size = parse_double_field(fields[10]);
    row.auth_success_rate = parse_double_field(fields[11]);
    row.recovery_count = parse_u64_field(fields[12]);
    row.imsi_exposure_count = parse_u64_field(fields[13]);
    row.error = fields[14];
    return row;
}

void emit_metrics(const std::vector<MetricsRow>& rows,
                  const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("metrics: cannot open " + path);
    out << metrics_header() << '\n';
    for (const auto& row : rows) out << format_row(row) << '\n';
    if (!out) throw std::runtime_error("metrics: write failed: " + path);
}

std::vector<MetricsRow> parse_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != metrics_header())
        throw std::invalid_argument("metrics: missing or wrong header");
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_row(line));
    }
    return rows;
}

void emit_transcript(const std::vector<TranscriptEntry>& entries,
                     const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("transcript: cannot open " + path);
    for (const auto& e : entries) {
        char head[96];
        std::snprintf(head, sizeof(head), "t=%06llu %s->%s %s %zuB ",
                      static_cast<unsigned long long>(e.t), e.from.c_str(),
                      e.to.c_str(), e.type.c_str(), e.payload.size());
        out << head << to_hex(e.payload) << '\n';
    }
    if (!out) throw std::runtime_error("transcript: write failed: " + path);
}

// ------------------------------------------------------------ scenario run

namespace {

constexpr uint32_t kHssId = 0x48535331;
constexpr uint32_t kSnId = 0x534E4531;
constexpr uint16_t kMcc = 460;
constexpr uint16_t kMnc = 11;

struct ComboTally {
    uint64_t rounds_total = 0;
    uint64_t rounds_ok = 0;
    uint64_t recoveries = 0;
    uint64_t exposures = 0;
    uint64_t headline_success = 0;
    uint64_t headline_total = 0;
    double candidate_size_sum = 0.0;
    uint64_t candidate_size_n = 0;
};

struct TrialContext {
    std::vector<TranscriptEntry>* transcript = nullptr;
    uint64_t now = 0;
};

void run_variable_trial(const Scenario& scenario, size_t k, double f,
                        Rng& rng, ComboTally& tally, TrialContext& ctx) {
    const size_t subs_count = scenario.subscribers;
    Hss hss(kHssId);
    Mme mme(kSnId, {kHssId});
    std::vector<Ue> ues;
    std::vector<uint64_t> subs;
    std::set<uint64_t> real_identities;
    std::set<uint64_t> used_msins;
    ues.reserve(subs_count);
    for (size_t i = 0; i < subs_count; ++i) {
        uint64_t msin;
        while (!used_msins.insert(msin = rng.next_u40()).second) {
        }
        const Imsi imsi{kMcc, kMnc, msin};
        const Key128 key = rng.key();
        const uint64_t sqn = rng.below(uint64_t{1} << 40);
        ues.emplace_back(i, imsi, key, sqn, kHssId);
        subs.push_back(hss.provision(imsi, key, sqn));
        real_identities.insert(pack_identity(as_identity(imsi)));
    }

    // adversary-controlled subscribers (never the target)
    const size_t marked_count = subs_count == 0
                                    ? 0
                                    : static_cast<size_t>(
                                          f * static_cast<double>(subs_count - 1));

    auto marked_values = [&] {
        MarkedPool mp;
        for (size_t j = 1; j <= marked_count && j < subs_count; ++j)
            if (ues[j].chain().active())
                mp.marked.insert(hss.chain(subs[j]).current());
        return mp;
    };

    ObservationLog target_log;
    uint64_t mark_guess_ok = 0;
    uint64_t mark_guess_n = 0;

    for (size_t round = 1; round <= scenario.rounds; ++round) {
        bool tamper = false;
        bool replay = false;
        bool fault_round = false;
        for (const auto& fault : scenario.faults) {
            if (fault.round != round) continue;
            fault_round = true;
            switch (fault.kind) {
                case FaultKind::HssLoss:
                    hss.inject_pseudonym_loss(subs[0]);
                    break;
                case FaultKind::UeMismatch:
                    ues[0].inject_pseudonym_mismatch();
                    break;
                case FaultKind::Tamper:
                    tamper = true;
                    break;
                case FaultKind::Replay:
                    replay = true;
                    break;
            }
        }

        // fault rounds always belong to the observed target
        const size_t actor =
            fault_round || subs_count == 1 ? 0 : rng.below(subs_count);

        try {
            ues[actor].set_assistant_pool(
                hss.assistant_pool(subs[actor], k - 1, rng));
        } catch (const InsufficientSubscribers&) {
            // not enough active peers yet; the UE self-generates
        }

        FlowHooks hooks;
        hooks.replay_challenge = replay;
        if (tamper)
            hooks.mutate_challenge = [](AuthChallenge& ch) {
                ch.auth.mac ^= 1;  // one flipped MAC bit in flight
            };
        if (ctx.transcript != nullptr)
            hooks.on_message = [&](const std::string& from,
                                   const std::string& to,
                                   const std::string& type,
                                   const Bytes& payload) {
                ctx.transcript->push_back(
                    {ctx.now++, from, to, type, payload});
            };

        const AuthRoundReport report =
            run_auth_round(ues[actor], mme, hss, k, rng, &hooks);

        tally.rounds_total += 1;
        tally.rounds_ok += report.accepted ? 1 : 0;
        tally.recoveries += report.recovered ? 1 : 0;

        for (const auto& wire : report.kset_wires) {
            const auto members = decode_members(wire);
            for (const auto& m : members)
                tally.exposures +=
                    real_identities.contains(pack_identity(m)) ? 1 : 0;
        }

        if (actor == 0) {
            const auto members = decode_members(report.kset_wires.front());
            if (f > 0.0) {
                const CandidateSet cand =
                    mark_attack(members, marked_values());
                if (!cand.candidates.empty()) {
                    auto it = cand.candidates.begin();
                    std::advance(it, static_cast<ptrdiff_t>(
                                         rng.below(cand.candidates.size())));
                    mark_guess_ok +=
                        (*it == report.lives_sent.front()) ? 1 : 0;
                    mark_guess_n += 1;
                    tally.candidate_size_sum +=
                        static_cast<double>(cand.candidates.size());
                    tally.candidate_size_n += 1;
                }
            }
            target_log.observe(members, ctx.now++);
        }
    }

    if (f > 0.0) {
        tally.headline_success += mark_guess_ok;
        tally.headline_total += mark_guess_n;
    } else if (!target_log.empty()) {
        const CandidateSet cand = intersection_attack(target_log);
        tally.candidate_size_sum += static_cast<double>(cand.candidates.size());
        tally.candidate_size_n += 1;
        tally.headline_total += 1;
        if (cand.candidates.size() == 1 &&
            *cand.candidates.begin() == ues[0].live_identity())
            tally.headline_success += 1;
    }
}

void run_baseline_trial(const Scenario& scenario, size_t k, double f,
                        Rng& rng, ComboTally& tally, TrialContext& ctx) {
    const size_t subs_count = scenario.subscribers;
    constexpr size_t kUniverse = 100;

    std::set<uint64_t> used_msins;
    std::vector<Pseudonym> universe;
    universe.reserve(kUniverse);
    while (universe.size() < kUniverse) {
        const uint64_t msin = rng.next_u40();
        if (!used_msins.insert(msin).second) continue;
        universe.push_back({kMcc, kMnc, msin, IdentityKind::Assistant});
    }

    std::map<Pseudonym, Key128> key_db;
    std::vector<Pseudonym> identities;
    std::vector<Key128> keys;
    std::set<uint64_t> real_identities;
    for (size_t i = 0; i < subs_count; ++i) {
        uint64_t msin;
        while (!used_msins.insert(msin = rng.next_u40()).second) {
        }
        Pseudonym id{kMcc, kMnc, msin, IdentityKind::RealImsi};
        identities.push_back(id);
        keys.push_back(rng.key());
        key_db[id] = keys.back();
        real_identities.insert(pack_identity(id));
    }

    const size_t marked_count =
        static_cast<size_t>(f * static_cast<double>(kUniverse));
    MarkedPool marked;
    for (size_t i = 0; i < marked_count; ++i) marked.marked.insert(universe[i]);

    const AssistantPool pool{universe, PoolSource::HssProvided};

    ObservationLog target_log;
    uint64_t mark_guess_ok = 0;
    uint64_t mark_guess_n = 0;

    for (size_t round = 1; round <= scenario.rounds; ++round) {
        const size_t actor = subs_count == 1 ? 0 : rng.below(subs_count);
        const BaselineOutcome outcome = run_baseline_exchange(
            identities[actor], keys[actor], pool, k, key_db, rng);

        tally.rounds_total += 1;
        tally.rounds_ok +=
            (outcome.server_accepted && outcome.user_accepted) ? 1 : 0;

        for (const auto& m : outcome.session.kset.members)
            tally.exposures +=
                real_identities.contains(pack_identity(m)) ? 1 : 0;

        if (actor == 0) {
            if (f > 0.0) {
                const CandidateSet cand =
                    mark_attack(outcome.session.kset.members, marked);
                if (!cand.candidates.empty()) {
                    auto it = cand.candidates.begin();
                    std::advance(it, static_cast<ptrdiff_t>(
                                         rng.below(cand.candidates.size())));
                    mark_guess_ok += (*it == identities[0]) ? 1 : 0;
                    mark_guess_n += 1;
                    tally.candidate_size_sum +=
                        static_cast<double>(cand.candidates.size());
                    tally.candidate_size_n += 1;
                }
            }
            target_log.observe(outcome.session.kset.members, ctx.now++);
        }
    }

    if (f > 0.0) {
        tally.headline_success += mark_guess_ok;
        tally.headline_total += mark_guess_n;
    } else if (!target_log.empty()) {
        const CandidateSet cand = intersection_attack(target_log);
        tally.candidate_size_sum += static_cast<double>(cand.candidates.size());
        tally.candidate_size_n += 1;
        tally.headline_total += 1;
        if (cand.candidates.size() == 1 &&
            *cand.candidates.begin() == identities[0])
            tally.headline_success += 1;
    }
}

}  // namespace

RunOutput run_scenario(const Scenario& scenario) {
    RunOutput output;
    Rng root(scenario.seed);

    size_t combo_index = 0;
    for (size_t k : scenario.k_values) {
        for (double f : scenario.marked_fractions) {
            Rng combo_root = root.child(combo_index);

            MetricsRow row;
            row.scheme = to_string(scenario.scheme);
            row.attack = f > 0.0 ? "mark" : "intersection";
            row.k = k;
            row.pool = scenario.scheme == Scheme::Variable
                           ? scenario.subscribers - 1
                           : 100;
            row.marked_fraction = f;
            row.rounds = scenario.rounds;
            row.trials = scenario.trials;

            ComboTally tally;
            try {
                for (size_t trial = 0; trial < scenario.trials; ++trial) {
                    Rng rng = combo_root.child(trial);
                    TrialContext ctx;
                    if (combo_index == 0 && trial == 0 &&
                        scenario.scheme == Scheme::Variable)
                        ctx.transcript = &output.transcript;
                    if (scenario.scheme == Scheme::Variable)
                        run_variable_trial(scenario, k, f, rng, tally, ctx);
                    else
                        run_baseline_trial(scenario, k, f, rng, tally, ctx);
                }

                row.auth_success_rate =
                    tally.rounds_total == 0
                        ? 0.0
                        : static_cast<double>(tally.rounds_ok) /
                              static_cast<double>(tally.rounds_total);
                row.recovery_count = static_cast<uint64_t>(std::llround(
                    static_cast<double>(tally.recoveries) /
                    static_cast<double>(scenario.trials)));
                row.imsi_exposure_count = static_cast<uint64_t>(std::llround(
                    static_cast<double>(tally.exposures) /
                    static_cast<double>(scenario.trials)));
                row.success_rate =
                    tally.headline_total == 0
                        ? 0.0
                        : static_cast<double>(tally.headline_success) /
                              static_cast<double>(tally.headline_total);
                const Interval ci = wilson_interval(tally.headline_success,
                                                    tally.headline_total);
                row.ci_low = ci.low;
                row.ci_high = ci.high;
                row.mean_candidate_size =
                    tally.candidate_size_n == 0
                        ? 0.0
                        : tally.candidate_size_sum /
                              static_cast<double>(tally.candidate_size_n);
            } catch (const std::exception& e) {
                row.error = e.what();
            }

            output.rows.push_back(std::move(row));
            ++combo_index;
        }
    }
    return output;
}

MetricsRow attack_row(const AttackParams& params) {
    MetricsRow row;
    row.scheme = to_string(params.scheme);
    row.attack = to_string(params.attack);
    row.k = params.k;
    row.pool = params.pool;
    row.marked_fraction = params.marked_fraction;
    row.rounds = params.rounds;
    try {
        const AttackEstimate est = estimate_success(params);
        row.trials = params.trials;
        row.success_rate = est.success_rate;
        row.ci_low = est.ci_low;
        row.ci_high = est.ci_high;
        row.mean_candidate_size = est.mean_candidate_size;
        row.auth_success_rate =
            est.auth_attempts == 0
                ? 1.0
                : static_cast<double>(est.auth_successes) /
                      static_cast<double>(est.auth_attempts);
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace kpa
