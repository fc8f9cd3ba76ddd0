#include "kpa/protocol.hpp"

#include <deque>

namespace kpa {

const char* to_string(AuthFailure f) {
    switch (f) {
        case AuthFailure::IdentificationFailure: return "identification-failure";
        case AuthFailure::MacFailure: return "mac-failure";
        case AuthFailure::SqnFailure: return "sqn-failure";
        case AuthFailure::ResMismatch: return "res-mismatch";
    }
    return "unknown";
}

// ---------------------------------------------------------------- encoding

Bytes AttachRequest::encode() const {
    Bytes out;
    put_u64(out, txn);
    append(out, kset_wire);
    append(out, h0);
    put_u32(out, dest_id);
    return out;
}

Bytes ForwardedAttach::encode() const {
    Bytes out;
    put_u64(out, txn);
    append(out, kset_wire);
    append(out, h0);
    put_u32(out, sn_id);
    return out;
}

static void put_auth_token(Bytes& out, const AuthToken& t) {
    put_u48(out, t.concealed_sqn);
    put_u16(out, t.amf);
    put_u64(out, t.mac);
}

static AuthToken read_auth_token(std::span<const uint8_t> in, size_t off) {
    AuthToken t;
    t.concealed_sqn = read_u48(in, off);
    t.amf = read_u16(in, off + 6);
    t.mac = read_u64(in, off + 8);
    return t;
}

Bytes AuthVector::encode() const {
    Bytes out;
    out.reserve(72);
    append(out, rand);
    put_u64(out, xres);
    append(out, k_asme);
    put_auth_token(out, auth);
    return out;
}

AuthVector AuthVector::decode(std::span<const uint8_t> wire) {
    if (wire.size() != 72)
        throw std::invalid_argument("AuthVector: wrong encoded length");
    AuthVector av;
    std::copy(wire.begin(), wire.begin() + 16, av.rand.begin());
    av.xres = read_u64(wire, 16);
    std::copy(wire.begin() + 24, wire.begin() + 56, av.k_asme.begin());
    av.auth = read_auth_token(wire, 56);
    return av;
}

Bytes AvResponse::encode() const {
    Bytes out;
    put_u64(out, txn);
    append(out, av.encode());
    return out;
}

Bytes IdentifyReject::encode() const {
    Bytes out;
    put_u64(out, txn);
    return out;
}

Bytes AuthChallenge::encode() const {
    Bytes out;
    out.reserve(41);
    put_u64(out, txn);
    append(out, rand);
    put_auth_token(out, auth);
    out.push_back(ksi_asme);
    return out;
}

AuthChallenge AuthChallenge::decode(std::span<const uint8_t> wire) {
    if (wire.size() != 41)
        throw std::invalid_argument("AuthChallenge: wrong encoded length");
    AuthChallenge ch;
    ch.txn = read_u64(wire, 0);
    std::copy(wire.begin() + 8, wire.begin() + 24, ch.rand.begin());
    ch.auth = read_auth_token(wire, 24);
    ch.ksi_asme = wire[40];
    return ch;
}

Bytes AuthResponse::encode() const {
    Bytes out;
    put_u64(out, txn);
    put_u64(out, res);
    return out;
}

Bytes UeReject::encode() const {
    Bytes out;
    put_u64(out, txn);
    out.push_back(static_cast<uint8_t>(cause));
    return out;
}

Bytes AuthResult::encode() const {
    Bytes out;
    put_u64(out, txn);
    out.push_back(accepted ? 1 : 0);
    out.push_back(static_cast<uint8_t>(cause));
    return out;
}

// --------------------------------------------------------------------- HSS

Hss::Hss(uint32_t hss_id) : hss_id_(hss_id) {}

uint64_t Hss::provision(const Imsi& imsi, const Key128& key,
                        uint64_t initial_sqn) {
    const uint64_t subscriber = chains_.size();
    chains_.emplace_back(key, imsi, initial_sqn);
    index_subscriber(subscriber);
    return subscriber;
}

const PseudonymChain& Hss::chain(uint64_t subscriber) const {
    return chains_.at(subscriber);
}

void Hss::index_subscriber(uint64_t subscriber) {
    const PseudonymChain& ch = chains_[subscriber];
    lookup_[pack_identity(as_identity(ch.imsi()))].emplace_back(
        subscriber, EntryKind::Imsi);
    if (ch.active())
        lookup_[pack_identity(ch.current())].emplace_back(subscriber,
                                                          EntryKind::Current);
    if (ch.has_anchor())
        lookup_[pack_identity(ch.anchor())].emplace_back(subscriber,
                                                         EntryKind::Anchor);
}

void Hss::drop_entries(uint64_t subscriber) {
    for (auto it = lookup_.begin(); it != lookup_.end();) {
        auto& owners = it->second;
        std::erase_if(owners,
                      [&](const auto& e) { return e.first == subscriber; });
        it = owners.empty() ? lookup_.erase(it) : std::next(it);
    }
}

void Hss::reindex_subscriber(uint64_t subscriber) {
    drop_entries(subscriber);
    index_subscriber(subscriber);
}

std::variant<AvResponse, IdentifyReject> Hss::handle_attach(
    const ForwardedAttach& req, Rng& rng) {
    const std::vector<Pseudonym> members = decode_members(req.kset_wire);

    std::optional<std::pair<uint64_t, EntryKind>> match;
    for (const auto& member : members) {
        const auto it = lookup_.find(pack_identity(member));
        if (it == lookup_.end()) continue;  // unknown identity: ignored
        for (const auto& [subscriber, kind] : it->second) {
            const auto enc = encode_identity(member);
            if (hmac_sha256(chains_[subscriber].key(), enc) == req.h0) {
                match = {subscriber, kind};
                break;
            }
        }
        if (match) break;
    }
    if (!match) return IdentifyReject{req.txn};

    const auto [subscriber, kind] = *match;
    last_identified_ = subscriber;
    PseudonymChain& ch = chains_[subscriber];

    const uint64_t sqn = ch.sqn_imsi();
    const Key128 rand = rng.key();
    const MilenageOutput mo = milenage(ch.key(), rand, sqn, kAmf);

    AuthVector av;
    av.rand = rand;
    av.xres = mo.res;
    av.auth = {sqn ^ mo.ak, kAmf, mo.mac};
    Bytes seed;
    seed.reserve(36);
    append(seed, mo.ck);
    append(seed, mo.ik);
    put_u32(seed, req.sn_id);
    const Bytes ka = prng_expand(seed, 32);
    std::copy(ka.begin(), ka.end(), av.k_asme.begin());

    ch.advance_sqn(SqnCounter::Imsi);

    // synchronized chain update; the UE mirrors this on acceptance
    switch (kind) {
        case EntryKind::Imsi:
            ch.establish_anchor(sqn);
            ch.next_pseudonym();
            break;
        case EntryKind::Current:
            ch.next_pseudonym();
            break;
        case EntryKind::Anchor:
            ch.advance_sqn(SqnCounter::P0);
            ch.rebuild_epoch();
            ch.next_pseudonym();
            break;
    }
    reindex_subscriber(subscriber);

    return AvResponse{req.txn, av};
}

std::vector<Pseudonym> Hss::active_pseudonyms_except(
    uint64_t subscriber) const {
    std::vector<Pseudonym> out;
    for (uint64_t i = 0; i < chains_.size(); ++i) {
        if (i == subscriber || !chains_[i].active()) continue;
        out.push_back(chains_[i].current());
    }
    return out;
}

AssistantPool Hss::assistant_pool(uint64_t subscriber, size_t n,
                                  Rng& rng) const {
    const PseudonymChain& ch = chains_.at(subscriber);
    const Pseudonym live =
        ch.active() ? ch.current() : as_identity(ch.imsi());
    return assign_assistants(active_pseudonyms_except(subscriber), live, n,
                             rng);
}

void Hss::inject_pseudonym_loss(uint64_t subscriber) {
    for (auto it = lookup_.begin(); it != lookup_.end();) {
        auto& owners = it->second;
        std::erase_if(owners, [&](const auto& e) {
            return e.first == subscriber && e.second == EntryKind::Current;
        });
        it = owners.empty() ? lookup_.erase(it) : std::next(it);
    }
}

std::vector<ChainRecord> Hss::dump_registry() const {
    std::vector<ChainRecord> records;
    records.reserve(chains_.size());
    for (const auto& ch : chains_) records.push_back(ch.to_record());
    return records;
}

void Hss::restore_registry(std::span<const ChainRecord> records) {
    chains_.clear();
    lookup_.clear();
    last_identified_.reset();
    for (const auto& rec : records) {
        const uint64_t subscriber = chains_.size();
        chains_.push_back(PseudonymChain::from_record(rec));
        index_subscriber(subscriber);
    }
}

// --------------------------------------------------------------------- MME

Mme::Mme(uint32_t sn_id, std::set<uint32_t> known_hss)
    : sn_id_(sn_id), known_hss_(std::move(known_hss)) {}

ForwardedAttach Mme::forward(const AttachRequest& req) const {
    if (!known_hss_.contains(req.dest_id))
        throw UnknownHss("mme: no route to HSS " + std::to_string(req.dest_id));
    return {req.txn, req.kset_wire, req.h0, sn_id_};
}

AuthChallenge Mme::on_av(const AvResponse& rsp) {
    const uint8_t ksi = next_ksi_;
    next_ksi_ = static_cast<uint8_t>((next_ksi_ + 1) & 7);
    pending_[rsp.txn] = {rsp.av.xres, rsp.av.k_asme, ksi};
    return {rsp.txn, rsp.av.rand, rsp.av.auth, ksi};
}

AuthResult Mme::on_identify_reject(const IdentifyReject& rej) {
    pending_.erase(rej.txn);
    return {rej.txn, false, AuthFailure::IdentificationFailure};
}

AuthResult Mme::on_response(const AuthResponse& rsp) {
    const auto it = pending_.find(rsp.txn);
    if (it == pending_.end())
        return {rsp.txn, false, AuthFailure::ResMismatch};
    const bool ok = rsp.res == it->second.xres;
    if (ok) last_k_asme_ = it->second.k_asme;
    pending_.erase(it);
    return {rsp.txn, ok, AuthFailure::ResMismatch};
}

AuthResult Mme::on_ue_reject(const UeReject& rej) {
    pending_.erase(rej.txn);
    return {rej.txn, false, rej.cause};
}

// ---------------------------------------------------------------------- UE

Ue::Ue(uint64_t ue_id, const Imsi& imsi, const Key128& key,
       uint64_t initial_sqn, uint32_t hss_id)
    : ue_id_(ue_id),
      imsi_(imsi),
      key_(key),
      hss_id_(hss_id),
      chain_(key, imsi, initial_sqn) {}

Pseudonym Ue::live_identity() const {
    if (recovery_mode_) return chain_.anchor();
    if (!chain_.active()) return as_identity(imsi_);
    return chain_.current();
}

AssistantPool Ue::pool_for(size_t need) {
    if (need == 0) return {};
    if (hss_pool_ && hss_pool_->entries.size() >= need) {
        // a provided pool is spent on a single attach; the next one gets a
        // fresh assignment with up-to-date pseudonyms
        AssistantPool pool = *hss_pool_;
        hss_pool_.reset();
        return pool;
    }
    return self_generate_assistants(key_, assist_counter_++, need,
                                    imsi_.mcc, imsi_.mnc, live_identity());
}

AttachRequest Ue::initiate(size_t k, Rng& rng) {
    if (hard_failed_)
        throw std::logic_error("ue: anchor recovery failed; chain unusable");
    const Pseudonym live = live_identity();

    KSet set;
    const bool imsi_attach = !chain_.active() && !recovery_mode_;
    if (imsi_attach && stored_imsi_set_) {
        set = *stored_imsi_set_;  // retry must reuse the same {IMSI} set
    } else {
        set = build_set(live, pool_for(k - 1), k, rng);
        if (imsi_attach) stored_imsi_set_ = set;
    }

    const uint64_t txn = (ue_id_ << 20) | txn_seq_++;
    pending_ = Pending{txn, live.kind, false};

    AttachRequest req;
    req.txn = txn;
    req.kset_wire = set.wire();
    req.h0 = hmac_sha256(key_, encode_identity(live));
    req.dest_id = hss_id_;
    return req;
}

std::variant<AuthResponse, UeReject> Ue::handle_challenge(
    const AuthChallenge& ch) {
    // f2..f5 do not depend on SQN/AMF; recover the SQN via AK first
    const MilenageOutput base = milenage(key_, ch.rand, 0, 0);
    const uint64_t recovered = ch.auth.concealed_sqn ^ base.ak;

    const MilenageOutput checked =
        milenage(key_, ch.rand, recovered, ch.auth.amf);
    if (checked.mac != ch.auth.mac)
        return UeReject{ch.txn, AuthFailure::MacFailure};

    const uint64_t next_expected = chain_.sqn_imsi();
    if (recovered < next_expected ||
        recovered >= next_expected + kSqnWindow)
        return UeReject{ch.txn, AuthFailure::SqnFailure};

    if (!pending_ || pending_->txn != ch.txn || pending_->challenge_accepted)
        return UeReject{ch.txn, AuthFailure::SqnFailure};

    // network authenticated; derive K_ASME and update the chain in step
    // with the HSS
    Bytes seed;
    seed.reserve(36);
    append(seed, checked.ck);
    append(seed, checked.ik);
    put_u32(seed, serving_sn_id_);
    const Bytes ka = prng_expand(seed, 32);
    KAsme k_asme;
    std::copy(ka.begin(), ka.end(), k_asme.begin());
    last_k_asme_ = k_asme;

    switch (pending_->live_kind) {
        case IdentityKind::RealImsi:
            chain_.establish_anchor(recovered);
            chain_.next_pseudonym();
            stored_imsi_set_.reset();
            break;
        case IdentityKind::SharedPseudonym:
            chain_.next_pseudonym();
            break;
        case IdentityKind::Anchor:
            chain_.advance_sqn(SqnCounter::P0);
            chain_.rebuild_epoch();
            chain_.next_pseudonym();
            break;
        case IdentityKind::Assistant:
            throw std::logic_error("ue: live identity cannot be an assistant");
    }
    chain_.set_sqn_imsi(recovered + 1);
    recovery_mode_ = false;
    pending_->challenge_accepted = true;

    return AuthResponse{ch.txn, checked.res};
}

void Ue::handle_result(const AuthResult& result) {
    if (!pending_ || pending_->txn != result.txn) return;
    if (!result.accepted &&
        result.cause == AuthFailure::IdentificationFailure) {
        switch (pending_->live_kind) {
            case IdentityKind::Anchor:
                hard_failed_ = true;  // both anchor counters diverged
                break;
            case IdentityKind::RealImsi:
                break;  // retry later with the stored {IMSI} set
            default:
                recovery_mode_ = true;
        }
    }
    pending_.reset();
}

void Ue::inject_pseudonym_mismatch() {
    // the UE runs one pseudonym update the HSS never sees
    if (chain_.active()) chain_.next_pseudonym();
}

// --------------------------------------------------------------- round run

namespace {

using Message = std::variant<AttachRequest, ForwardedAttach, AvResponse,
                             IdentifyReject, AuthChallenge, AuthResponse,
                             UeReject, AuthResult>;

struct Envelope {
    std::string from;
    std::string to;
    std::string type;
    Message msg;
};

void log_hook(const FlowHooks* hooks, const Envelope& env, const Bytes& wire) {
    if (hooks != nullptr && hooks->on_message)
        hooks->on_message(env.from, env.to, env.type, wire);
}

}  // namespace

AuthRoundReport run_auth_round(Ue& ue, Mme& mme, Hss& hss, size_t k, Rng& rng,
                               const FlowHooks* hooks, bool allow_recovery) {
    AuthRoundReport report;
    ue.set_serving_network(mme.sn_id());

    std::deque<Envelope> queue;
    std::optional<AuthChallenge> delivered_challenge;
    size_t attaches = 0;

    auto push_attach = [&] {
        report.lives_sent.push_back(ue.live_identity());
        AttachRequest req = ue.initiate(k, rng);
        report.kset_wires.push_back(req.kset_wire);
        ++attaches;
        queue.push_back({"UE", "MME", "attach", std::move(req)});
    };

    push_attach();

    bool done = false;
    while (!queue.empty() && !done) {
        Envelope env = std::move(queue.front());
        queue.pop_front();

        std::visit(
            [&](auto&& msg) {
                using T = std::decay_t<decltype(msg)>;
                log_hook(hooks, env, msg.encode());

                if constexpr (std::is_same_v<T, AttachRequest>) {
                    queue.push_back({"MME", "HSS", "attach-forward",
                                     mme.forward(msg)});
                } else if constexpr (std::is_same_v<T, ForwardedAttach>) {
                    auto rsp = hss.handle_attach(msg, rng);
                    if (std::holds_alternative<AvResponse>(rsp))
                        queue.push_back({"HSS", "MME", "auth-vector",
                                         std::get<AvResponse>(rsp)});
                    else
                        queue.push_back({"HSS", "MME", "identify-reject",
                                         std::get<IdentifyReject>(rsp)});
                } else if constexpr (std::is_same_v<T, AvResponse>) {
                    AuthChallenge ch = mme.on_av(msg);
                    if (hooks != nullptr && hooks->mutate_challenge)
                        hooks->mutate_challenge(ch);
                    queue.push_back({"MME", "UE", "auth-challenge", ch});
                } else if constexpr (std::is_same_v<T, AuthChallenge>) {
                    delivered_challenge = msg;
                    auto rsp = ue.handle_challenge(msg);
                    if (std::holds_alternative<AuthResponse>(rsp))
                        queue.push_back({"UE", "MME", "auth-response",
                                         std::get<AuthResponse>(rsp)});
                    else
                        queue.push_back({"UE", "MME", "auth-reject",
                                         std::get<UeReject>(rsp)});
                } else if constexpr (std::is_same_v<T, IdentifyReject>) {
                    queue.push_back({"MME", "UE", "auth-result",
                                     mme.on_identify_reject(msg)});
                } else if constexpr (std::is_same_v<T, AuthResponse>) {
                    queue.push_back({"MME", "UE", "auth-result",
                                     mme.on_response(msg)});
                } else if constexpr (std::is_same_v<T, UeReject>) {
                    report.observed_failures.push_back(msg.cause);
                    queue.push_back({"MME", "UE", "auth-result",
                                     mme.on_ue_reject(msg)});
                } else if constexpr (std::is_same_v<T, AuthResult>) {
                    ue.handle_result(msg);
                    if (msg.accepted) {
                        report.accepted = true;
                        report.recovered = attaches > 1;
                        done = true;
                    } else if (allow_recovery && ue.recovery_mode() &&
                               !ue.hard_failed()) {
                        report.observed_failures.push_back(msg.cause);
                        push_attach();  // anchor recovery within the round
                    } else {
                        report.failure = msg.cause;
                        if (msg.cause == AuthFailure::IdentificationFailure)
                            report.observed_failures.push_back(msg.cause);
                        done = true;
                    }
                }
            },
            env.msg);
    }

    // replay fault: the same challenge delivered a second time
    if (hooks != nullptr && hooks->replay_challenge && delivered_challenge) {
        if (hooks->on_message)
            hooks->on_message("adversary", "UE", "auth-challenge(replay)",
                              delivered_challenge->encode());
        auto rsp = ue.handle_challenge(*delivered_challenge);
        if (std::holds_alternative<UeReject>(rsp))
            report.observed_failures.push_back(
                std::get<UeReject>(rsp).cause);
    }

    return report;
}

}  // namespace kpa
