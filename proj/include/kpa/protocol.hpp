#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "kpa/kset.hpp"

namespace kpa {

inline constexpr uint16_t kAmf = 0x8000;
inline constexpr uint64_t kSqnWindow = 32;

using KAsme = std::array<uint8_t, 32>;

struct UnknownHss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Distinct observable failure causes, so runs can attribute outcomes.
enum class AuthFailure : uint8_t {
    IdentificationFailure,
    MacFailure,
    SqnFailure,
    ResMismatch,
};

const char* to_string(AuthFailure f);

// ---------------------------------------------------------------- messages

struct AttachRequest {
    uint64_t txn = 0;
    Bytes kset_wire;
    Digest h0{};        // HMAC(Key, live identity)
    uint32_t dest_id = 0;  // HSS identifier

    Bytes encode() const;
};

struct ForwardedAttach {
    uint64_t txn = 0;
    Bytes kset_wire;
    Digest h0{};
    uint32_t sn_id = 0;  // serving network, replaces the HSS id

    Bytes encode() const;
};

/// AUTH = (SQN ^ AK) || AMF || MAC.
struct AuthToken {
    uint64_t concealed_sqn = 0;  // 48-bit
    uint16_t amf = 0;
    uint64_t mac = 0;

    bool operator==(const AuthToken&) const = default;
};

/// AV = Rand || XRES || K_ASME || AUTH.
struct AuthVector {
    Key128 rand{};
    uint64_t xres = 0;
    KAsme k_asme{};
    AuthToken auth;

    bool operator==(const AuthVector&) const = default;
    Bytes encode() const;
    static AuthVector decode(std::span<const uint8_t> wire);
};

struct AvResponse {
    uint64_t txn = 0;
    AuthVector av;

    Bytes encode() const;
};

struct IdentifyReject {
    uint64_t txn = 0;

    Bytes encode() const;
};

struct AuthChallenge {
    uint64_t txn = 0;
    Key128 rand{};
    AuthToken auth;
    uint8_t ksi_asme = 0;  // 3-bit key identifier

    Bytes encode() const;
    static AuthChallenge decode(std::span<const uint8_t> wire);
};

struct AuthResponse {
    uint64_t txn = 0;
    uint64_t res = 0;

    Bytes encode() const;
};

struct UeReject {
    uint64_t txn = 0;
    AuthFailure cause = AuthFailure::MacFailure;

    Bytes encode() const;
};

struct AuthResult {
    uint64_t txn = 0;
    bool accepted = false;
    AuthFailure cause = AuthFailure::IdentificationFailure;  // when rejected

    Bytes encode() const;
};

// ------------------------------------------------------------------ actors

/// Home subscription server: holds keys and pseudonym chains, identifies
/// subscribers from k-sets and issues authentication vectors.
class Hss {
public:
    explicit Hss(uint32_t hss_id);

    uint32_t id() const { return hss_id_; }

    /// Registers a subscriber; returns its handle.
    uint64_t provision(const Imsi& imsi, const Key128& key,
                       uint64_t initial_sqn);

    size_t subscriber_count() const { return chains_.size(); }

    const PseudonymChain& chain(uint64_t subscriber) const;

    /// Identification (in-order k-set traversal, unknown identities
    /// skipped) followed by AV generation and the synchronized chain
    /// update. Rejects when no member verifies against H0.
    std::variant<AvResponse, IdentifyReject> handle_attach(
        const ForwardedAttach& req, Rng& rng);

    /// Current shared pseudonyms of active subscribers other than the
    /// requester, for assistant-pool assignment.
    std::vector<Pseudonym> active_pseudonyms_except(uint64_t subscriber) const;

    AssistantPool assistant_pool(uint64_t subscriber, size_t n,
                                 Rng& rng) const;

    /// Fault injection: the HSS forgets the subscriber's current shared
    /// pseudonym (unexpected memory cleanup).
    void inject_pseudonym_loss(uint64_t subscriber);

    std::vector<ChainRecord> dump_registry() const;

    /// Rebuilds all subscriber state from registry records.
    void restore_registry(std::span<const ChainRecord> records);

    /// Subscriber the last successful identification resolved to.
    std::optional<uint64_t> last_identified() const { return last_identified_; }

private:
    enum class EntryKind : uint8_t { Imsi, Current, Anchor };

    void index_subscriber(uint64_t subscriber);
    void reindex_subscriber(uint64_t subscriber);
    void drop_entries(uint64_t subscriber);

    uint32_t hss_id_;
    std::vector<PseudonymChain> chains_;
    // identity value -> owning subscribers (value collisions keep all owners)
    std::unordered_map<uint64_t, std::vector<std::pair<uint64_t, EntryKind>>>
        lookup_;
    std::optional<uint64_t> last_identified_;
};

/// Mobility management entity: semi-trusted relay. Forwards attach
/// requests, turns AVs into challenges and checks RES against XRES.
class Mme {
public:
    Mme(uint32_t sn_id, std::set<uint32_t> known_hss);

    uint32_t sn_id() const { return sn_id_; }

    ForwardedAttach forward(const AttachRequest& req) const;  // throws UnknownHss

    AuthChallenge on_av(const AvResponse& rsp);

    AuthResult on_identify_reject(const IdentifyReject& rej);

    AuthResult on_response(const AuthResponse& rsp);

    AuthResult on_ue_reject(const UeReject& rej);

    /// K_ASME of the most recent accepted transaction.
    const std::optional<KAsme>& last_k_asme() const { return last_k_asme_; }

private:
    struct Pending {
        uint64_t xres;
        KAsme k_asme;
        uint8_t ksi;
    };

    uint32_t sn_id_;
    std::set<uint32_t> known_hss_;
    uint8_t next_ksi_ = 0;
    std::unordered_map<uint64_t, Pending> pending_;
    std::optional<KAsme> last_k_asme_;
};

/// User equipment: owns one pseudonym chain, builds k-sets, verifies
/// challenges and keeps the retry / recovery bookkeeping.
class Ue {
public:
    Ue(uint64_t ue_id, const Imsi& imsi, const Key128& key,
       uint64_t initial_sqn, uint32_t hss_id);

    uint64_t id() const { return ue_id_; }
    const Imsi& imsi() const { return imsi_; }
    const PseudonymChain& chain() const { return chain_; }
    bool recovery_mode() const { return recovery_mode_; }
    bool hard_failed() const { return hard_failed_; }
    const std::optional<KAsme>& last_k_asme() const { return last_k_asme_; }

    /// The UE learns the serving network identity from the cell it camps
    /// on; needed for the K_ASME derivation.
    void set_serving_network(uint32_t sn_id) { serving_sn_id_ = sn_id; }

    void set_assistant_pool(AssistantPool pool) { hss_pool_ = std::move(pool); }

    /// Builds the attach request for the current live identity: the IMSI
    /// before the first authentication (reusing the stored set after a
    /// failed IMSI attach), the current P_i afterwards, or a fresh anchor
    /// set in recovery mode.
    AttachRequest initiate(size_t k, Rng& rng);

    /// MAC and SQN checks; on acceptance returns RES and performs the
    /// synchronized chain update.
    std::variant<AuthResponse, UeReject> handle_challenge(
        const AuthChallenge& ch);

    void handle_result(const AuthResult& result);

    /// Fault injection: corrupts the current shared pseudonym
    /// (miscalculation / signal distortion on the UE side).
    void inject_pseudonym_mismatch();

    /// Identity the next attach would present.
    Pseudonym live_identity() const;

private:
    AssistantPool pool_for(size_t need);

    uint64_t ue_id_;
    Imsi imsi_;
    Key128 key_;
    uint32_t hss_id_;
    uint32_t serving_sn_id_ = 0;
    PseudonymChain chain_;
    uint64_t assist_counter_ = 0;
    uint64_t txn_seq_ = 0;
    std::optional<AssistantPool> hss_pool_;
    std::optional<KSet> stored_imsi_set_;
    bool recovery_mode_ = false;
    bool hard_failed_ = false;

    struct Pending {
        uint64_t txn;
        IdentityKind live_kind;
        bool challenge_accepted = false;
    };
    std::optional<Pending> pending_;
    std::optional<KAsme> last_k_asme_;
};

// --------------------------------------------------------------- round run

/// Transcript/fault hooks for the message loop.
struct FlowHooks {
    std::function<void(const std::string& from, const std::string& to,
                       const std::string& type, const Bytes& payload)>
        on_message;
    /// Applied to the challenge in flight (tamper fault).
    std::function<void(AuthChallenge&)> mutate_challenge;
    /// Deliver a copy of the challenge a second time (replay fault).
    bool replay_challenge = false;
};

struct AuthRoundReport {
    bool accepted = false;
    std::optional<AuthFailure> failure;
    /// Wire k-sets sent during the round, in order (one, or two when an
    /// in-round anchor recovery happened).
    std::vector<Bytes> kset_wires;
    /// Live identities behind those sets (harness ground truth, not wire).
    std::vector<Pseudonym> lives_sent;
    bool recovered = false;
    /// Failures observed on the way (replay/tamper rejections included).
    std::vector<AuthFailure> observed_failures;
};

/// Runs one authentication round through a FIFO message loop:
/// attach -> forward -> identify/AV -> challenge -> RES -> result.
/// When the attach is rejected at identification and the UE can fall back
/// to its anchor, the recovery attach runs within the same round.
AuthRoundReport run_auth_round(Ue& ue, Mme& mme, Hss& hss, size_t k, Rng& rng,
                               const FlowHooks* hooks = nullptr,
                               bool allow_recovery = true);

}  // namespace kpa
