#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kpa/adversary.hpp"

namespace kpa {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FaultKind { HssLoss, UeMismatch, Replay, Tamper };

const char* to_string(FaultKind f);

struct FaultInjection {
    size_t round = 0;  // 1-based round the fault applies to
    FaultKind kind = FaultKind::HssLoss;
};

/// Simulation configuration. k and marked_fraction may be sweep lists;
/// run_scenario expands their cartesian product into one row each.
struct Scenario {
    Scheme scheme = Scheme::Variable;
    size_t subscribers = 1;
    std::vector<size_t> k_values{4};
    size_t rounds = 1;
    std::vector<double> marked_fractions{0.0};
    size_t trials = 1;
    uint64_t seed = 0;
    std::vector<FaultInjection> faults;
};

/// Parses and validates a scenario; unknown fields are rejected.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text);

struct MetricsRow {
    std::string scheme;
    std::string attack;
    size_t k = 0;
    size_t pool = 0;
    double marked_fraction = 0.0;
    size_t rounds = 0;
    uint64_t trials = 0;
    double success_rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_candidate_size = 0.0;
    double auth_success_rate = 0.0;
    uint64_t recovery_count = 0;
    uint64_t imsi_exposure_count = 0;
    std::string error;  // non-empty when the combination aborted

    bool operator==(const MetricsRow&) const = default;
};

std::string metrics_header();
std::string format_row(const MetricsRow& row);
MetricsRow parse_row(const std::string& line);

void emit_metrics(const std::vector<MetricsRow>& rows,
                  const std::string& path);
std::vector<MetricsRow> parse_metrics(const std::string& path);

struct TranscriptEntry {
    uint64_t t = 0;
    std::string from;
    std::string to;
    std::string type;
    Bytes payload;
};

void emit_transcript(const std::vector<TranscriptEntry>& entries,
                     const std::string& path);

struct RunOutput {
    std::vector<MetricsRow> rows;
    /// Message log of the first trial of the first parameter combination.
    std::vector<TranscriptEntry> transcript;
};

/// Deterministic given (scenario, seed): one row per (k, marked_fraction)
/// combination. Each round one subscriber attaches (the adversary's target
/// is subscriber 0); injected faults apply to the target's round.
RunOutput run_scenario(const Scenario& scenario);

MetricsRow attack_row(const AttackParams& params);

}  // namespace kpa
