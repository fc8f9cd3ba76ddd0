#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "kpa/sim.hpp"

using namespace kpa;

TEST_CASE("minimal scenario parses with defaults filled") {
    const Scenario s = parse_scenario_text("{}");
    CHECK(s.scheme == Scheme::Variable);
    CHECK(s.subscribers == 1);
    CHECK(s.k_values == std::vector<size_t>{4});
    CHECK(s.rounds == 1);
    CHECK(s.trials == 1);
    CHECK(s.faults.empty());
}

TEST_CASE("scenario validation names the violated invariant") {
    CHECK_THROWS_AS(parse_scenario_text(R"({"rounds": 0})"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario_text(R"({"trials": 0})"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario_text(R"({"k": []})"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario_text(R"({"marked_fraction": 1.5})"),
                    ScenarioError);
    CHECK_THROWS_AS(parse_scenario_text(R"({"bogus": 1})"), ScenarioError);
    CHECK_THROWS_AS(
        parse_scenario_text(
            R"({"rounds": 5, "faults": [{"round": 9, "kind": "replay"}]})"),
        ScenarioError);
    CHECK_THROWS_AS(
        parse_scenario_text(
            R"({"scheme": "baseline",
                "faults": [{"round": 1, "kind": "tamper"}]})"),
        ScenarioError);
    CHECK_THROWS_AS(parse_scenario_text("not json"), ScenarioError);
}

TEST_CASE("sweep lists expand to one row per combination") {
    Scenario s = parse_scenario_text(
        R"({"k": [2, 4, 8], "marked_fraction": [0.0, 0.2], "rounds": 3})");
    CHECK(s.k_values.size() == 3);
    CHECK(s.marked_fractions.size() == 2);
    const RunOutput out = run_scenario(s);
    CHECK(out.rows.size() == 6);
}

TEST_CASE("identical seeds give byte-identical metrics") {
    const Scenario s = parse_scenario_text(
        R"({"scheme": "variable", "subscribers": 3, "k": 3,
            "rounds": 8, "trials": 2, "seed": 99})");
    const RunOutput a = run_scenario(s);
    const RunOutput b = run_scenario(s);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i)
        CHECK(format_row(a.rows[i]) == format_row(b.rows[i]));
    CHECK(a.transcript.size() == b.transcript.size());
}

TEST_CASE("the canonical honest run: full success, one IMSI exposure") {
    const Scenario s = parse_scenario_text(
        R"({"scheme": "variable", "subscribers": 1, "k": 4,
            "rounds": 100, "trials": 1, "seed": 5})");
    const RunOutput out = run_scenario(s);
    REQUIRE(out.rows.size() == 1);
    const MetricsRow& row = out.rows.front();
    CHECK(row.error.empty());
    CHECK(row.auth_success_rate == 1.0);
    CHECK(row.imsi_exposure_count == 1);
    CHECK(row.recovery_count == 0);
}

TEST_CASE("an injected HSS loss is absorbed by one recovery") {
    const Scenario s = parse_scenario_text(
        R"({"scheme": "variable", "subscribers": 1, "k": 4, "rounds": 100,
            "trials": 1, "seed": 6,
            "faults": [{"round": 50, "kind": "hss-loss"}]})");
    const RunOutput out = run_scenario(s);
    REQUIRE(out.rows.size() == 1);
    const MetricsRow& row = out.rows.front();
    CHECK(row.auth_success_rate == 1.0);
    CHECK(row.recovery_count == 1);
}

TEST_CASE("imsi exposures never exceed the subscriber count") {
    const Scenario s = parse_scenario_text(
        R"({"scheme": "variable", "subscribers": 5, "k": 3,
            "rounds": 60, "trials": 3, "seed": 7})");
    const RunOutput out = run_scenario(s);
    REQUIRE(out.rows.size() == 1);
    CHECK(out.rows.front().imsi_exposure_count <= 5);
    CHECK(out.rows.front().auth_success_rate == 1.0);
}

TEST_CASE("metrics CSV round-trips exactly") {
    MetricsRow row;
    row.scheme = "variable";
    row.attack = "intersection";
    row.k = 4;
    row.pool = 100;
    row.marked_fraction = 0.2;
    row.rounds = 10;
    row.trials = 1000;
    row.success_rate = 1.0 / 3.0;
    row.ci_low = 0.311;
    row.ci_high = 0.355;
    row.mean_candidate_size = 2.25;
    row.auth_success_rate = 1.0;
    row.recovery_count = 2;
    row.imsi_exposure_count = 1;

    MetricsRow failed;
    failed.scheme = "baseline";
    failed.attack = "mark";
    failed.error = "pool too small, for k";  // commas are sanitized

    const std::string path = "metrics_test.tmp";
    emit_metrics({row, failed}, path);
    const auto parsed = parse_metrics(path);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0] == row);
    CHECK(parsed[1].error == "pool too small; for k");
    std::filesystem::remove(path);
}

TEST_CASE("zero rows emit a header-only CSV") {
    const std::string path = "metrics_empty.tmp";
    emit_metrics({}, path);
    const auto parsed = parse_metrics(path);
    CHECK(parsed.empty());
    std::filesystem::remove(path);
}

TEST_CASE("transcripts record every exchanged message") {
    const Scenario s = parse_scenario_text(
        R"({"scheme": "variable", "subscribers": 1, "k": 2,
            "rounds": 2, "trials": 1, "seed": 8})");
    const RunOutput out = run_scenario(s);
    // honest round: attach, forward, AV, challenge, response, result
    CHECK(out.transcript.size() == 12);
    const std::string path = "transcript_test.tmp";
    emit_transcript(out.transcript, path);
    std::ifstream in(path);
    std::string line;
    size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == out.transcript.size());
    std::filesystem::remove(path);
}

TEST_CASE("baseline scenario rows expose the IMSI every round") {
    const Scenario s = parse_scenario_text(
        R"({"scheme": "baseline", "subscribers": 1, "k": 4,
            "rounds": 20, "trials": 1, "seed": 9})");
    const RunOutput out = run_scenario(s);
    REQUIRE(out.rows.size() == 1);
    const MetricsRow& row = out.rows.front();
    CHECK(row.auth_success_rate == 1.0);
    CHECK(row.imsi_exposure_count == 20);
    // the static identity is pinned by intersection across 20 rounds
    CHECK(row.success_rate == 1.0);
}
