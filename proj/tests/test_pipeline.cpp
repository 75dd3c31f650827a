#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cdet/commands.hpp"
#include "cdet/error.hpp"
#include "cdet/pipeline.hpp"
#include "cdet/report.hpp"
#include "cdet/synth.hpp"
#include "test_support.hpp"

using namespace cdet;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

/// Runs the command-line tool with stdout captured to a file and stderr discarded.
CliResult run_cli(const test::TempDir& dir, const std::string& args) {
    auto out_path = dir.path() / "stdout.txt";
    std::string cmd = std::string("\"") + CDET_CLI_PATH + "\" " + args + " > \"" + out_path.string() + "\" 2>/dev/null";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = test::read(out_path);
    return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("run config parsing") {
    auto cfg = RunConfig::from_json(R"({"merge_threshold": 0.6, "phrases": ["acme"], "burst_volume": "entity",
                                        "rank_weights": [0.5, 0.25, 0.25], "today": "2018-04-12"})");
    CHECK(cfg.cluster.merge_threshold == 0.6);
    CHECK(cfg.phrases == std::vector<std::string>{"acme"});
    CHECK(cfg.controversy.burst_volume == BurstVolume::Entity);
    CHECK(cfg.today == parse_date("2018-04-12"));
    CHECK(test::error_code_of([] { RunConfig::from_json(R"({"merge_treshold": 0.6})"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { RunConfig::from_json(R"({"merge_threshold": "high"})"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { RunConfig::from_json(R"({"rank_weights": [1, 1, 1]})"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { RunConfig::from_json("not json"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { RunConfig::load("/nonexistent/config.json"); }) == Errc::InvalidConfig);
}

TEST_CASE("detector language filter and counters") {
    RunConfig cfg;
    cfg.phrases = {"acme"};
    Detector d(cfg);
    Tweet t;
    t.creation_time = parse_timestamp("2018-04-12T10:00:00Z");
    t.text = "acme stores protest arrest";
    t.posting_id = "1";
    t.language = "es";
    d.process(t);
    t.posting_id = "2";
    t.language = "en-GB";
    d.process(t);
    t.posting_id = "3";
    t.language = "";
    d.process(t);
    t.posting_id = "4";
    t.text = "the and of";
    d.process(t);
    auto r = d.finish();
    CHECK(r.summary.non_english == 1);
    CHECK(r.summary.admitted == 2);
    CHECK(r.summary.discarded == 1);
    CHECK(r.today == parse_date("2018-04-12"));
}

TEST_CASE("detection on the reference scenario through the library") {
    test::TempDir dir;
    auto stream = generate(ScenarioConfig::reference());
    test::write(dir.path() / "s.jsonl", stream.jsonl());
    RunConfig cfg;
    cfg.input = (dir.path() / "s.jsonl").string();
    cfg.phrases = {ScenarioConfig::reference().entity};
    auto result = run_detection(cfg);
    CHECK(result.summary.admitted == stream.tweets.size());
    REQUIRE_FALSE(result.reports.empty());
    CHECK(result.reports[0].controversial);
    auto eval = evaluate(result.reports, stream.truth);
    CHECK(eval.precision == 1.0);
    CHECK(eval.recall == 1.0);
    CHECK_FALSE(result.daily.empty());

    auto json = render_detection(result, cfg, ReportFormat::Json);
    auto parsed = parse_detection_report(json);
    REQUIRE(parsed.size() == result.reports.size());
    CHECK(parsed[0].member_ids == result.reports[0].member_ids);
    CHECK(render_detection(result, cfg, ReportFormat::Json) == json);
    CHECK(test::error_code_of([] { parse_detection_report("{}"); }) == Errc::MalformedRecord);

    cfg.phrases.clear();
    CHECK(test::error_code_of([&] { run_detection(cfg); }) == Errc::InvalidConfig);
}

TEST_CASE("checkpoint resume matches an uninterrupted run") {
    test::TempDir dir;
    auto stream = generate(ScenarioConfig::reference());
    std::string first, second;
    for (std::size_t i = 0; i < stream.tweets.size(); ++i)
        (i < stream.tweets.size() * 3 / 5 ? first : second) += to_json_line(stream.tweets[i]) + "\n";
    test::write(dir.path() / "all.jsonl", stream.jsonl());
    test::write(dir.path() / "a.jsonl", first);
    test::write(dir.path() / "b.jsonl", second);

    RunConfig cfg;
    cfg.phrases = {"acme"};
    cfg.input = (dir.path() / "all.jsonl").string();
    auto full = run_detection(cfg);

    cfg.input = (dir.path() / "a.jsonl").string();
    cfg.checkpoint_out = (dir.path() / "state.json").string();
    run_detection(cfg);
    cfg.input = (dir.path() / "b.jsonl").string();
    cfg.checkpoint_in = cfg.checkpoint_out;
    cfg.checkpoint_out.clear();
    auto resumed = run_detection(cfg);

    REQUIRE(resumed.reports.size() == full.reports.size());
    for (std::size_t i = 0; i < full.reports.size(); ++i) {
        CHECK(resumed.reports[i].cluster_id == full.reports[i].cluster_id);
        CHECK(resumed.reports[i].member_ids == full.reports[i].member_ids);
        CHECK(resumed.reports[i].rank_score == full.reports[i].rank_score);
        CHECK(resumed.reports[i].controversial == full.reports[i].controversial);
    }
    CHECK(resumed.summary.live_clusters == full.summary.live_clusters);
}

TEST_CASE("cli: synth, detect, evaluate") {
    test::TempDir dir;
    auto stream = dir.path() / "s.jsonl";
    auto report = dir.path() / "r.json";
    REQUIRE(run_cli(dir, "synth --out " + q(stream)).exit_code == 0);
    CHECK(fs::exists(dir.path() / "s.jsonl.truth.json"));
    REQUIRE(run_cli(dir, "detect --input " + q(stream) + " --phrases acme --out " + q(report)).exit_code == 0);
    auto first = test::read(report);
    REQUIRE(run_cli(dir, "--out " + q(report) + " detect --input " + q(stream) + " --phrases acme").exit_code == 0);
    CHECK(test::read(report) == first);

    auto eval = run_cli(dir, "evaluate --report " + q(report) + " --truth " + q(dir.path() / "s.jsonl.truth.json"));
    REQUIRE(eval.exit_code == 0);
    auto doc = nlohmann::json::parse(eval.out);
    CHECK(doc["precision"] == 1.0);
    CHECK(doc["recall"] == 1.0);

    auto table = run_cli(dir, "detect --input " + q(stream) + " --phrases acme --format table");
    CHECK(table.exit_code == 0);
    CHECK(table.out.find("rank") != std::string::npos);
    CHECK(table.out.find("yes") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
    test::TempDir dir;
    auto out = dir.path() / "out.json";

    test::write(dir.path() / "bad.json", R"({"phrases": ["acme"], "merge_treshold": 0.5})");
    auto r = run_cli(dir, "--config " + q(dir.path() / "bad.json") + " --out " + q(out) + " detect");
    CHECK(r.exit_code == 1);
    CHECK_FALSE(fs::exists(out));

    CHECK(run_cli(dir, "detect --phrases acme --input " + q(dir.path() / "missing.jsonl")).exit_code == 2);
    CHECK(run_cli(dir, "frobnicate").exit_code == 1);
    CHECK(run_cli(dir, "detect --input x --phrases acme --format yaml").exit_code == 1);

    test::write(dir.path() / "empty.jsonl", "");
    r = run_cli(dir, "detect --phrases acme --input " + q(dir.path() / "empty.jsonl") + " --out " + q(out));
    CHECK(r.exit_code == 0);
    auto doc = nlohmann::json::parse(test::read(out));
    CHECK(doc["events"].empty());
    CHECK(doc["today"].is_null());

    test::write(dir.path() / "two.csv", "date,close\n2018-04-12,36.5\n2018-04-13,37.0\n");
    CHECK(run_cli(dir, "market --prices " + q(dir.path() / "two.csv")).exit_code == 2);
    CHECK(run_cli(dir, "market --prices " + q(dir.path() / "two.csv") + " --event-date 2018-04-13").exit_code == 2);

    CHECK(run_cli(dir, "evaluate --truth " + q(dir.path() / "t.json")).exit_code == 2);
    CHECK(run_cli(dir, "evaluate --report " + q(dir.path() / "nope.json") + " --truth " + q(dir.path() / "t.json"))
              .exit_code == 2);
}

TEST_CASE("cli: market analysis") {
    test::TempDir dir;
    std::string csv = "date,close\n";
    double close = 100.0;
    Date day = parse_date("2018-01-01");
    for (int i = 0; i < 30; ++i) {
        csv += format_date(day + std::chrono::days{i}) + "," + std::to_string(close) + "\n";
        close *= i % 2 == 0 ? 1.01 : 0.995;
    }
    test::write(dir.path() / "p.csv", csv);
    auto r = run_cli(dir, "market --prices " + q(dir.path() / "p.csv") + " --event-date 2018-01-30 --window-days 20 --bins 4");
    REQUIRE(r.exit_code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["kind"] == "market");
    CHECK(doc["asset"]["stats"]["n"] == 20);
    CHECK(doc["asset"]["histogram"].size() == 4);
    CHECK(doc["asset"]["zscore"].is_number());
}
