// cdet: detect controversial events in a tweet stream, score their market impact,
// and generate or evaluate synthetic streams.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cdet/commands.hpp"
#include "cdet/error.hpp"
#include "cdet/ingest.hpp"
#include "cdet/log.hpp"
#include "cdet/pipeline.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::string> format;
    int verbose = 0;

    std::optional<std::string> input;
    std::optional<std::string> phrases;
    std::optional<std::int64_t> lateness;
    std::optional<std::string> checkpoint_in;
    std::optional<std::string> checkpoint_out;
    std::optional<std::string> today;

    std::optional<std::string> prices;
    std::optional<std::string> index;
    std::optional<std::string> event_date;
    std::optional<std::size_t> window_days;
    std::optional<std::size_t> bins;

    std::optional<std::string> scenario;
    std::optional<std::string> truth;
    std::optional<std::string> report;
};

cdet::RunConfig build_config(const Overrides& o) {
    cdet::RunConfig cfg = o.config_path.empty() ? cdet::RunConfig{} : cdet::RunConfig::load(o.config_path);
    auto set = [](auto& field, const auto& value) {
        if (value) field = *value;
    };
    set(cfg.output, o.out);
    if (o.format) {
        if (*o.format == "json") {
            cfg.format = cdet::ReportFormat::Json;
        } else if (*o.format == "table") {
            cfg.format = cdet::ReportFormat::Table;
        } else {
            throw cdet::Error(cdet::Errc::InvalidConfig, "--format must be json or table");
        }
    }
    set(cfg.input, o.input);
    if (o.phrases) cfg.phrases = cdet::PhraseFilter::from_csv(*o.phrases).phrases();
    set(cfg.lateness_seconds, o.lateness);
    set(cfg.checkpoint_in, o.checkpoint_in);
    set(cfg.checkpoint_out, o.checkpoint_out);
    if (o.today) cfg.today = cdet::parse_date(*o.today);
    set(cfg.prices, o.prices);
    set(cfg.index, o.index);
    if (o.event_date) cfg.event_date = cdet::parse_date(*o.event_date);
    set(cfg.window_days, o.window_days);
    set(cfg.histogram_bins, o.bins);
    set(cfg.scenario, o.scenario);
    set(cfg.truth, o.truth);
    set(cfg.report, o.report);
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controversial event detection over tweet streams"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Overrides o;

    app.add_option("--config", o.config_path, "JSON run configuration");
    app.add_option("--out", o.out, "Output path (default: stdout)");
    app.add_option("--format", o.format, "Report format: json or table");
    app.add_flag("-v,--verbose", o.verbose, "More log output on stderr (repeat for debug)");

    auto* detect = app.add_subcommand("detect", "Cluster a tweet stream and rank controversial events");
    detect->add_option("--input", o.input, "JSON-lines file or tcp://host:port");
    detect->add_option("--phrases", o.phrases, "Comma-separated filter phrases");
    detect->add_option("--lateness-seconds", o.lateness, "Reorder window for out-of-order records");
    detect->add_option("--checkpoint-in", o.checkpoint_in, "Resume from a saved cluster state");
    detect->add_option("--checkpoint-out", o.checkpoint_out, "Save the final cluster state");
    detect->add_option("--today", o.today, "Scoring day (default: day of the last tweet)");

    auto* market = app.add_subcommand("market", "Daily returns, z-score and histogram around an event");
    market->add_option("--prices", o.prices, "CSV with header date,close");
    market->add_option("--index", o.index, "Optional index CSV paired by date");
    market->add_option("--event-date", o.event_date, "Event day (YYYY-MM-DD)");
    market->add_option("--window-days", o.window_days, "Returns before the event used for the baseline");
    market->add_option("--bins", o.bins, "Histogram bins");

    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic stream");
    synth->add_option("--scenario", o.scenario, "Scenario JSON (default: built-in reference scenario)");
    synth->add_option("--truth", o.truth, "Ground-truth output (default: <out>.truth.json)");

    auto* evaluate = app.add_subcommand("evaluate", "Score a detection report against ground truth");
    evaluate->add_option("--report", o.report, "Detection report JSON");
    evaluate->add_option("--truth", o.truth, "Ground-truth JSON from synth");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : cdet::kExitConfig;
    }

    auto level = o.verbose >= 2 ? cdet::LogLevel::Debug : o.verbose == 1 ? cdet::LogLevel::Info : cdet::LogLevel::Warn;
    cdet::Logger log(std::cerr, level);

    cdet::RunConfig config;
    try {
        config = build_config(o);
    } catch (const cdet::Error& e) {
        log.error("config_rejected", {{"message", e.what()}});
        return cdet::kExitConfig;
    }

    std::ios::sync_with_stdio(false);
    if (detect->parsed()) return cdet::cmd_detect(config, log, std::cout);
    if (market->parsed()) return cdet::cmd_market(config, log, std::cout);
    if (synth->parsed()) return cdet::cmd_synth(config, log, std::cout);
    return cdet::cmd_evaluate(config, log, std::cout);
}
