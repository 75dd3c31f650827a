#include "cdet/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"
#include "cdet/market.hpp"
#include "cdet/report.hpp"
#include "cdet/synth.hpp"

namespace cdet {
namespace {

void emit(const RunConfig& config, std::ostream& out, std::string_view content) {
    if (config.output.empty()) {
        out << content;
        out.flush();
    } else {
        write_file_atomic(config.output, content);
    }
}

template <typename Fn>
int guarded(std::string_view command, Logger& log, Fn&& body) {
    try {
        body();
        return kExitOk;
    } catch (const Error& e) {
        log.error("command_failed", {{"command", command}, {"code", errc_name(e.code())}, {"message", e.what()}});
        return exit_code_for(e);
    } catch (const std::exception& e) {
        log.error("command_failed", {{"command", command}, {"message", e.what()}});
        return kExitInput;
    }
}

} // namespace

int exit_code_for(const Error& error) { return error.code() == Errc::InvalidConfig ? kExitConfig : kExitInput; }

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
        if (!file) throw Error(Errc::Io, fmt::format("cannot write {}", tmp.string()));
        file.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!file) throw Error(Errc::Io, fmt::format("write failed for {}", tmp.string()));
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(Errc::Io, fmt::format("cannot move output into place at {}", path));
    }
}

int cmd_detect(const RunConfig& config, Logger& log, std::ostream& out) {
    return guarded("detect", log, [&] {
        if (config.input.empty()) throw Error(Errc::InvalidConfig, "detect needs an input stream");
        auto result = run_detection(config, log);
        emit(config, out, render_detection(result, config, config.format));
    });
}

int cmd_market(const RunConfig& config, Logger& log, std::ostream& out) {
    return guarded("market", log, [&] {
        if (config.prices.empty()) throw Error(Errc::InvalidConfig, "market needs a price CSV");
        MarketAnalysis analysis;
        analysis.window_days = config.window_days;
        auto asset = PriceSeries::load_csv(config.prices, config.symbol);
        analysis.asset = analyze_series(asset, config.event_date, config.window_days, config.histogram_bins);
        if (!config.index.empty()) {
            auto index = PriceSeries::load_csv(config.index, config.index_symbol);
            analysis.index = analyze_series(index, config.event_date, config.window_days, config.histogram_bins);
            analysis.paired = pair_returns(analysis.asset.returns, analysis.index->returns);
        }
        emit(config, out, render_market(analysis, config.format));
    });
}

int cmd_synth(const RunConfig& config, Logger& log, std::ostream& out) {
    return guarded("synth", log, [&] {
        ScenarioConfig scenario = config.scenario.empty() ? ScenarioConfig::reference() : [&] {
            std::string text;
            try {
                text = detail::read_file(config.scenario);
            } catch (const Error& e) {
                throw Error(Errc::Io, e.what());
            }
            return ScenarioConfig::from_json(text);
        }();
        auto stream = generate(scenario);
        emit(config, out, stream.jsonl());
        std::string truth_path = config.truth;
        if (truth_path.empty() && !config.output.empty()) truth_path = config.output + ".truth.json";
        if (!truth_path.empty()) write_file_atomic(truth_path, stream.truth.to_json() + "\n");
        log.info("synth_done", {{"tweets", stream.tweets.size()}, {"events", stream.truth.events.size()}});
    });
}

int cmd_evaluate(const RunConfig& config, Logger& log, std::ostream& out) {
    return guarded("evaluate", log, [&] {
        if (config.report.empty()) throw Error(Errc::Io, "evaluate needs a detection report");
        if (config.truth.empty()) throw Error(Errc::Io, "evaluate needs a ground-truth file");
        auto reports = parse_detection_report(detail::read_file(config.report));
        GroundTruth truth;
        try {
            truth = GroundTruth::load(config.truth);
        } catch (const Error& e) {
            throw Error(Errc::MalformedRecord, e.what());
        }
        emit(config, out, render_evaluation(evaluate(reports, truth), config.format));
    });
}

} // namespace cdet
