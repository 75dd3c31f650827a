#include "cdet/report.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cdet/detail/json_writer.hpp"
#include "cdet/error.hpp"

namespace cdet {
namespace {

using detail::JsonWriter;
using detail::format_fixed;

void write_terms(JsonWriter& w, const std::vector<std::pair<std::string, int>>& terms) {
    w.begin_array();
    for (const auto& [term, count] : terms) {
        w.begin_object();
        w.field("term", term);
        w.field("count", count);
        w.end_object();
    }
    w.end_array();
}

std::string join_terms(const std::vector<std::pair<std::string, int>>& terms) {
    std::string out;
    for (const auto& [term, count] : terms) {
        if (!out.empty()) out += ", ";
        out += fmt::format("{}({})", term, count);
    }
    return out;
}

void write_stats(JsonWriter& w, const ReturnStats& stats) {
    w.begin_object();
    w.field("mean", stats.mean);
    w.field("std", stats.std);
    w.field("n", static_cast<std::uint64_t>(stats.n));
    w.end_object();
}

void write_series(JsonWriter& w, const SeriesAnalysis& s) {
    w.begin_object();
    w.field("symbol", s.symbol);
    w.key("event_date");
    s.event_date ? w.value(format_date(*s.event_date)) : w.null();
    w.key("event_return");
    s.event_return ? w.value(*s.event_return) : w.null();
    w.key("zscore");
    s.zscore ? w.value(*s.zscore) : w.null();
    w.key("stats");
    write_stats(w, s.stats);
    w.key("histogram").begin_array();
    for (const auto& bin : s.histogram) {
        w.begin_object();
        w.field("low", bin.low);
        w.field("high", bin.high);
        w.field("count", static_cast<std::uint64_t>(bin.count));
        w.end_object();
    }
    w.end_array();
    w.key("returns").begin_array();
    for (const auto& r : s.returns) {
        w.begin_object();
        w.field("date", format_date(r.date));
        w.field("return", r.value);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

std::string series_table(const SeriesAnalysis& s) {
    std::string out = fmt::format("{}: {} returns, mean {} std {} (n={})\n", s.symbol.empty() ? "asset" : s.symbol,
                                  s.returns.size(), format_fixed(s.stats.mean), format_fixed(s.stats.std), s.stats.n);
    if (s.event_date && s.event_return && s.zscore)
        out += fmt::format("  event {} return {} z {}\n", format_date(*s.event_date), format_fixed(*s.event_return),
                           format_fixed(*s.zscore));
    for (const auto& bin : s.histogram)
        out += fmt::format("  [{:>10}, {:>10}] {:>5} {}\n", format_fixed(bin.low), format_fixed(bin.high), bin.count,
                           std::string(std::min<std::size_t>(bin.count, 60), '#'));
    return out;
}

} // namespace

std::string render_detection(const DetectionResult& result, const RunConfig& config, ReportFormat format) {
    const auto& s = result.summary;
    if (format == ReportFormat::Table) {
        std::string out;
        out += fmt::format("today {}  admitted {}  candidates {}  controversial {}\n",
                           result.today ? format_date(*result.today) : std::string("-"), s.admitted,
                           s.candidate_events, s.controversial_events);
        out += fmt::format("records {}  parse errors {}  dropped {}  non-english {}  discarded {}\n", s.replay.total,
                           s.replay.parse_errors, s.replay.dropped(), s.non_english, s.discarded);
        out += fmt::format("\n{:>4} {:>8} {:>5} {:>9} {:>10} {:>5} {:>10} {:>8} {:>6}  {}\n", "rank", "cluster", "ctrv",
                           "score", "velocity", "news", "sentiment", "members", "burst", "top terms");
        std::size_t rank = 0;
        for (const auto& r : result.reports) {
            out += fmt::format("{:>4} {:>8} {:>5} {:>9} {:>10} {:>5} {:>10} {:>8} {:>6}  {}\n", ++rank, r.cluster_id,
                               r.controversial ? "yes" : "no", format_fixed(r.rank_score).substr(0, 8),
                               format_fixed(r.burst_velocity).substr(0, 9), r.news_count,
                               format_fixed(r.sentiment_mean).substr(0, 9), r.member_count, r.burst_flag ? "yes" : "no",
                               join_terms(r.top_terms));
        }
        if (!result.daily.empty()) {
            out += fmt::format("\n{:<10} {:>8} {:>6} {:>10}  {}\n", "date", "cluster", "count", "sentiment", "top terms");
            for (const auto& d : result.daily)
                out += fmt::format("{:<10} {:>8} {:>6} {:>10}  {}\n", format_date(d.day), d.cluster_id, d.count,
                                   format_fixed(d.sentiment_mean).substr(0, 9), join_terms(d.top_terms));
        }
        return out;
    }

    JsonWriter w;
    w.begin_object();
    w.field("schema_version", kReportSchemaVersion);
    w.field("kind", "detection");
    w.key("today");
    result.today ? w.value(format_date(*result.today)) : w.null();

    w.key("config").begin_object();
    w.field("merge_threshold", config.cluster.merge_threshold);
    w.field("min_event_size", static_cast<std::uint64_t>(config.cluster.min_event_size));
    w.field("inactivity_expiry_hours",
            std::chrono::duration<double, std::ratio<3600>>(config.cluster.inactivity_expiry).count());
    w.field("burst_velocity_threshold", config.controversy.burst_velocity_threshold);
    w.key("rank_weights").begin_array();
    for (double weight : config.controversy.rank_weights) w.value(weight);
    w.end_array();
    w.field("news_count_gate", static_cast<std::uint64_t>(config.controversy.news_count_gate));
    w.field("burst_volume", config.controversy.burst_volume == BurstVolume::Cluster ? "cluster" : "entity");
    w.end_object();

    w.key("summary").begin_object();
    auto count = [&](std::string_view name, std::size_t n) { w.field(name, static_cast<std::uint64_t>(n)); };
    count("records_total", s.replay.total);
    count("parse_errors", s.replay.parse_errors);
    count("filtered_out", s.replay.filtered_out);
    count("late_drops", s.replay.late_drops);
    count("duplicates", s.replay.duplicates);
    count("dropped", s.replay.dropped());
    count("yielded", s.replay.yielded);
    count("non_english", s.non_english);
    count("discarded", s.discarded);
    count("admitted", s.admitted);
    count("unresolved_links", s.unresolved_links);
    count("expired_clusters", s.expired_clusters);
    count("expired_members", s.expired_members);
    count("live_clusters", s.live_clusters);
    count("max_live_clusters", s.max_live_clusters);
    count("candidate_events", s.candidate_events);
    count("controversial_events", s.controversial_events);
    w.end_object();

    w.key("events").begin_array();
    std::size_t rank = 0;
    for (const auto& r : result.reports) {
        w.begin_object();
        w.field("rank", static_cast<std::uint64_t>(++rank));
        w.field("cluster_id", static_cast<std::uint64_t>(r.cluster_id));
        w.field("controversial", r.controversial);
        w.field("rank_score", r.rank_score);
        w.field("burst_flag", r.burst_flag);
        w.field("burst_velocity", r.burst_velocity);
        w.field("news_count", static_cast<std::uint64_t>(r.news_count));
        w.field("news_score", r.news_score);
        w.field("sentiment_mean", r.sentiment_mean);
        w.field("member_count", static_cast<std::uint64_t>(r.member_count));
        w.key("top_terms");
        write_terms(w, r.top_terms);
        w.key("member_ids").begin_array();
        for (const auto& id : r.member_ids) w.value(id);
        w.end_array();
        w.end_object();
    }
    w.end_array();

    w.key("daily_clusters").begin_array();
    for (const auto& d : result.daily) {
        w.begin_object();
        w.field("date", format_date(d.day));
        w.field("cluster_id", static_cast<std::uint64_t>(d.cluster_id));
        w.field("count", static_cast<std::uint64_t>(d.count));
        w.field("sentiment_mean", d.sentiment_mean);
        w.key("top_terms");
        write_terms(w, d.top_terms);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

std::vector<ControversyReport> parse_detection_report(std::string_view text) {
    try {
        auto doc = nlohmann::json::parse(text);
        if (!doc.is_object() || !doc.contains("schema_version") || !doc.contains("events"))
            throw Error(Errc::MalformedRecord, "not a detection report");
        std::vector<ControversyReport> reports;
        for (const auto& e : doc.at("events")) {
            ControversyReport r;
            r.cluster_id = e.at("cluster_id").get<ClusterId>();
            r.controversial = e.at("controversial").get<bool>();
            r.rank_score = e.at("rank_score").get<double>();
            r.burst_flag = e.at("burst_flag").get<bool>();
            r.burst_velocity = e.at("burst_velocity").get<double>();
            r.news_count = e.at("news_count").get<std::size_t>();
            r.news_score = e.at("news_score").get<double>();
            r.sentiment_mean = e.at("sentiment_mean").get<double>();
            r.member_count = e.at("member_count").get<std::size_t>();
            for (const auto& t : e.at("top_terms")) r.top_terms.emplace_back(t.at("term"), t.at("count"));
            r.member_ids = e.at("member_ids").get<std::vector<std::string>>();
            reports.push_back(std::move(r));
        }
        return reports;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::MalformedRecord, fmt::format("detection report: {}", e.what()));
    }
}

SeriesAnalysis analyze_series(const PriceSeries& series, std::optional<Date> event_date, std::size_t window_days,
                              std::size_t bins) {
    SeriesAnalysis out;
    out.symbol = series.symbol();
    out.returns = daily_returns(series);
    if (event_date) {
        auto impact = analyze_event(out.returns, *event_date, window_days, bins);
        out.stats = impact.stats;
        out.histogram = std::move(impact.histogram);
        out.event_date = impact.event_date;
        out.event_return = impact.event_return;
        out.zscore = impact.zscore;
    } else {
        auto values = values_of(out.returns);
        out.stats = return_stats(values);
        out.histogram = return_histogram(values, bins);
    }
    return out;
}

std::string render_market(const MarketAnalysis& analysis, ReportFormat format) {
    if (format == ReportFormat::Table) {
        std::string out = series_table(analysis.asset);
        if (analysis.index) {
            out += series_table(*analysis.index);
            out += fmt::format("{} paired trading days\n", analysis.paired.size());
        }
        return out;
    }
    JsonWriter w;
    w.begin_object();
    w.field("schema_version", kReportSchemaVersion);
    w.field("kind", "market");
    w.field("window_days", static_cast<std::uint64_t>(analysis.window_days));
    w.key("asset");
    write_series(w, analysis.asset);
    w.key("index");
    if (analysis.index) {
        write_series(w, *analysis.index);
    } else {
        w.null();
    }
    w.key("paired").begin_array();
    for (const auto& p : analysis.paired) {
        w.begin_object();
        w.field("date", format_date(p.date));
        w.field("asset", p.asset);
        w.field("index", p.index);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    return w.str();
}

std::string render_evaluation(const EvaluationResult& r, ReportFormat format) {
    if (format == ReportFormat::Table) {
        return fmt::format("precision {}  recall {}  f1 {}\nflagged {}  true-positive flags {}  detected {}/{}\n",
                           format_fixed(r.precision), format_fixed(r.recall), format_fixed(r.f1), r.flagged,
                           r.true_positive_flags, r.detected_events, r.positive_events);
    }
    JsonWriter w;
    w.begin_object();
    w.field("schema_version", kReportSchemaVersion);
    w.field("kind", "evaluation");
    w.field("precision", r.precision);
    w.field("recall", r.recall);
    w.field("f1", r.f1);
    w.field("flagged", static_cast<std::uint64_t>(r.flagged));
    w.field("true_positive_flags", static_cast<std::uint64_t>(r.true_positive_flags));
    w.field("positive_events", static_cast<std::uint64_t>(r.positive_events));
    w.field("detected_events", static_cast<std::uint64_t>(r.detected_events));
    w.end_object();
    return w.str();
}

} // namespace cdet
