#include "cdet/pipeline.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"
#include "cdet/network.hpp"

namespace cdet {
namespace {

using nlohmann::json;

constexpr std::chrono::hours kSweepInterval{1};

const std::vector<std::string_view>& known_keys() {
    static const std::vector<std::string_view> keys = {
        "input", "output", "format", "checkpoint_in", "checkpoint_out",
        "phrases", "lateness_seconds", "dedup", "languages",
        "lexicon", "verbs", "stopwords", "gazetteer", "use_capitalization",
        "merge_threshold", "min_event_size", "inactivity_expiry_hours",
        "allowlist", "redirects", "resolver_mode", "network_timeout_ms", "network_max_in_flight",
        "burst_velocity_threshold", "rank_weights", "news_count_gate", "burst_volume", "top_terms", "today",
        "prices", "index", "symbol", "index_symbol", "event_date", "window_days", "histogram_bins",
        "scenario", "truth", "report",
    };
    return keys;
}

// Looks up redirects offline first and only then asks the network.
class ChainedRedirects final : public RedirectSource {
public:
    ChainedRedirects(std::shared_ptr<const RedirectSource> first, std::shared_ptr<const RedirectSource> second)
        : first_(std::move(first)), second_(std::move(second)) {}

    std::optional<std::string> next_hop(const std::string& url) const override {
        if (auto hop = first_->next_hop(url)) return hop;
        return second_->next_hop(url);
    }

private:
    std::shared_ptr<const RedirectSource> first_;
    std::shared_ptr<const RedirectSource> second_;
};

std::string primary_subtag(std::string_view language) {
    auto cut = language.find_first_of("-_");
    return detail::to_lower(detail::trim(language.substr(0, cut)));
}

} // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

RunConfig RunConfig::from_json(std::string_view text) {
    RunConfig cfg;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
    const auto& keys = known_keys();
    for (const auto& [key, value] : doc.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw Error(Errc::InvalidConfig, fmt::format("unknown config key '{}'", key));

    auto get = [&](const char* key, auto& out) {
        if (auto it = doc.find(key); it != doc.end()) {
            try {
                out = it->get<std::decay_t<decltype(out)>>();
            } catch (const json::exception&) {
                throw Error(Errc::InvalidConfig, fmt::format("config key '{}' has the wrong type", key));
            }
        }
    };
    auto get_date = [&](const char* key, std::optional<Date>& out) {
        std::string text;
        get(key, text);
        if (!text.empty()) {
            try {
                out = parse_date(text);
            } catch (const Error& e) {
                throw Error(Errc::InvalidConfig, fmt::format("config key '{}': {}", key, e.what()));
            }
        }
    };

    get("input", cfg.input);
    get("output", cfg.output);
    std::string format = "json";
    get("format", format);
    if (format == "json") {
        cfg.format = ReportFormat::Json;
    } else if (format == "table") {
        cfg.format = ReportFormat::Table;
    } else {
        throw Error(Errc::InvalidConfig, fmt::format("format must be json or table, got '{}'", format));
    }
    get("checkpoint_in", cfg.checkpoint_in);
    get("checkpoint_out", cfg.checkpoint_out);

    get("phrases", cfg.phrases);
    get("lateness_seconds", cfg.lateness_seconds);
    get("dedup", cfg.dedup);
    get("languages", cfg.languages);

    get("lexicon", cfg.lexicon);
    get("verbs", cfg.verbs);
    get("stopwords", cfg.stopwords);
    get("gazetteer", cfg.gazetteer);
    get("use_capitalization", cfg.use_capitalization);

    get("merge_threshold", cfg.cluster.merge_threshold);
    get("min_event_size", cfg.cluster.min_event_size);
    double expiry_hours = std::chrono::duration<double, std::ratio<3600>>(cfg.cluster.inactivity_expiry).count();
    get("inactivity_expiry_hours", expiry_hours);
    if (!(expiry_hours > 0.0)) throw Error(Errc::InvalidConfig, "inactivity_expiry_hours must be positive");
    cfg.cluster.inactivity_expiry = std::chrono::seconds{static_cast<std::int64_t>(expiry_hours * 3600.0)};

    get("allowlist", cfg.allowlist);
    get("redirects", cfg.redirects);
    std::string resolver = "offline";
    get("resolver_mode", resolver);
    if (resolver == "offline") {
        cfg.resolver_mode = ResolverMode::Offline;
    } else if (resolver == "network") {
        cfg.resolver_mode = ResolverMode::Network;
    } else {
        throw Error(Errc::InvalidConfig, fmt::format("resolver_mode must be offline or network, got '{}'", resolver));
    }
    get("network_timeout_ms", cfg.network_timeout_ms);
    get("network_max_in_flight", cfg.network_max_in_flight);

    get("burst_velocity_threshold", cfg.controversy.burst_velocity_threshold);
    if (auto it = doc.find("rank_weights"); it != doc.end()) {
        std::vector<double> weights;
        get("rank_weights", weights);
        if (weights.size() != 3) throw Error(Errc::InvalidConfig, "rank_weights needs exactly 3 numbers");
        std::copy(weights.begin(), weights.end(), cfg.controversy.rank_weights.begin());
    }
    get("news_count_gate", cfg.controversy.news_count_gate);
    std::string burst_volume = "cluster";
    get("burst_volume", burst_volume);
    if (burst_volume == "cluster") {
        cfg.controversy.burst_volume = BurstVolume::Cluster;
    } else if (burst_volume == "entity") {
        cfg.controversy.burst_volume = BurstVolume::Entity;
    } else {
        throw Error(Errc::InvalidConfig, fmt::format("burst_volume must be cluster or entity, got '{}'", burst_volume));
    }
    get("top_terms", cfg.controversy.top_terms);
    get_date("today", cfg.today);

    get("prices", cfg.prices);
    get("index", cfg.index);
    get("symbol", cfg.symbol);
    get("index_symbol", cfg.index_symbol);
    get_date("event_date", cfg.event_date);
    get("window_days", cfg.window_days);
    get("histogram_bins", cfg.histogram_bins);

    get("scenario", cfg.scenario);
    get("truth", cfg.truth);
    get("report", cfg.report);

    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::string text;
    try {
        text = detail::read_file(path);
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.what());
    }
    return from_json(text);
}

void RunConfig::validate() const {
    auto bad = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
    cluster.validate();
    controversy.validate();
    if (lateness_seconds < 0) bad("lateness_seconds must be nonnegative");
    for (const auto& phrase : phrases)
        if (detail::trim(phrase).empty()) bad("phrases must not contain blank entries");
    if (network_timeout_ms <= 0) bad("network_timeout_ms must be positive");
    if (network_max_in_flight == 0) bad("network_max_in_flight must be at least 1");
    if (window_days < 2) bad("window_days must be at least 2");
    if (histogram_bins == 0) bad("histogram_bins must be at least 1");
}

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

FeatureExtractor make_extractor(const RunConfig& config) {
    std::shared_ptr<const LanguageResources> resources = LanguageResources::bundled();
    if (!config.verbs.empty() || !config.stopwords.empty() || !config.gazetteer.empty()) {
        auto custom = std::make_shared<LanguageResources>(*resources);
        if (!config.verbs.empty()) custom->verbs = VerbLexicon::parse(detail::read_file(config.verbs));
        if (!config.stopwords.empty()) custom->stopwords = WordList::parse(detail::read_file(config.stopwords));
        if (!config.gazetteer.empty()) custom->gazetteer = Gazetteer::parse(detail::read_file(config.gazetteer));
        resources = std::move(custom);
    }
    auto lexicon = config.lexicon.empty() ? SentimentLexicon::bundled()
                                          : std::make_shared<const SentimentLexicon>(SentimentLexicon::load(config.lexicon));

    std::shared_ptr<const RedirectSource> redirects = std::make_shared<RedirectMap>(
        config.redirects.empty() ? RedirectMap::bundled() : RedirectMap::load(config.redirects));
    if (config.resolver_mode == ResolverMode::Network) {
        HttpRedirectSource::Options options;
        options.timeout = std::chrono::milliseconds{config.network_timeout_ms};
        options.max_in_flight = config.network_max_in_flight;
        redirects = std::make_shared<ChainedRedirects>(std::move(redirects), std::make_shared<HttpRedirectSource>(options));
    }
    auto tagger = std::make_shared<HeuristicTagger>(resources, config.use_capitalization);
    return FeatureExtractor(std::move(tagger), std::move(resources), std::move(lexicon), std::move(redirects));
}

AllowList make_allowlist(const RunConfig& config) {
    return config.allowlist.empty() ? AllowList::bundled() : AllowList::load(config.allowlist);
}

// ---------------------------------------------------------------------------
// Detector
// ---------------------------------------------------------------------------

Detector::Detector(const RunConfig& config, Logger& log)
    : Detector(config, make_extractor(config), make_allowlist(config), log) {}

Detector::Detector(const RunConfig& config, FeatureExtractor extractor, AllowList allow, Logger& log)
    : config_(config), extractor_(std::move(extractor)), allow_(std::move(allow)), state_(config.cluster), log_(&log) {
    if (!config_.checkpoint_in.empty()) {
        state_ = ClusterState::load(config_.checkpoint_in);
        log_->info("checkpoint_loaded", {{"path", config_.checkpoint_in}, {"clusters", state_.size()}});
        for (const auto* cluster : state_.clusters())
            if (!last_time_ || cluster->last_updated > *last_time_) last_time_ = cluster->last_updated;
    }
}

bool Detector::language_ok(const Tweet& tweet) const {
    if (config_.languages.empty() || detail::trim(tweet.language).empty()) return true;
    auto lang = primary_subtag(tweet.language);
    return std::any_of(config_.languages.begin(), config_.languages.end(),
                       [&](const std::string& allowed) { return primary_subtag(allowed) == lang; });
}

void Detector::process(const Tweet& tweet) {
    if (!language_ok(tweet)) {
        ++summary_.non_english;
        return;
    }
    auto result = extractor_.build(tweet);
    if (std::holds_alternative<Discard>(result)) {
        ++summary_.discarded;
        return;
    }
    auto& vec = std::get<TweetVector>(result);
    summary_.unresolved_links += vec.unresolved_links;

    auto swept = state_.last_sweep();
    if (!swept || vec.timestamp - *swept >= kSweepInterval) {
        if (auto removed = state_.expire_inactive(vec.timestamp); removed > 0)
            log_->debug("clusters_expired", {{"count", removed}, {"at", format_timestamp(vec.timestamp)}});
    }

    auto assignment = state_.assign(vec);
    volume_.add(vec.day);
    ++summary_.admitted;
    if (!last_time_ || vec.timestamp > *last_time_) last_time_ = vec.timestamp;
    summary_.max_live_clusters = std::max(summary_.max_live_clusters, state_.size());
    if (log_->enabled(LogLevel::Debug))
        log_->debug("assigned", {{"tweet_id", vec.tweet_id},
                                 {"cluster_id", assignment.cluster_id},
                                 {"merged", assignment.decision == AssignDecision::Merged},
                                 {"distance", assignment.distance}});
}

DetectionResult Detector::finish(const ReplayStats& replay) {
    DetectionResult result;
    summary_.replay = replay;
    summary_.expired_clusters = state_.expired_clusters();
    summary_.expired_members = state_.expired_members();
    summary_.live_clusters = state_.size();

    auto events = state_.candidate_events();
    summary_.candidate_events = events.size();
    result.today = config_.today;
    if (!result.today && last_time_) result.today = day_of(*last_time_);
    if (result.today) {
        result.reports = classify_and_rank(events, volume_, allow_, config_.controversy, *result.today, state_.dictionary());
    }
    summary_.controversial_events = static_cast<std::size_t>(std::count_if(
        result.reports.begin(), result.reports.end(), [](const ControversyReport& r) { return r.controversial; }));
    result.daily = daily_summaries(events, state_.dictionary(), config_.controversy.top_terms);
    result.summary = summary_;

    if (!config_.checkpoint_out.empty()) state_.save(config_.checkpoint_out);
    return result;
}

DetectionResult run_detection(const RunConfig& config, Logger& log) {
    if (config.phrases.empty()) throw Error(Errc::InvalidConfig, "detect needs at least one filter phrase");
    PhraseFilter filter(config.phrases);
    Detector detector(config, log);

    StreamReplayer replayer(open_source(config.input), filter, ReplayOptions{config.lateness_seconds, config.dedup});
    replayer.on_parse_error([&](std::string_view, std::string_view error) {
        log.warn("record_rejected", {{"error", error}});
    });
    while (auto tweet = replayer.next()) detector.process(*tweet);

    const auto& stats = replayer.stats();
    log.info("replay_done", {{"total", stats.total},
                             {"parse_errors", stats.parse_errors},
                             {"dropped", stats.dropped()},
                             {"yielded", stats.yielded}});
    auto result = detector.finish(stats);
    log.info("detect_done", {{"admitted", result.summary.admitted},
                             {"discarded", result.summary.discarded},
                             {"non_english", result.summary.non_english},
                             {"live_clusters", result.summary.live_clusters},
                             {"candidate_events", result.summary.candidate_events},
                             {"controversial_events", result.summary.controversial_events}});
    return result;
}

std::vector<DailyClusterSummary> daily_summaries(std::span<const EventCluster* const> events,
                                                 const TermDictionary& dictionary, std::size_t top_terms) {
    std::vector<DailyClusterSummary> out;
    for (const auto* cluster : events) {
        struct Day {
            std::size_t count = 0;
            double sentiment = 0.0;
            std::map<TermId, double> terms;
        };
        std::map<Date, Day> days;
        for (std::size_t i = 0; i < cluster->member_count(); ++i) {
            auto& day = days[cluster->member_days[i]];
            ++day.count;
            day.sentiment += cluster->sentiments[i];
            for (const auto& [term, weight] : cluster->member_terms[i]) day.terms[term] += weight;
        }
        for (auto& [date, day] : days) {
            DailyClusterSummary summary{date, cluster->cluster_id, day.count,
                                        day.sentiment / static_cast<double>(day.count), {}};
            std::vector<std::pair<std::string, int>> ranked;
            for (const auto& [term, weight] : day.terms)
                ranked.emplace_back(dictionary.term(term), static_cast<int>(weight));
            std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            });
            if (ranked.size() > top_terms) ranked.resize(top_terms);
            summary.top_terms = std::move(ranked);
            out.push_back(std::move(summary));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.day != b.day ? a.day < b.day : a.cluster_id < b.cluster_id;
    });
    return out;
}

} // namespace cdet
