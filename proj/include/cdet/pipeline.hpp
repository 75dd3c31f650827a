#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cdet/clustering.hpp"
#include "cdet/controversy.hpp"
#include "cdet/credibility.hpp"
#include "cdet/features.hpp"
#include "cdet/ingest.hpp"
#include "cdet/log.hpp"

namespace cdet {

enum class ResolverMode { Offline, Network };
enum class ReportFormat { Json, Table };

/// Every tunable of a run. Loaded from a JSON object whose keys mirror the field
/// names; unknown keys are rejected so typos fail loudly.
struct RunConfig {
    // I/O
    std::string input;
    std::string output;  // empty: stdout
    ReportFormat format = ReportFormat::Json;
    std::string checkpoint_in;
    std::string checkpoint_out;

    // ingest
    std::vector<std::string> phrases;
    std::int64_t lateness_seconds = 3600;
    bool dedup = false;
    std::vector<std::string> languages{"en"};  // primary subtags; tweets without a language pass

    // features
    std::string lexicon;  // empty: bundled data
    std::string verbs;
    std::string stopwords;
    std::string gazetteer;
    bool use_capitalization = true;

    // clustering
    ClusterParams cluster;

    // credibility
    std::string allowlist;
    std::string redirects;
    ResolverMode resolver_mode = ResolverMode::Offline;
    std::int64_t network_timeout_ms = 3000;
    std::size_t network_max_in_flight = 8;

    // controversy
    ControversyParams controversy;
    std::optional<Date> today;  // default: day of the last admitted tweet

    // market
    std::string prices;
    std::string index;
    std::string symbol;
    std::string index_symbol;
    std::optional<Date> event_date;
    std::size_t window_days = 252;
    std::size_t histogram_bins = 20;

    // synth / evaluate
    std::string scenario;
    std::string truth;
    std::string report;

    static RunConfig from_json(std::string_view text);  // throws Error{InvalidConfig}
    static RunConfig load(const std::string& path);

    void validate() const;  // throws Error{InvalidConfig}
};

struct DetectionSummary {
    ReplayStats replay;
    std::size_t non_english = 0;
    std::size_t discarded = 0;  // no terms left after extraction
    std::size_t admitted = 0;
    std::size_t unresolved_links = 0;
    std::size_t expired_clusters = 0;
    std::size_t expired_members = 0;
    std::size_t live_clusters = 0;
    std::size_t max_live_clusters = 0;
    std::size_t candidate_events = 0;
    std::size_t controversial_events = 0;
};

/// One candidate cluster on one day, as plotted on an event timeline.
struct DailyClusterSummary {
    Date day;
    ClusterId cluster_id = 0;
    std::size_t count = 0;
    double sentiment_mean = 0.0;
    std::vector<std::pair<std::string, int>> top_terms;
};

struct DetectionResult {
    std::vector<ControversyReport> reports;
    std::vector<DailyClusterSummary> daily;
    DetectionSummary summary;
    std::optional<Date> today;
};

/// Feature extraction, clustering and scoring over tweets fed in stream order.
class Detector {
public:
    explicit Detector(const RunConfig& config, Logger& log = Logger::null());
    Detector(const RunConfig& config, FeatureExtractor extractor, AllowList allow, Logger& log = Logger::null());

    void process(const Tweet& tweet);
    DetectionResult finish(const ReplayStats& replay = {});

    const ClusterState& state() const { return state_; }
    const DailyVolume& entity_volume() const { return volume_; }
    const FeatureExtractor& extractor() const { return extractor_; }

private:
    bool language_ok(const Tweet& tweet) const;

    RunConfig config_;
    FeatureExtractor extractor_;
    AllowList allow_;
    ClusterState state_;
    DailyVolume volume_;
    DetectionSummary summary_;
    std::optional<Timestamp> last_time_;
    Logger* log_;
};

/// Builds the feature extractor a config describes (data files, tagger, resolver).
FeatureExtractor make_extractor(const RunConfig& config);
AllowList make_allowlist(const RunConfig& config);

/// Replays config.input through a Detector. Throws Error{SourceUnavailable | InvalidConfig}.
DetectionResult run_detection(const RunConfig& config, Logger& log = Logger::null());

/// Per-day summaries of candidate clusters, ordered by (day, cluster id).
std::vector<DailyClusterSummary> daily_summaries(std::span<const EventCluster* const> events,
                                                 const TermDictionary& dictionary, std::size_t top_terms);

} // namespace cdet
