#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdet/controversy.hpp"
#include "cdet/features.hpp"

namespace cdet {

struct InjectedEvent {
    std::string name;
    int start_day = 0;
    int duration_days = 1;
    int peak_rate = 0;  // tweets per active day
    /// The first three entries form the core every event tweet carries; the rest are
    /// optional extras.
    std::vector<std::string> term_pool;
    double sentiment_min = -2.0;
    double sentiment_max = -1.0;
    int credible_link_count = 0;
    int noncredible_link_count = 0;
};

struct ScenarioConfig {
    std::uint64_t seed = 42;
    int days = 7;
    std::string start_date = "2018-04-06";
    std::string entity = "acme";  // written lowercase into every tweet so the filter matches
    int ambient_rate = 100;       // tweets per day
    std::vector<std::vector<std::string>> ambient_topics;
    std::vector<InjectedEvent> injected_events;
    double vocabulary_noise = 0.05;          // chance a tweet gains one random noise term
    double ambient_link_probability = 0.05;  // ambient links always point at non-credible hosts

    /// Throws Error{InvalidConfig}; unknown keys are rejected.
    static ScenarioConfig from_json(std::string_view text);
    static ScenarioConfig load(const std::filesystem::path& path);
    std::string to_json() const;

    void validate() const;  // throws Error{InvalidConfig}

    /// Seven ambient days at 100/day and one negative two-day event of 60 tweets with
    /// two credible links.
    static ScenarioConfig reference();
};

struct GroundTruthEvent {
    std::string name;
    std::vector<std::string> tweet_ids;
    bool expected_controversial = false;
};

struct GroundTruth {
    std::vector<GroundTruthEvent> events;

    std::string to_json() const;
    static GroundTruth from_json(std::string_view text);  // throws Error{InvalidConfig}
    static GroundTruth load(const std::filesystem::path& path);
};

struct SyntheticStream {
    std::vector<Tweet> tweets;  // timestamp order
    GroundTruth truth;

    std::string jsonl() const;
};

/// Deterministic: the output is a pure function of the config (and lexicon).
/// Throws Error{InvalidConfig}.
SyntheticStream generate(const ScenarioConfig& config, const SentimentLexicon& lexicon);
SyntheticStream generate(const ScenarioConfig& config);

/// Credible hosts the generator links to; all are on the bundled allowlist.
std::span<const std::string_view> synthetic_credible_hosts();

struct EvaluationResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t flagged = 0;
    std::size_t true_positive_flags = 0;
    std::size_t positive_events = 0;
    std::size_t detected_events = 0;
};

/// A positive event is detected when some controversial report holds more than half of
/// its tweet ids. A controversial report is a true positive when more than half of its
/// members come from one positive event.
EvaluationResult evaluate(std::span<const ControversyReport> reports, const GroundTruth& truth);

/// Same, reading membership from the cluster state for reports that carry no member ids.
EvaluationResult evaluate(std::span<const ControversyReport> reports, const ClusterState& clusters,
                          const GroundTruth& truth);

/// Portable uniform draws over a standard engine (std distributions are not
/// reproducible across standard libraries).
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t below(std::uint64_t bound);
    double unit();  // [0, 1)
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace cdet
