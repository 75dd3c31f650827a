#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdet/clustering.hpp"
#include "cdet/credibility.hpp"
#include "cdet/time.hpp"

namespace cdet {

/// Tweets per calendar day.
struct DailyVolume {
    std::map<Date, std::size_t> counts;

    void add(Date day, std::size_t n = 1) { counts[day] += n; }
    std::size_t on(Date day) const;

    static DailyVolume of_cluster(const EventCluster& cluster);
};

/// Which series feeds the burst test: the cluster's own daily counts or the entity's
/// total admitted volume.
enum class BurstVolume { Cluster, Entity };

struct ControversyParams {
    double burst_velocity_threshold = 2.0;
    std::array<double, 3> rank_weights{0.4, 0.3, 0.3};  // burst, news, sentiment
    std::size_t news_count_gate = 1;
    BurstVolume burst_volume = BurstVolume::Cluster;
    std::size_t top_terms = 5;

    void validate() const;  // throws Error{InvalidConfig}
};

inline constexpr int kBurstBaselineDays = 7;

struct BurstResult {
    bool flag = false;
    double velocity = 0.0;
};

/// velocity = volume[today] / max(1, mean of the 7 days before today, missing days 0).
/// Flagged when velocity reaches the threshold and the cluster has a member today.
BurstResult burstiness(const EventCluster& cluster, const DailyVolume& volume, const ControversyParams& params,
                       Date today);

/// Arithmetic mean of member sentiments. Throws Error{InsufficientData} on an empty cluster.
double event_sentiment(const EventCluster& cluster);

struct Newsworthiness {
    std::size_t count = 0;
    double score = 0.0;  // ln(1 + count)
};

Newsworthiness newsworthiness(const EventCluster& cluster, const AllowList& allow);

struct ControversyReport {
    ClusterId cluster_id = 0;
    bool burst_flag = false;
    double burst_velocity = 0.0;
    std::size_t news_count = 0;
    double news_score = 0.0;
    double sentiment_mean = 0.0;
    bool controversial = false;
    double rank_score = 0.0;
    std::vector<std::pair<std::string, int>> top_terms;
    std::size_t member_count = 0;
    std::vector<std::string> member_ids;
};

/// The controversy gate: negative sentiment, a burst, and enough credible links.
bool is_controversial(double sentiment_mean, bool burst_flag, std::size_t news_count, const ControversyParams& params);

/// w_burst * min(v/threshold, 2)/2 + w_news * s/(1+s) + w_sent * max(0, -sentiment)/2.
double rank_score(const BurstResult& burst, const Newsworthiness& news, double sentiment_mean,
                  const ControversyParams& params);

/// Most frequent terms of a cluster (ties broken alphabetically).
std::vector<std::pair<std::string, int>> top_terms(const EventCluster& cluster, const TermDictionary& dictionary,
                                                   std::size_t limit);

/// Scores every event and sorts by (controversial desc, rank_score desc, cluster_id asc).
std::vector<ControversyReport> classify_and_rank(std::span<const EventCluster* const> events,
                                                 const DailyVolume& entity_volume, const AllowList& allow,
                                                 const ControversyParams& params, Date today,
                                                 const TermDictionary& dictionary);

} // namespace cdet
