#include "cdet/controversy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cdet/error.hpp"

namespace cdet {

std::size_t DailyVolume::on(Date day) const {
    auto it = counts.find(day);
    return it == counts.end() ? 0 : it->second;
}

DailyVolume DailyVolume::of_cluster(const EventCluster& cluster) { return DailyVolume{cluster.per_day_counts}; }

void ControversyParams::validate() const {
    if (!(burst_velocity_threshold > 0.0) || !std::isfinite(burst_velocity_threshold))
        throw Error(Errc::InvalidConfig, "burst velocity threshold must be positive");
    double total = 0.0;
    for (double w : rank_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::InvalidConfig, "rank weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw Error(Errc::InvalidConfig, fmt::format("rank weights sum to {}, expected 1", total));
}

BurstResult burstiness(const EventCluster& cluster, const DailyVolume& volume, const ControversyParams& params,
                       Date today) {
    double baseline = 0.0;
    for (int back = 1; back <= kBurstBaselineDays; ++back)
        baseline += static_cast<double>(volume.on(today - std::chrono::days{back}));
    baseline /= kBurstBaselineDays;

    BurstResult result;
    result.velocity = static_cast<double>(volume.on(today)) / std::max(1.0, baseline);
    bool active_today = cluster.per_day_counts.count(today) > 0;
    result.flag = active_today && result.velocity >= params.burst_velocity_threshold;
    return result;
}

double event_sentiment(const EventCluster& cluster) {
    if (cluster.sentiments.empty())
        throw Error(Errc::InsufficientData, fmt::format("cluster {} has no members", cluster.cluster_id));
    double sum = std::accumulate(cluster.sentiments.begin(), cluster.sentiments.end(), 0.0);
    return sum / static_cast<double>(cluster.sentiments.size());
}

Newsworthiness newsworthiness(const EventCluster& cluster, const AllowList& allow) {
    Newsworthiness news;
    news.count = unique_credible_links(cluster, allow);
    news.score = std::log1p(static_cast<double>(news.count));
    return news;
}

bool is_controversial(double sentiment_mean, bool burst_flag, std::size_t news_count, const ControversyParams& params) {
    return sentiment_mean < 0.0 && burst_flag && news_count >= params.news_count_gate;
}

double rank_score(const BurstResult& burst, const Newsworthiness& news, double sentiment_mean,
                  const ControversyParams& params) {
    const auto& [w_burst, w_news, w_sent] = params.rank_weights;
    double burst_part = std::min(burst.velocity / params.burst_velocity_threshold, 2.0) / 2.0;
    double news_part = news.score / (1.0 + news.score);
    double sent_part = std::max(0.0, -sentiment_mean) / 2.0;
    return w_burst * burst_part + w_news * news_part + w_sent * sent_part;
}

std::vector<std::pair<std::string, int>> top_terms(const EventCluster& cluster, const TermDictionary& dictionary,
                                                   std::size_t limit) {
    std::vector<std::pair<std::string, int>> terms;
    terms.reserve(cluster.term_sums.size());
    for (const auto& [term, sum] : cluster.term_sums)
        terms.emplace_back(dictionary.term(term), static_cast<int>(std::lround(sum)));
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (terms.size() > limit) terms.resize(limit);
    return terms;
}

std::vector<ControversyReport> classify_and_rank(std::span<const EventCluster* const> events,
                                                 const DailyVolume& entity_volume, const AllowList& allow,
                                                 const ControversyParams& params, Date today,
                                                 const TermDictionary& dictionary) {
    params.validate();
    std::vector<ControversyReport> reports;
    reports.reserve(events.size());
    for (const EventCluster* cluster : events) {
        ControversyReport report;
        report.cluster_id = cluster->cluster_id;
        BurstResult burst = params.burst_volume == BurstVolume::Entity
                                ? burstiness(*cluster, entity_volume, params, today)
                                : burstiness(*cluster, DailyVolume::of_cluster(*cluster), params, today);
        Newsworthiness news = newsworthiness(*cluster, allow);
        report.burst_flag = burst.flag;
        report.burst_velocity = burst.velocity;
        report.news_count = news.count;
        report.news_score = news.score;
        report.sentiment_mean = event_sentiment(*cluster);
        report.controversial = is_controversial(report.sentiment_mean, burst.flag, news.count, params);
        report.rank_score = rank_score(burst, news, report.sentiment_mean, params);
        report.top_terms = top_terms(*cluster, dictionary, params.top_terms);
        report.member_count = cluster->member_count();
        report.member_ids = cluster->member_ids;
        reports.push_back(std::move(report));
    }
    std::sort(reports.begin(), reports.end(), [](const ControversyReport& a, const ControversyReport& b) {
        if (a.controversial != b.controversial) return a.controversial;
        if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
        return a.cluster_id < b.cluster_id;
    });
    return reports;
}

} // namespace cdet
