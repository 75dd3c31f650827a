#include "cdet/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"

namespace cdet {
namespace {

using nlohmann::json;

constexpr int kCheckpointVersion = 1;
constexpr std::string_view kCheckpointFormat = "cdet.cluster_state";
constexpr TermId kUnknownTerm = static_cast<TermId>(-1);

double norm_sq(const SparseVector& vec) {
    double total = 0.0;
    for (const auto& [term, weight] : vec) total += weight * weight;
    return total;
}

} // namespace

void ClusterParams::validate() const {
    if (!(merge_threshold >= 0.0 && merge_threshold <= 1.0))
        throw Error(Errc::InvalidConfig, fmt::format("merge threshold {} outside [0, 1]", merge_threshold));
    if (min_event_size < 1) throw Error(Errc::InvalidConfig, "min event size must be at least 1");
    if (inactivity_expiry.count() <= 0) throw Error(Errc::InvalidConfig, "inactivity expiry must be positive");
}

TermId TermDictionary::intern(std::string_view term) {
    auto key = std::string(term);
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
    auto id = static_cast<TermId>(terms_.size());
    terms_.push_back(key);
    ids_.emplace(std::move(key), id);
    return id;
}

std::optional<TermId> TermDictionary::find(std::string_view term) const {
    auto it = ids_.find(std::string(term));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::map<TermId, double> EventCluster::centroid() const {
    std::map<TermId, double> out;
    auto n = static_cast<double>(member_count());
    for (const auto& [term, sum] : term_sums) out[term] = sum / n;
    return out;
}

double EventCluster::centroid_weight(TermId term) const {
    auto it = term_sums.find(term);
    if (it == term_sums.end() || member_ids.empty()) return 0.0;
    return it->second / static_cast<double>(member_count());
}

ClusterState::ClusterState(ClusterParams params) : params_(params) { params_.validate(); }

const EventCluster* ClusterState::find(ClusterId id) const {
    auto it = clusters_.find(id);
    return it == clusters_.end() ? nullptr : &it->second;
}

const EventCluster& ClusterState::at(ClusterId id) const {
    if (const auto* cluster = find(id)) return *cluster;
    throw std::out_of_range(fmt::format("no cluster {}", id));
}

std::vector<const EventCluster*> ClusterState::clusters() const {
    std::vector<const EventCluster*> out;
    out.reserve(clusters_.size());
    for (const auto& [id, cluster] : clusters_) out.push_back(&cluster);
    return out;
}

SparseVector ClusterState::encode(const TermBag& terms) {
    SparseVector vec;
    vec.reserve(terms.size());
    for (const auto& [term, count] : terms)
        if (count > 0) vec.emplace_back(dictionary_.intern(term), static_cast<double>(count));
    std::sort(vec.begin(), vec.end());
    return vec;
}

SparseVector ClusterState::encode_lookup(const TermBag& terms) const {
    SparseVector vec;
    for (const auto& [term, count] : terms) {
        if (count <= 0) continue;
        auto id = dictionary_.find(term);
        vec.emplace_back(id ? *id : kUnknownTerm, static_cast<double>(count));
    }
    std::sort(vec.begin(), vec.end());
    return vec;
}

double ClusterState::distance(const TermBag& terms, const EventCluster& cluster) const {
    return distance(encode_lookup(terms), cluster);
}

double ClusterState::distance(const SparseVector& vec, const EventCluster& cluster) const {
    double vec_norm_sq = norm_sq(vec);
    if (vec_norm_sq <= 0.0 || cluster.sum_norm_sq <= 0.0)
        throw Error(Errc::DegenerateVector, fmt::format("zero-norm vector against cluster {}", cluster.cluster_id));
    double dot = 0.0;
    for (const auto& [term, weight] : vec) {
        auto it = cluster.term_sums.find(term);
        if (it != cluster.term_sums.end()) dot += weight * it->second;
    }
    double similarity = dot / std::sqrt(vec_norm_sq * cluster.sum_norm_sq);
    return std::clamp(1.0 - similarity, 0.0, 1.0);
}

Assignment ClusterState::assign(const TweetVector& vec) {
    SparseVector encoded = encode(vec.terms);
    double vec_norm_sq = norm_sq(encoded);
    if (vec_norm_sq <= 0.0) throw Error(Errc::DegenerateVector, fmt::format("tweet {} has no terms", vec.tweet_id));

    // Only clusters sharing a term can be closer than 1.0; every other cluster sits at
    // distance exactly 1.0, which never passes a threshold of at most 1.
    std::vector<std::pair<ClusterId, double>> dots;
    std::unordered_map<ClusterId, std::size_t> slot;
    for (const auto& [term, weight] : encoded) {
        if (term >= postings_.size()) continue;
        for (ClusterId id : postings_[term]) {
            const auto& cluster = clusters_.at(id);
            double contribution = weight * cluster.term_sums.at(term);
            auto [it, inserted] = slot.emplace(id, dots.size());
            if (inserted) {
                dots.emplace_back(id, contribution);
            } else {
                dots[it->second].second += contribution;
            }
        }
    }
    std::sort(dots.begin(), dots.end());

    std::optional<ClusterId> best_id;
    double best_distance = 1.0;
    for (const auto& [id, dot] : dots) {
        const auto& cluster = clusters_.at(id);
        double d = std::clamp(1.0 - dot / std::sqrt(vec_norm_sq * cluster.sum_norm_sq), 0.0, 1.0);
        if (!best_id || d < best_distance - kDistanceTieTolerance) {
            best_id = id;
            best_distance = d;
        }
    }

    ++admitted_;
    if (best_id && best_distance < params_.merge_threshold) {
        add_member(clusters_.at(*best_id), vec, encoded);
        return Assignment{*best_id, AssignDecision::Merged, best_distance};
    }

    ClusterId id = next_id_++;
    auto& cluster = clusters_[id];
    cluster.cluster_id = id;
    cluster.created_at = vec.timestamp;
    cluster.last_updated = vec.timestamp;
    add_member(cluster, vec, encoded);
    return Assignment{id, AssignDecision::Created, 1.0};
}

void ClusterState::add_member(EventCluster& cluster, const TweetVector& vec, const SparseVector& encoded) {
    for (const auto& [term, weight] : encoded) {
        auto [it, inserted] = cluster.term_sums.emplace(term, 0.0);
        if (inserted) index_term(term, cluster.cluster_id);
        double before = it->second;
        it->second += weight;
        cluster.sum_norm_sq += it->second * it->second - before * before;
    }
    cluster.member_ids.push_back(vec.tweet_id);
    cluster.member_terms.push_back(encoded);
    cluster.sentiments.push_back(vec.sentiment);
    cluster.member_days.push_back(vec.day);
    cluster.links.insert(vec.links.begin(), vec.links.end());
    ++cluster.per_day_counts[vec.day];
    cluster.last_updated = std::max(cluster.last_updated, vec.timestamp);
}

void ClusterState::index_term(TermId term, ClusterId id) {
    if (term >= postings_.size()) postings_.resize(term + 1);
    auto& list = postings_[term];
    list.insert(std::upper_bound(list.begin(), list.end(), id), id);
}

void ClusterState::unindex_cluster(const EventCluster& cluster) {
    for (const auto& [term, sum] : cluster.term_sums) {
        auto& list = postings_[term];
        auto it = std::lower_bound(list.begin(), list.end(), cluster.cluster_id);
        if (it != list.end() && *it == cluster.cluster_id) list.erase(it);
    }
}

std::vector<const EventCluster*> ClusterState::candidate_events() const {
    std::vector<const EventCluster*> out;
    for (const auto& [id, cluster] : clusters_)
        if (cluster.member_count() >= params_.min_event_size) out.push_back(&cluster);
    std::stable_sort(out.begin(), out.end(), [](const EventCluster* a, const EventCluster* b) {
        return a->member_count() > b->member_count();
    });
    return out;
}

std::size_t ClusterState::expire_inactive(Timestamp now) {
    std::size_t removed = 0;
    auto cutoff = now - params_.inactivity_expiry;
    for (auto it = clusters_.begin(); it != clusters_.end();) {
        const auto& cluster = it->second;
        if (cluster.last_updated < cutoff && cluster.member_count() < params_.min_event_size) {
            unindex_cluster(cluster);
            expired_members_ += cluster.member_count();
            ++removed;
            it = clusters_.erase(it);
        } else {
            ++it;
        }
    }
    expired_clusters_ += removed;
    last_sweep_ = now;
    return removed;
}

double ClusterState::max_centroid_drift() const {
    double drift = 0.0;
    for (const auto& [id, cluster] : clusters_) {
        std::map<TermId, double> batch;
        for (const auto& member : cluster.member_terms)
            for (const auto& [term, weight] : member) batch[term] += weight;
        auto n = static_cast<double>(cluster.member_count());
        if (batch.size() != cluster.term_sums.size()) return std::numeric_limits<double>::infinity();
        for (const auto& [term, sum] : batch) {
            auto it = cluster.term_sums.find(term);
            if (it == cluster.term_sums.end()) return std::numeric_limits<double>::infinity();
            drift = std::max(drift, std::abs(sum / n - it->second / n));
        }
    }
    return drift;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

std::string ClusterState::to_json() const {
    json doc;
    doc["format"] = kCheckpointFormat;
    doc["version"] = kCheckpointVersion;
    doc["params"] = {
        {"merge_threshold_D", params_.merge_threshold},
        {"min_event_size_N", params_.min_event_size},
        {"inactivity_expiry_seconds", params_.inactivity_expiry.count()},
    };
    doc["next_id"] = next_id_;
    doc["admitted"] = admitted_;
    doc["expired_members"] = expired_members_;
    doc["expired_clusters"] = expired_clusters_;
    doc["last_sweep"] = last_sweep_ ? json(format_timestamp(*last_sweep_)) : json(nullptr);
    json terms = json::array();
    for (std::size_t i = 0; i < dictionary_.size(); ++i) terms.push_back(dictionary_.term(static_cast<TermId>(i)));
    doc["terms"] = std::move(terms);

    json clusters = json::array();
    for (const auto& [id, cluster] : clusters_) {
        json members = json::array();
        for (std::size_t i = 0; i < cluster.member_count(); ++i) {
            json vec = json::array();
            for (const auto& [term, weight] : cluster.member_terms[i]) vec.push_back({term, weight});
            members.push_back({
                {"id", cluster.member_ids[i]},
                {"day", format_date(cluster.member_days[i])},
                {"sentiment", cluster.sentiments[i]},
                {"terms", std::move(vec)},
            });
        }
        clusters.push_back({
            {"id", id},
            {"created_at", format_timestamp(cluster.created_at)},
            {"last_updated", format_timestamp(cluster.last_updated)},
            {"links", cluster.links},
            {"members", std::move(members)},
        });
    }
    doc["clusters"] = std::move(clusters);
    return doc.dump(1);
}

ClusterState ClusterState::from_json(std::string_view text) {
    try {
        json doc = json::parse(text);
        if (doc.at("format").get<std::string>() != kCheckpointFormat)
            throw Error(Errc::InvalidConfig, "not a cluster state checkpoint");
        if (doc.at("version").get<int>() != kCheckpointVersion)
            throw Error(Errc::InvalidConfig, fmt::format("unsupported checkpoint version {}", doc.at("version").dump()));
        const auto& p = doc.at("params");
        ClusterParams params;
        params.merge_threshold = p.at("merge_threshold_D").get<double>();
        params.min_event_size = p.at("min_event_size_N").get<std::size_t>();
        params.inactivity_expiry = std::chrono::seconds{p.at("inactivity_expiry_seconds").get<std::int64_t>()};

        ClusterState state(params);
        for (const auto& term : doc.at("terms")) state.dictionary_.intern(term.get<std::string>());
        for (const auto& c : doc.at("clusters")) {
            ClusterId id = c.at("id").get<ClusterId>();
            auto& cluster = state.clusters_[id];
            cluster.cluster_id = id;
            cluster.created_at = parse_timestamp(c.at("created_at").get<std::string>());
            cluster.last_updated = cluster.created_at;
            for (const auto& m : c.at("members")) {
                TweetVector vec;
                vec.tweet_id = m.at("id").get<std::string>();
                vec.day = parse_date(m.at("day").get<std::string>());
                vec.sentiment = m.at("sentiment").get<double>();
                vec.timestamp = cluster.created_at;
                SparseVector encoded;
                for (const auto& pair : m.at("terms")) {
                    auto term = pair.at(0).get<TermId>();
                    if (term >= state.dictionary_.size()) throw Error(Errc::InvalidConfig, "checkpoint term id out of range");
                    encoded.emplace_back(term, pair.at(1).get<double>());
                }
                state.add_member(cluster, vec, encoded);
            }
            cluster.links = c.at("links").get<std::set<std::string>>();
            cluster.last_updated = parse_timestamp(c.at("last_updated").get<std::string>());
        }
        state.next_id_ = doc.at("next_id").get<ClusterId>();
        state.admitted_ = doc.at("admitted").get<std::size_t>();
        state.expired_members_ = doc.at("expired_members").get<std::size_t>();
        state.expired_clusters_ = doc.at("expired_clusters").get<std::size_t>();
        if (const auto& sweep = doc.at("last_sweep"); !sweep.is_null())
            state.last_sweep_ = parse_timestamp(sweep.get<std::string>());
        if (!state.clusters_.empty() && state.clusters_.rbegin()->first >= state.next_id_)
            throw Error(Errc::InvalidConfig, "checkpoint next_id does not exceed assigned ids");
        return state;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, fmt::format("bad checkpoint: {}", e.what()));
    }
}

void ClusterState::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << to_json() << '\n';
}

ClusterState ClusterState::load(const std::filesystem::path& path) { return from_json(detail::read_file(path)); }

// ---------------------------------------------------------------------------

double distance(const TweetVector& vec, const EventCluster& cluster, const ClusterState& state) {
    return state.distance(vec.terms, cluster);
}

Assignment assign(const TweetVector& vec, ClusterState& state) { return state.assign(vec); }

std::vector<const EventCluster*> candidate_events(const ClusterState& state) { return state.candidate_events(); }

std::size_t expire_inactive(ClusterState& state, Timestamp now) { return state.expire_inactive(now); }

double l2_norm(const TermBag& terms) {
    double total = 0.0;
    for (const auto& [term, count] : terms) total += static_cast<double>(count) * count;
    return std::sqrt(total);
}

} // namespace cdet
