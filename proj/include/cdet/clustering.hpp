#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdet/features.hpp"
#include "cdet/time.hpp"

namespace cdet {

using ClusterId = std::uint64_t;
using TermId = std::uint32_t;

/// Sparse term-frequency vector over interned term ids, sorted by id.
using SparseVector = std::vector<std::pair<TermId, double>>;

struct ClusterParams {
    double merge_threshold = 0.7;  // merge when distance < merge_threshold
    std::size_t min_event_size = 5;
    std::chrono::seconds inactivity_expiry = std::chrono::hours{72};

    /// Throws Error{InvalidConfig}. `merge_threshold` may be 0 (nothing merges).
    void validate() const;
};

/// Distances closer than this are treated as equal; the lower cluster id wins.
inline constexpr double kDistanceTieTolerance = 1e-12;

/// Interns term strings so clusters and postings store small integers.
class TermDictionary {
public:
    TermId intern(std::string_view term);
    std::optional<TermId> find(std::string_view term) const;
    const std::string& term(TermId id) const { return terms_.at(id); }
    std::size_t size() const { return terms_.size(); }

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, TermId> ids_;
};

struct EventCluster {
    ClusterId cluster_id = 0;
    std::unordered_map<TermId, double> term_sums;  // sum of member term frequencies
    double sum_norm_sq = 0.0;                      // |term_sums|^2, maintained incrementally
    std::vector<std::string> member_ids;
    std::vector<SparseVector> member_terms;
    std::vector<double> sentiments;
    std::vector<Date> member_days;
    std::set<std::string> links;
    std::map<Date, std::size_t> per_day_counts;
    Timestamp created_at{};
    Timestamp last_updated{};

    std::size_t member_count() const { return member_ids.size(); }

    /// Arithmetic mean of member term-frequency vectors.
    std::map<TermId, double> centroid() const;
    double centroid_weight(TermId term) const;
};

enum class AssignDecision { Merged, Created };

struct Assignment {
    ClusterId cluster_id;
    AssignDecision decision;
    double distance;  // to the chosen cluster; 1.0 when a singleton was created
};

/// Online incremental clustering state: each vector joins its nearest cluster when
/// the distance is below the merge threshold, otherwise it opens a singleton.
class ClusterState {
public:
    explicit ClusterState(ClusterParams params = {});

    const ClusterParams& params() const { return params_; }
    ClusterId next_id() const { return next_id_; }
    const TermDictionary& dictionary() const { return dictionary_; }

    std::size_t size() const { return clusters_.size(); }
    const EventCluster* find(ClusterId id) const;
    const EventCluster& at(ClusterId id) const;

    /// Live clusters in ascending id order.
    std::vector<const EventCluster*> clusters() const;

    /// Interns the vector's terms into a sorted sparse vector.
    SparseVector encode(const TermBag& terms);
    /// Like encode but never interns; unknown terms keep a reserved id that matches nothing.
    SparseVector encode_lookup(const TermBag& terms) const;

    /// Cosine distance between a term vector and a cluster's mean vector.
    /// Throws Error{DegenerateVector} if either has zero norm.
    double distance(const TermBag& terms, const EventCluster& cluster) const;
    double distance(const SparseVector& vec, const EventCluster& cluster) const;

    /// Precondition: `vec.terms` is non-empty (throws Error{DegenerateVector} otherwise).
    Assignment assign(const TweetVector& vec);

    /// Clusters with at least min_event_size members, largest first (ties: lower id).
    std::vector<const EventCluster*> candidate_events() const;

    /// Removes clusters idle longer than the expiry that are below min_event_size.
    std::size_t expire_inactive(Timestamp now);
    /// Time of the most recent expire_inactive call; checkpointed so a resumed run
    /// keeps the same sweep schedule.
    std::optional<Timestamp> last_sweep() const { return last_sweep_; }

    std::size_t admitted() const { return admitted_; }
    std::size_t expired_members() const { return expired_members_; }
    std::size_t expired_clusters() const { return expired_clusters_; }

    /// Largest per-coordinate gap between the incremental sums and a recomputation
    /// from stored member vectors, scaled to centroid units.
    double max_centroid_drift() const;

    /// Versioned JSON checkpoint. Throws Error{Io} / Error{InvalidConfig}.
    void save(const std::filesystem::path& path) const;
    static ClusterState load(const std::filesystem::path& path);
    std::string to_json() const;
    static ClusterState from_json(std::string_view text);

private:
    void add_member(EventCluster& cluster, const TweetVector& vec, const SparseVector& encoded);
    void index_term(TermId term, ClusterId id);
    void unindex_cluster(const EventCluster& cluster);

    ClusterParams params_;
    ClusterId next_id_ = 1;
    std::map<ClusterId, EventCluster> clusters_;
    TermDictionary dictionary_;
    std::vector<std::vector<ClusterId>> postings_;  // term id -> clusters containing it, ascending
    std::size_t admitted_ = 0;
    std::size_t expired_members_ = 0;
    std::size_t expired_clusters_ = 0;
    std::optional<Timestamp> last_sweep_;
};

double distance(const TweetVector& vec, const EventCluster& cluster, const ClusterState& state);
Assignment assign(const TweetVector& vec, ClusterState& state);
std::vector<const EventCluster*> candidate_events(const ClusterState& state);
std::size_t expire_inactive(ClusterState& state, Timestamp now);

/// Term-frequency vector of a bag (values are counts).
double l2_norm(const TermBag& terms);

} // namespace cdet
