#pragma once

// Independent reference implementations used as test oracles. They share no code
// with the library: plain string-keyed maps, recomputed from scratch every step.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace cdet::oracle {

using Bag = std::map<std::string, double>;

inline double cosine_distance(const Bag& a, const Bag& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [k, v] : a) {
        na += v * v;
        auto it = b.find(k);
        if (it != b.end()) dot += v * it->second;
    }
    for (const auto& [k, v] : b) nb += v * v;
    double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    return d < 0.0 ? 0.0 : (d > 1.0 ? 1.0 : d);
}

inline Bag mean_of(const std::vector<Bag>& members) {
    Bag mean;
    for (const auto& m : members)
        for (const auto& [k, v] : m) mean[k] += v;
    for (auto& [k, v] : mean) v /= static_cast<double>(members.size());
    return mean;
}

/// From-scratch clustering: every step recomputes each centroid from its members and
/// the distance to it; merges into the nearest when below `threshold`, lowest index on
/// ties within `tie_tolerance`. Returns member indices per cluster in creation order.
inline std::vector<std::vector<std::size_t>> reference_partition(const std::vector<Bag>& stream, double threshold,
                                                                 double tie_tolerance) {
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        std::size_t best = clusters.size();
        double best_d = 2.0;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            std::vector<Bag> members;
            for (auto idx : clusters[c]) members.push_back(stream[idx]);
            double d = cosine_distance(stream[i], mean_of(members));
            if (best == clusters.size() || d < best_d - tie_tolerance) {
                best = c;
                best_d = d;
            }
        }
        if (best < clusters.size() && best_d < threshold) {
            clusters[best].push_back(i);
        } else {
            clusters.push_back({i});
        }
    }
    return clusters;
}

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
    double m = mean(xs), s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

} // namespace cdet::oracle
