#include <doctest.h>

#include <cmath>
#include <random>

#include "cdet/clustering.hpp"
#include "cdet/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cdet;

namespace {

const Timestamp kStart = parse_timestamp("2018-04-10T00:00:00Z");

TweetVector vec(std::string id, TermBag terms, Timestamp at = kStart, double sentiment = 0.0) {
    TweetVector v;
    v.tweet_id = std::move(id);
    v.timestamp = at;
    v.day = day_of(at);
    v.terms = std::move(terms);
    v.sentiment = sentiment;
    return v;
}

ClusterParams params(double d, std::size_t n = 5) {
    ClusterParams p;
    p.merge_threshold = d;
    p.min_event_size = n;
    return p;
}

oracle::Bag to_bag(const TermBag& terms) {
    oracle::Bag bag;
    for (const auto& [k, v] : terms) bag[k] = v;
    return bag;
}

} // namespace

TEST_CASE("distance examples") {
    ClusterState state(params(0.5));
    auto a = state.assign(vec("1", {{"a", 1}}));
    const auto& cluster = state.at(a.cluster_id);
    CHECK(std::abs(state.distance(TermBag{{"a", 1}}, cluster)) <= 1e-15);
    CHECK(state.distance(TermBag{{"z", 2}}, cluster) == 1.0);
    double expected = oracle::cosine_distance({{"a", 1}, {"b", 1}}, {{"a", 1}});
    CHECK(expected == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
    CHECK(state.distance(TermBag{{"a", 1}, {"b", 1}}, cluster) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(test::error_code_of([&] { state.distance(TermBag{}, cluster); }) == Errc::DegenerateVector);
}

TEST_CASE("assign examples") {
    ClusterState state(params(0.5));
    auto first = state.assign(vec("1", {{"a", 1}}));
    CHECK(first.decision == AssignDecision::Created);
    auto dup = state.assign(vec("2", {{"a", 1}}));
    CHECK(dup.decision == AssignDecision::Merged);
    CHECK(dup.cluster_id == first.cluster_id);
    CHECK(state.at(first.cluster_id).member_count() == 2);

    // Equidistant from clusters {x} and {y}: the lower id wins.
    ClusterState tie(params(0.9));
    auto cx = tie.assign(vec("x", {{"x", 1}}));
    auto cy = tie.assign(vec("y", {{"y", 1}}));
    REQUIRE(cx.cluster_id < cy.cluster_id);
    auto both = tie.assign(vec("xy", {{"x", 1}, {"y", 1}}));
    CHECK(both.decision == AssignDecision::Merged);
    CHECK(both.cluster_id == cx.cluster_id);

    CHECK(test::error_code_of([&] { state.assign(vec("e", {})); }) == Errc::DegenerateVector);
}

TEST_CASE("merge keeps bookkeeping consistent") {
    ClusterState state(params(0.8));
    auto v1 = vec("1", {{"a", 2}}, kStart, -1.0);
    v1.links = {"https://nytimes.com/a"};
    auto v2 = vec("2", {{"a", 1}, {"b", 1}}, kStart + std::chrono::hours(30), 1.0);
    v2.links = {"https://npr.org/b", "https://nytimes.com/a"};
    auto id = state.assign(v1).cluster_id;
    REQUIRE(state.assign(v2).cluster_id == id);
    const auto& c = state.at(id);
    CHECK(c.member_ids == std::vector<std::string>{"1", "2"});
    CHECK(c.sentiments == std::vector<double>{-1.0, 1.0});
    CHECK(c.links.size() == 2);
    CHECK(c.per_day_counts.size() == 2);
    CHECK(c.last_updated == kStart + std::chrono::hours(30));
    auto a = state.dictionary().find("a");
    REQUIRE(a);
    CHECK(c.centroid_weight(*a) == 1.5);
    CHECK(c.centroid_weight(*state.dictionary().find("b")) == 0.5);
}

TEST_CASE("candidate_events examples") {
    auto build = [](std::vector<int> sizes) {
        ClusterState state(params(0.5));
        int serial = 0;
        for (std::size_t c = 0; c < sizes.size(); ++c)
            for (int k = 0; k < sizes[c]; ++k)
                state.assign(vec(std::to_string(serial++), {{"t" + std::to_string(c), 1}}));
        return state;
    };
    CHECK(build({1, 4, 3}).candidate_events().empty());
    auto one = build({5});
    REQUIRE(one.candidate_events().size() == 1);
    auto mixed = build({5, 7, 3});
    auto events = mixed.candidate_events();
    REQUIRE(events.size() == 2);
    CHECK(events[0]->member_count() == 7);
    CHECK(events[1]->member_count() == 5);
}

TEST_CASE("expire_inactive examples") {
    ClusterState fresh(params(0.5));
    CHECK(fresh.expire_inactive(kStart) == 0);

    ClusterState state(params(0.5, 5));
    state.assign(vec("s", {{"solo", 1}}));
    for (int i = 0; i < 5; ++i) state.assign(vec("e" + std::to_string(i), {{"event", 1}}));
    auto later = kStart + std::chrono::hours(73);
    CHECK(state.expire_inactive(kStart + std::chrono::hours(72)) == 0);  // not older than the window yet
    CHECK(state.expire_inactive(later) == 1);
    CHECK(state.size() == 1);
    CHECK(state.candidate_events().size() == 1);
    CHECK(state.expired_members() == 1);

    // The expired cluster's terms no longer attract new vectors.
    auto next = state.assign(vec("n", {{"solo", 1}}, later));
    CHECK(next.decision == AssignDecision::Created);
}

TEST_CASE("threshold extremes") {
    std::mt19937 rng(21);
    ClusterState zero(params(0.0));
    ClusterState one(params(1.0));
    for (int i = 0; i < 50; ++i) {
        TermBag terms{{"t" + std::to_string(rng() % 3), 1 + static_cast<int>(rng() % 3)}};
        CHECK(zero.assign(vec(std::to_string(i), terms)).decision == AssignDecision::Created);
    }
    // Identical-support vectors always merge under the widest threshold.
    auto first = one.assign(vec("a", {{"p", 1}, {"q", 2}}));
    for (int i = 0; i < 10; ++i) {
        auto r = one.assign(vec("b" + std::to_string(i), {{"p", 1 + i}, {"q", 1}}));
        CHECK(r.cluster_id == first.cluster_id);
    }
}

TEST_CASE("incremental clustering matches the from-scratch oracle") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 100; ++round) {
        double d = 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(rng);
        ClusterState state(params(d));
        std::vector<oracle::Bag> stream;
        std::vector<ClusterId> assigned;
        int n = 1 + static_cast<int>(rng() % 30);
        for (int i = 0; i < n; ++i) {
            TermBag terms;
            for (int k = 0, m = 1 + static_cast<int>(rng() % 3); k < m; ++k)
                terms["w" + std::to_string(rng() % 10)] += 1 + static_cast<int>(rng() % 2);
            stream.push_back(to_bag(terms));
            assigned.push_back(state.assign(vec(std::to_string(i), terms)).cluster_id);
        }
        auto expected = oracle::reference_partition(stream, d, kDistanceTieTolerance);
        auto clusters = state.clusters();
        REQUIRE(clusters.size() == expected.size());
        for (std::size_t c = 0; c < expected.size(); ++c) {
            std::vector<std::string> ids;
            for (auto idx : expected[c]) ids.push_back(std::to_string(idx));
            CHECK(clusters[c]->member_ids == ids);
        }
        CHECK(state.max_centroid_drift() <= 1e-12);
    }
}

TEST_CASE("checkpoint round trip") {
    ClusterState state(params(0.6, 3));
    std::mt19937 rng(4);
    for (int i = 0; i < 40; ++i) {
        TermBag terms{{"w" + std::to_string(rng() % 6), 1}, {"v" + std::to_string(rng() % 4), 2}};
        auto v = vec(std::to_string(i), terms, kStart + std::chrono::minutes(i * 30), (static_cast<int>(rng() % 5) - 2) * 0.5);
        if (i % 7 == 0) v.links = {"https://nytimes.com/" + std::to_string(i)};
        state.assign(v);
    }
    state.expire_inactive(kStart + std::chrono::hours(100));

    test::TempDir dir;
    auto path = dir.path() / "state.json";
    state.save(path);
    auto loaded = ClusterState::load(path);
    CHECK(loaded.to_json() == state.to_json());
    CHECK(loaded.next_id() == state.next_id());

    // Continuing from the checkpoint behaves exactly like continuing the original.
    auto v = vec("next", {{"w1", 1}, {"v2", 2}}, kStart + std::chrono::hours(101));
    auto a = state.assign(v);
    auto b = loaded.assign(v);
    CHECK(a.cluster_id == b.cluster_id);
    CHECK(a.decision == b.decision);

    CHECK(test::error_code_of([] { ClusterState::from_json(R"({"format":"other","version":1})"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { ClusterState::from_json(R"({"format":"cdet.cluster_state","version":99})"); }) ==
          Errc::InvalidConfig);
    CHECK(test::error_code_of([] { ClusterState::from_json("garbage"); }) == Errc::InvalidConfig);
}

TEST_CASE("params validation") {
    CHECK(test::error_code_of([] { ClusterState s(params(1.5)); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { ClusterState s(params(-0.1)); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { ClusterState s(params(0.5, 0)); }) == Errc::InvalidConfig);
}
