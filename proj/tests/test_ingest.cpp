#include <doctest.h>

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "cdet/error.hpp"
#include "cdet/ingest.hpp"
#include "test_support.hpp"

using namespace cdet;

namespace {

std::string record(std::string id, std::string time, std::string text, std::string extra = "") {
    return R"({"posting_id":")" + id + R"(","creation_time":")" + time + R"(","text":")" + text + "\"" + extra + "}";
}

std::vector<Tweet> replay_text(const std::string& text, ReplayOptions options = {}, ReplayStats* stats = nullptr,
                               std::vector<std::string> phrases = {"starbucks"}) {
    std::istringstream in(text);
    StreamReplayer replayer(stream_source(in), PhraseFilter(std::move(phrases)), options);
    std::vector<Tweet> out;
    while (auto t = replayer.next()) out.push_back(*t);
    if (stats) *stats = replayer.stats();
    return out;
}

} // namespace

TEST_CASE("parse_tweet_record maps every field") {
    auto t = parse_tweet_record(
        R"({"posting_id":"1","creation_time":"2018-04-14T15:04:05Z","text":"Hi Starbucks","language":"en",)"
        R"("source":"web","urls":["https://nyti.ms/x"],"hashtags":["#Starbucks","Coffee"]})");
    CHECK(t.posting_id == "1");
    CHECK(format_timestamp(t.creation_time) == "2018-04-14T15:04:05Z");
    CHECK(t.text == "Hi Starbucks");
    CHECK(t.language == "en");
    CHECK(t.source == "web");
    CHECK(t.urls == std::vector<std::string>{"https://nyti.ms/x"});
    CHECK(t.hashtags == std::vector<std::string>{"starbucks", "coffee"});
}

TEST_CASE("parse_tweet_record defaults and errors") {
    auto t = parse_tweet_record(record("7", "2018-04-14T00:00:00Z", "x"));
    CHECK(t.urls.empty());
    CHECK(t.hashtags.empty());
    CHECK(t.language.empty());

    CHECK(test::error_code_of([] { parse_tweet_record(R"({"creation_time":"2018-04-14T00:00:00Z","text":"x"})"); }) ==
          Errc::MissingField);
    CHECK(test::error_code_of([] { parse_tweet_record(R"({"posting_id":"1","text":"x"})"); }) == Errc::MissingField);
    CHECK(test::error_code_of([] { parse_tweet_record(R"({"posting_id":"1","creation_time":"2018-04-14T00:00:00Z"})"); }) ==
          Errc::MissingField);
    CHECK(test::error_code_of([] { parse_tweet_record("{not json"); }) == Errc::MalformedRecord);
    CHECK(test::error_code_of([] { parse_tweet_record("[1,2]"); }) == Errc::MalformedRecord);
    CHECK(test::error_code_of([] { parse_tweet_record(record("1", "yesterday", "x")); }) == Errc::BadTimestamp);
    CHECK(test::error_code_of([] { parse_tweet_record(record("1", "2018-04-14T00:00:00Z", "x", R"(,"urls":["notaurl"])")); }) ==
          Errc::MalformedRecord);
}

TEST_CASE("timestamps honour offsets and fractional seconds") {
    CHECK(parse_timestamp("2018-04-14T10:00:00+02:00") == parse_timestamp("2018-04-14T08:00:00Z"));
    CHECK(parse_timestamp("2018-04-14 08:00:00.987Z") == parse_timestamp("2018-04-14T08:00:00Z"));
    CHECK(parse_timestamp("2018-04-14T08:00:00") == parse_timestamp("2018-04-14T08:00:00Z"));
    CHECK_THROWS_AS(parse_timestamp("2018-02-30T00:00:00Z"), Error);
    CHECK_THROWS_AS(parse_timestamp("2018-04-14T25:00:00Z"), Error);
    CHECK(format_date(parse_date("2018-04-20")) == "2018-04-20");
}

TEST_CASE("to_json_line round-trips") {
    Tweet t{"42", parse_timestamp("2018-04-15T12:00:00Z"), "quote \" and \\ slash", "en", "app", {"https://a.com/x"}, {"tag"}};
    CHECK(parse_tweet_record(to_json_line(t)) == t);
}

TEST_CASE("phrase filter matches text, hashtags and URL hosts") {
    PhraseFilter f({"starbucks"});
    Tweet t;
    t.text = "I love Starbucks coffee";
    CHECK(matches_filter(t, f));
    t.text = "I love coffee";
    CHECK_FALSE(matches_filter(t, f));
    t.hashtags = {"starbucks"};
    CHECK(matches_filter(t, f));
    t.hashtags.clear();
    t.urls = {"https://news.starbucks.com/press"};
    CHECK(matches_filter(t, f));
    t.urls = {"https://example.com/starbucks"};  // path, not host
    CHECK_FALSE(matches_filter(t, f));

    CHECK_THROWS_AS(PhraseFilter({}), Error);
    CHECK_THROWS_AS(PhraseFilter({"   "}), Error);
    CHECK(PhraseFilter::from_csv("Starbucks, SBUX").phrases() == std::vector<std::string>{"starbucks", "sbux"});
}

TEST_CASE("replay examples") {
    ReplayStats stats;
    CHECK(replay_text("", {}, &stats).empty());
    CHECK(stats.total == 0);
    CHECK(stats.dropped() == 0);

    std::string three = record("1", "2018-04-14T00:00:01Z", "starbucks a") + "\n" +
                        record("2", "2018-04-14T00:00:02Z", "starbucks b") + "\n" +
                        record("3", "2018-04-14T00:00:03Z", "starbucks c") + "\n";
    auto out = replay_text(three);
    REQUIRE(out.size() == 3);
    CHECK(out[0].posting_id == "1");
    CHECK(out[2].posting_id == "3");

    std::string late = record("1", "2018-04-14T00:00:00Z", "starbucks") + "\n" +
                       record("2", "2018-04-12T00:00:00Z", "starbucks") + "\n";
    out = replay_text(late, {3600, false}, &stats);
    CHECK(out.size() == 1);
    CHECK(stats.late_drops == 1);
}

TEST_CASE("replay reorders within the lateness window") {
    std::string text = record("a", "2018-04-14T00:10:00Z", "starbucks") + "\n" +
                       record("b", "2018-04-14T00:05:00Z", "starbucks") + "\n" +
                       record("c", "2018-04-14T00:20:00Z", "starbucks") + "\n";
    auto out = replay_text(text, {3600, false});
    REQUIRE(out.size() == 3);
    CHECK(out[0].posting_id == "b");
    CHECK(out[1].posting_id == "a");
    CHECK(out[2].posting_id == "c");
}

TEST_CASE("dedup switch drops repeated ids") {
    std::string text = record("a", "2018-04-14T00:00:00Z", "starbucks") + "\n" + record("a", "2018-04-14T00:00:01Z", "starbucks");
    ReplayStats stats;
    CHECK(replay_text(text, {3600, false}, &stats).size() == 2);
    CHECK(replay_text(text, {3600, true}, &stats).size() == 1);
    CHECK(stats.duplicates == 1);
}

TEST_CASE("replay invariants hold on random streams") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 200; ++round) {
        std::string text;
        int n = static_cast<int>(rng() % 40);
        auto base = parse_timestamp("2018-04-14T00:00:00Z");
        for (int i = 0; i < n; ++i) {
            auto t = base + std::chrono::seconds{static_cast<long>(rng() % 20000)};
            switch (rng() % 6) {
            case 0: text += "{broken\n"; break;
            case 1: text += record(std::to_string(i), format_timestamp(t), "just coffee") + "\n"; break;
            default: text += record(std::to_string(i % 25), format_timestamp(t), "Starbucks latte") + "\n";
            }
            if (rng() % 5 == 0) text += "\n";
        }
        ReplayStats stats;
        PhraseFilter filter({"starbucks"});
        auto out = replay_text(text, {static_cast<std::int64_t>(rng() % 7200), round % 2 == 0}, &stats);
        CHECK(stats.parse_errors + stats.dropped() + stats.yielded == stats.total);
        CHECK(stats.yielded == out.size());
        for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i - 1].creation_time <= out[i].creation_time);
        for (const auto& t : out) CHECK(matches_filter(t, filter));
    }
}

TEST_CASE("file and socket sources") {
    test::TempDir dir;
    auto path = dir.path() / "s.jsonl";
    std::string lines = record("1", "2018-04-14T00:00:01Z", "starbucks") + "\n" + record("2", "2018-04-14T00:00:02Z", "starbucks");
    test::write(path, lines);
    ReplayStats stats;
    CHECK(replay_stream(path.string(), PhraseFilter({"starbucks"}), {}, &stats).size() == 2);
    CHECK(test::error_code_of([&] { replay_stream((dir.path() / "missing").string(), PhraseFilter({"x"})); }) ==
          Errc::SourceUnavailable);
    CHECK(test::error_code_of([] { open_source("tcp://nohostport"); }) == Errc::SourceUnavailable);

    int server = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(server >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    REQUIRE(::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    REQUIRE(::listen(server, 1) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(server, reinterpret_cast<sockaddr*>(&addr), &len);
    std::thread feeder([&] {
        int client = ::accept(server, nullptr, nullptr);
        ::send(client, lines.data(), lines.size(), 0);
        ::close(client);
    });
    auto out = replay_stream("tcp://127.0.0.1:" + std::to_string(ntohs(addr.sin_port)), PhraseFilter({"starbucks"}));
    feeder.join();
    ::close(server);
    CHECK(out.size() == 2);
}
