#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cdet/time.hpp"

namespace cdet {

struct Tweet {
    std::string posting_id;
    Timestamp creation_time;
    std::string text;
    std::string language;
    std::string source;
    std::vector<std::string> urls;
    std::vector<std::string> hashtags;  // lowercase, without '#'

    bool operator==(const Tweet&) const = default;
};

/// Parses one JSON-lines record. `urls` and `hashtags` default to empty, `language`
/// and `source` to "". Throws Error{MalformedRecord | MissingField | BadTimestamp}.
Tweet parse_tweet_record(std::string_view line);

/// Serializes a tweet back into the JSON-lines schema (keys in schema order).
std::string to_json_line(const Tweet& tweet);

class PhraseFilter {
public:
    /// Phrases are lowercased; throws Error{InvalidConfig} if the list is empty or a
    /// phrase is blank.
    explicit PhraseFilter(std::vector<std::string> phrases);

    /// Splits a comma-separated parameter the way the streaming API accepts it.
    static PhraseFilter from_csv(std::string_view csv);

    const std::vector<std::string>& phrases() const { return phrases_; }

    /// Case-insensitive substring match against the text, any hashtag, or any URL host.
    bool matches(const Tweet& tweet) const;

private:
    std::vector<std::string> phrases_;
};

bool matches_filter(const Tweet& tweet, const PhraseFilter& filter);

struct ReplayOptions {
    std::int64_t lateness_seconds = 3600;
    bool dedup = false;
};

struct ReplayStats {
    std::size_t total = 0;         // records read, blank lines excluded
    std::size_t parse_errors = 0;
    std::size_t filtered_out = 0;  // valid records not matching the filter
    std::size_t late_drops = 0;    // older than the lateness window
    std::size_t duplicates = 0;    // repeated posting_id when dedup is on
    std::size_t yielded = 0;

    std::size_t dropped() const { return filtered_out + late_drops + duplicates; }
};

/// Abstract line source so files, sockets, and in-memory buffers replay alike.
class LineSource {
public:
    virtual ~LineSource() = default;
    virtual bool next_line(std::string& line) = 0;
};

/// Opens "tcp://host:port" as a socket source, anything else as a file path.
/// Throws Error{SourceUnavailable}.
std::unique_ptr<LineSource> open_source(const std::string& location);
std::unique_ptr<LineSource> stream_source(std::istream& in);

/// Replays records in nondecreasing creation_time order. Records arriving within the
/// lateness window are reordered through a buffer; older ones are dropped and counted.
/// Parse errors are counted and skipped.
class StreamReplayer {
public:
    StreamReplayer(std::unique_ptr<LineSource> source, PhraseFilter filter, ReplayOptions options = {});

    std::optional<Tweet> next();
    const ReplayStats& stats() const { return stats_; }

    /// Called with the line and error text for each rejected record.
    void on_parse_error(std::function<void(std::string_view, std::string_view)> handler) {
        error_handler_ = std::move(handler);
    }

private:
    struct Pending {
        Tweet tweet;
        std::uint64_t seq;
    };
    struct Later {
        bool operator()(const Pending& a, const Pending& b) const {
            if (a.tweet.creation_time != b.tweet.creation_time) return a.tweet.creation_time > b.tweet.creation_time;
            return a.seq > b.seq;
        }
    };

    bool ready() const;
    Tweet pop();

    std::unique_ptr<LineSource> source_;
    PhraseFilter filter_;
    ReplayOptions options_;
    ReplayStats stats_;
    std::priority_queue<Pending, std::vector<Pending>, Later> buffer_;
    std::optional<Timestamp> max_seen_;
    std::unordered_set<std::string> seen_ids_;
    std::uint64_t seq_ = 0;
    bool exhausted_ = false;
    std::function<void(std::string_view, std::string_view)> error_handler_;
};

/// Drains a replayer into a vector.
std::vector<Tweet> replay_stream(const std::string& location, const PhraseFilter& filter,
                                 ReplayOptions options = {}, ReplayStats* stats = nullptr);

} // namespace cdet
