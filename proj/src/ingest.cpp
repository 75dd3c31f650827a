#include "cdet/ingest.hpp"

#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include "cdet/credibility.hpp"
#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"

namespace cdet {
namespace {

using nlohmann::json;

const json* optional_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

std::string required_string(const json& obj, const char* key) {
    const json* value = optional_field(obj, key);
    if (!value) throw Error(Errc::MissingField, fmt::format("record has no '{}'", key));
    if (value->is_string()) return value->get<std::string>();
    if (value->is_number_integer()) return value->dump();
    throw Error(Errc::MalformedRecord, fmt::format("'{}' must be a string", key));
}

std::string optional_string(const json& obj, const char* key) {
    const json* value = optional_field(obj, key);
    if (!value) return {};
    if (!value->is_string()) throw Error(Errc::MalformedRecord, fmt::format("'{}' must be a string", key));
    return value->get<std::string>();
}

std::vector<std::string> string_array(const json& obj, const char* key) {
    const json* value = optional_field(obj, key);
    if (!value) return {};
    if (!value->is_array()) throw Error(Errc::MalformedRecord, fmt::format("'{}' must be an array", key));
    std::vector<std::string> out;
    out.reserve(value->size());
    for (const auto& item : *value) {
        if (!item.is_string()) throw Error(Errc::MalformedRecord, fmt::format("'{}' entries must be strings", key));
        out.push_back(item.get<std::string>());
    }
    return out;
}

class FileSource final : public LineSource {
public:
    explicit FileSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw Error(Errc::SourceUnavailable, "cannot open " + path.string());
    }
    bool next_line(std::string& line) override { return static_cast<bool>(std::getline(in_, line)); }

private:
    std::ifstream in_;
};

class IstreamSource final : public LineSource {
public:
    explicit IstreamSource(std::istream& in) : in_(in) {}
    bool next_line(std::string& line) override { return static_cast<bool>(std::getline(in_, line)); }

private:
    std::istream& in_;
};

class SocketSource final : public LineSource {
public:
    SocketSource(const std::string& host, const std::string& port) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* found = nullptr;
        if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0)
            throw Error(Errc::SourceUnavailable, fmt::format("resolve {}:{}: {}", host, port, ::gai_strerror(rc)));
        for (addrinfo* ai = found; ai; ai = ai->ai_next) {
            int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
                fd_ = fd;
                break;
            }
            ::close(fd);
        }
        ::freeaddrinfo(found);
        if (fd_ < 0) throw Error(Errc::SourceUnavailable, fmt::format("cannot connect to {}:{}", host, port));
    }

    ~SocketSource() override {
        if (fd_ >= 0) ::close(fd_);
    }

    SocketSource(const SocketSource&) = delete;
    SocketSource& operator=(const SocketSource&) = delete;

    bool next_line(std::string& line) override {
        while (true) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                line.assign(buffer_, 0, nl);
                buffer_.erase(0, nl + 1);
                return true;
            }
            if (closed_) {
                if (buffer_.empty()) return false;
                line = std::move(buffer_);
                buffer_.clear();
                return true;
            }
            char chunk[8192];
            auto n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) {
                closed_ = true;
            } else {
                buffer_.append(chunk, static_cast<std::size_t>(n));
            }
        }
    }

private:
    int fd_ = -1;
    std::string buffer_;
    bool closed_ = false;
};

} // namespace

Tweet parse_tweet_record(std::string_view line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(Errc::MalformedRecord, e.what());
    }
    if (!obj.is_object()) throw Error(Errc::MalformedRecord, "record is not a JSON object");

    Tweet tweet;
    tweet.posting_id = required_string(obj, "posting_id");
    if (tweet.posting_id.empty()) throw Error(Errc::MissingField, "empty 'posting_id'");
    tweet.creation_time = parse_timestamp(required_string(obj, "creation_time"));
    tweet.text = required_string(obj, "text");
    tweet.language = optional_string(obj, "language");
    tweet.source = optional_string(obj, "source");
    tweet.urls = string_array(obj, "urls");
    for (const auto& url : tweet.urls)
        if (!parse_url(url)) throw Error(Errc::MalformedRecord, fmt::format("invalid URL '{}'", url));
    for (auto& tag : string_array(obj, "hashtags")) {
        std::string_view body = detail::trim(tag);
        if (!body.empty() && body.front() == '#') body.remove_prefix(1);
        if (!body.empty()) tweet.hashtags.push_back(detail::to_lower(body));
    }
    return tweet;
}

std::string to_json_line(const Tweet& tweet) {
    // nlohmann sorts object keys; emit by hand to keep the schema order.
    std::string out = "{";
    auto field = [&](const char* key, const json& value) {
        if (out.size() > 1) out += ',';
        out += json(key).dump();
        out += ':';
        out += value.dump();
    };
    field("posting_id", tweet.posting_id);
    field("creation_time", format_timestamp(tweet.creation_time));
    field("text", tweet.text);
    field("language", tweet.language);
    field("source", tweet.source);
    field("urls", tweet.urls);
    field("hashtags", tweet.hashtags);
    out += '}';
    return out;
}

PhraseFilter::PhraseFilter(std::vector<std::string> phrases) {
    for (auto& phrase : phrases) {
        auto lowered = detail::to_lower(phrase);
        if (detail::trim(lowered).empty()) throw Error(Errc::InvalidConfig, "filter phrase is blank");
        phrases_.push_back(std::move(lowered));
    }
    if (phrases_.empty()) throw Error(Errc::InvalidConfig, "filter needs at least one phrase");
}

PhraseFilter PhraseFilter::from_csv(std::string_view csv) {
    std::vector<std::string> phrases;
    while (true) {
        auto comma = csv.find(',');
        phrases.emplace_back(detail::trim(csv.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        csv.remove_prefix(comma + 1);
    }
    return PhraseFilter(std::move(phrases));
}

bool PhraseFilter::matches(const Tweet& tweet) const {
    auto text = detail::to_lower(tweet.text);
    std::vector<std::string> hosts;
    for (const auto& url : tweet.urls)
        if (auto parsed = parse_url(url)) hosts.push_back(detail::to_lower(parsed->host));
    for (const auto& phrase : phrases_) {
        if (text.find(phrase) != std::string::npos) return true;
        for (const auto& tag : tweet.hashtags)
            if (detail::to_lower(tag).find(phrase) != std::string::npos) return true;
        for (const auto& host : hosts)
            if (host.find(phrase) != std::string::npos) return true;
    }
    return false;
}

bool matches_filter(const Tweet& tweet, const PhraseFilter& filter) { return filter.matches(tweet); }

std::unique_ptr<LineSource> open_source(const std::string& location) {
    constexpr std::string_view kTcp = "tcp://";
    if (location.rfind(kTcp, 0) == 0) {
        auto address = location.substr(kTcp.size());
        auto colon = address.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == address.size())
            throw Error(Errc::SourceUnavailable, fmt::format("expected tcp://host:port, got '{}'", location));
        return std::make_unique<SocketSource>(address.substr(0, colon), address.substr(colon + 1));
    }
    return std::make_unique<FileSource>(location);
}

std::unique_ptr<LineSource> stream_source(std::istream& in) { return std::make_unique<IstreamSource>(in); }

StreamReplayer::StreamReplayer(std::unique_ptr<LineSource> source, PhraseFilter filter, ReplayOptions options)
    : source_(std::move(source)), filter_(std::move(filter)), options_(options) {}

bool StreamReplayer::ready() const {
    if (buffer_.empty()) return false;
    if (exhausted_) return true;
    return buffer_.top().tweet.creation_time <= *max_seen_ - std::chrono::seconds{options_.lateness_seconds};
}

Tweet StreamReplayer::pop() {
    Tweet tweet = std::move(const_cast<Pending&>(buffer_.top()).tweet);
    buffer_.pop();
    ++stats_.yielded;
    return tweet;
}

std::optional<Tweet> StreamReplayer::next() {
    std::string line;
    while (true) {
        if (ready()) return pop();
        if (exhausted_) return std::nullopt;
        if (!source_->next_line(line)) {
            exhausted_ = true;
            continue;
        }
        if (detail::trim(line).empty()) continue;
        ++stats_.total;

        Tweet tweet;
        try {
            tweet = parse_tweet_record(line);
        } catch (const Error& e) {
            ++stats_.parse_errors;
            if (error_handler_) error_handler_(line, e.what());
            continue;
        }
        if (!filter_.matches(tweet)) {
            ++stats_.filtered_out;
            continue;
        }
        if (options_.dedup && !seen_ids_.insert(tweet.posting_id).second) {
            ++stats_.duplicates;
            continue;
        }
        auto window = std::chrono::seconds{options_.lateness_seconds};
        if (max_seen_ && tweet.creation_time < *max_seen_ - window) {
            ++stats_.late_drops;
            continue;
        }
        if (!max_seen_ || tweet.creation_time > *max_seen_) max_seen_ = tweet.creation_time;
        buffer_.push(Pending{std::move(tweet), seq_++});
    }
}

std::vector<Tweet> replay_stream(const std::string& location, const PhraseFilter& filter, ReplayOptions options,
                                 ReplayStats* stats) {
    StreamReplayer replayer(open_source(location), filter, options);
    std::vector<Tweet> out;
    while (auto tweet = replayer.next()) out.push_back(std::move(*tweet));
    if (stats) *stats = replayer.stats();
    return out;
}

} // namespace cdet
