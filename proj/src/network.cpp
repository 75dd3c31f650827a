#include "cdet/network.hpp"

#include <condition_variable>
#include <thread>

#include <httplib.h>

namespace cdet {

// Counting gate; std::counting_semaphore needs a compile-time maximum.
struct HttpRedirectSource::Gate {
    std::mutex mutex;
    std::condition_variable cv;
    std::size_t available;

    explicit Gate(std::size_t n) : available(n) {}

    void acquire() {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return available > 0; });
        --available;
    }
    void release() {
        {
            std::lock_guard lock(mutex);
            ++available;
        }
        cv.notify_one();
    }
};

HttpRedirectSource::HttpRedirectSource() : HttpRedirectSource(Options{}) {}

HttpRedirectSource::HttpRedirectSource(Options options)
    : options_(options), gate_(std::make_unique<Gate>(options.max_in_flight == 0 ? 1 : options.max_in_flight)) {}

HttpRedirectSource::~HttpRedirectSource() = default;

bool HttpRedirectSource::supports_https() {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
    return true;
#else
    return false;
#endif
}

std::optional<std::string> HttpRedirectSource::next_hop(const std::string& canonical_url) const {
    if (cancelled()) return std::nullopt;
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(canonical_url); it != cache_.end()) return it->second;
    }
    auto hop = fetch(canonical_url);
    if (cancelled()) return std::nullopt;
    std::lock_guard lock(cache_mutex_);
    cache_.emplace(canonical_url, hop);
    return hop;
}

void HttpRedirectSource::prefetch(const std::vector<std::string>& canonical_urls) const {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    std::size_t count = std::min(options_.max_in_flight == 0 ? 1 : options_.max_in_flight, canonical_urls.size());
    for (std::size_t w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            for (auto i = next++; i < canonical_urls.size() && !cancelled(); i = next++) next_hop(canonical_urls[i]);
        });
    }
    for (auto& worker : workers) worker.join();
}

std::optional<std::string> HttpRedirectSource::fetch(const std::string& url) const {
    auto parsed = parse_url(url);
    if (!parsed) return std::nullopt;
    if (parsed->scheme == "https" && !supports_https()) return std::nullopt;

    gate_->acquire();
    auto now = ++in_flight_;
    for (auto peak = peak_.load(); now > peak && !peak_.compare_exchange_weak(peak, now);) {
    }
    ++requests_;

    std::optional<std::string> hop;
    try {
        std::string origin = parsed->scheme + "://" + parsed->host;
        if (!parsed->port.empty()) origin += ":" + parsed->port;
        httplib::Client client(origin);
        auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
        auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
        client.set_connection_timeout(seconds.count(), micros.count());
        client.set_read_timeout(seconds.count(), micros.count());
        client.set_follow_location(false);

        std::string target = parsed->path.empty() ? "/" : parsed->path;
        if (parsed->has_query) target += "?" + parsed->query;
        auto res = client.Head(target);
        if (res && (res->status == 405 || res->status == 501)) res = client.Get(target);
        if (res && res->status >= 300 && res->status < 400 && res->has_header("Location")) {
            auto location = res->get_header_value("Location");
            if (location.rfind("//", 0) == 0) {
                location = parsed->scheme + ":" + location;
            } else if (!location.empty() && location.front() == '/') {
                location = origin + location;
            }
            hop = std::move(location);
        }
    } catch (const std::exception&) {
        hop.reset();
    }

    --in_flight_;
    gate_->release();
    return hop;
}

} // namespace cdet
