#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cdet/credibility.hpp"

namespace cdet {

/// Resolves redirect hops by issuing HEAD requests (GET when HEAD is refused) and
/// reading the Location header. Results, including "no redirect", are cached.
/// At most `max_in_flight` requests run at once across all threads; cancel() makes
/// every later lookup return no hop. Off unless a run selects resolver_mode "network".
class HttpRedirectSource final : public RedirectSource {
public:
    struct Options {
        std::chrono::milliseconds timeout{3000};
        std::size_t max_in_flight = 8;
    };

    HttpRedirectSource();
    explicit HttpRedirectSource(Options options);
    ~HttpRedirectSource() override;

    std::optional<std::string> next_hop(const std::string& canonical_url) const override;

    /// Fetches the first hop of each URL concurrently, bounded by max_in_flight.
    void prefetch(const std::vector<std::string>& canonical_urls) const;

    void cancel() { cancelled_.store(true); }
    bool cancelled() const { return cancelled_.load(); }

    std::size_t requests_issued() const { return requests_.load(); }
    std::size_t peak_in_flight() const { return peak_.load(); }

    /// True when the library was built with TLS support (https URLs resolvable).
    static bool supports_https();

private:
    std::optional<std::string> fetch(const std::string& url) const;

    Options options_;
    struct Gate;
    std::unique_ptr<Gate> gate_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::string, std::optional<std::string>> cache_;
    std::atomic<bool> cancelled_{false};
    mutable std::atomic<std::size_t> requests_{0};
    mutable std::atomic<std::size_t> in_flight_{0};
    mutable std::atomic<std::size_t> peak_{0};
};

} // namespace cdet
