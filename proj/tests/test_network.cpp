#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "cdet/credibility.hpp"
#include "cdet/error.hpp"
#include "cdet/network.hpp"

using namespace cdet;

namespace {

// Local redirect server; every handler is deterministic.
class RedirectServer {
public:
    RedirectServer() {
        server_.Get("/r1", [](const httplib::Request&, httplib::Response& res) {
            res.status = 302;
            res.set_header("Location", "/r2?utm_source=x");
        });
        server_.Get("/r2", [this](const httplib::Request&, httplib::Response& res) {
            res.status = 301;
            res.set_header("Location", base() + "/final");
        });
        server_.Get("/final", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
        server_.Get("/loop", [](const httplib::Request&, httplib::Response& res) {
            res.status = 302;
            res.set_header("Location", "/loop");
        });
        server_.Get("/nohead", [](const httplib::Request& req, httplib::Response& res) {
            if (req.method == "HEAD") {
                res.status = 405;
                return;
            }
            res.status = 302;
            res.set_header("Location", "/final");
        });
        server_.Get(R"(/slow/(\d+))", [this](const httplib::Request&, httplib::Response& res) {
            auto now = ++active_;
            for (auto peak = peak_.load(); now > peak && !peak_.compare_exchange_weak(peak, now);) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(60));
            --active_;
            res.status = 302;
            res.set_header("Location", "/final");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~RedirectServer() {
        server_.stop();
        thread_.join();
    }

    std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int peak() const { return peak_.load(); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> active_{0};
    std::atomic<int> peak_{0};
};

} // namespace

TEST_CASE("network resolver follows relative and absolute redirects") {
    RedirectServer server;
    HttpRedirectSource source;
    CHECK(normalize_url(server.base() + "/r1", source) == server.base() + "/final");
    CHECK(normalize_url(server.base() + "/final", source) == server.base() + "/final");
    CHECK(normalize_url(server.base() + "/nohead", source) == server.base() + "/final");
}

TEST_CASE("network redirect loops are detected") {
    RedirectServer server;
    HttpRedirectSource source;
    CHECK_THROWS_AS(normalize_url(server.base() + "/loop", source), cdet::Error);
}

TEST_CASE("results are cached") {
    RedirectServer server;
    HttpRedirectSource source;
    normalize_url(server.base() + "/r1", source);
    auto issued = source.requests_issued();
    normalize_url(server.base() + "/r1", source);
    CHECK(source.requests_issued() == issued);
}

TEST_CASE("in-flight requests are bounded") {
    RedirectServer server;
    HttpRedirectSource::Options options;
    options.max_in_flight = 2;
    HttpRedirectSource source(options);
    std::vector<std::string> urls;
    for (int i = 0; i < 8; ++i) urls.push_back(server.base() + "/slow/" + std::to_string(i));
    source.prefetch(urls);
    CHECK(source.requests_issued() == 8);
    CHECK(source.peak_in_flight() <= 2);
    CHECK(server.peak() <= 2);
    CHECK(server.peak() >= 1);
    for (const auto& url : urls) CHECK(source.next_hop(url) == server.base() + "/final");
}

TEST_CASE("cancel stops lookups and unreachable hosts yield no hop") {
    RedirectServer server;
    HttpRedirectSource source;
    source.cancel();
    CHECK_FALSE(source.next_hop(server.base() + "/r1"));
    CHECK(source.requests_issued() == 0);

    HttpRedirectSource::Options options;
    options.timeout = std::chrono::milliseconds(200);
    HttpRedirectSource closed(options);
    CHECK_FALSE(closed.next_hop("http://127.0.0.1:1/x"));
}
