#include <doctest.h>

#include <algorithm>
#include <random>

#include "cdet/clustering.hpp"
#include "cdet/credibility.hpp"
#include "cdet/error.hpp"
#include "test_support.hpp"

using namespace cdet;

TEST_CASE("normalize_url examples") {
    RedirectMap empty;
    CHECK(normalize_url("https://NYTimes.com/a#x", empty) == "https://nytimes.com/a");

    auto map = RedirectMap::parse("https://nyti.ms/abc\thttps://www.nytimes.com/2018/04/15/story.html\n");
    CHECK(normalize_url("https://nyti.ms/abc", map) == "https://www.nytimes.com/2018/04/15/story.html");

    auto loop = RedirectMap::parse("https://a.com/1\thttps://b.com/1\nhttps://b.com/1\thttps://a.com/1\n");
    CHECK(test::error_code_of([&] { normalize_url("https://a.com/1", loop); }) == Errc::RedirectCycle);

    CHECK(test::error_code_of([&] { normalize_url("not a url", empty); }) == Errc::BadUrl);
    CHECK(test::error_code_of([&] { normalize_url("mailto:x@y.com", empty); }) == Errc::BadUrl);
}

TEST_CASE("canonical form details") {
    CHECK(canonicalize_url("HTTP://Example.COM:80") == "http://example.com/");
    CHECK(canonicalize_url("https://example.com:443/a?b=1") == "https://example.com/a?b=1");
    CHECK(canonicalize_url("https://example.com:8443/a") == "https://example.com:8443/a");
    CHECK(canonicalize_url("https://x.com/a?utm_source=t&id=5&fbclid=z&UTM_medium=q") == "https://x.com/a?id=5");
    CHECK(canonicalize_url("https://x.com/a?utm_source=t") == "https://x.com/a");
    CHECK(canonicalize_url("https://x.com/Path/Case") == "https://x.com/Path/Case");
}

TEST_CASE("redirect chains longer than the hop limit are reported as cycles") {
    std::string table;
    for (int i = 0; i <= kMaxRedirectHops; ++i)
        table += "https://h.io/" + std::to_string(i) + "\thttps://h.io/" + std::to_string(i + 1) + "\n";
    auto map = RedirectMap::parse(table);
    CHECK(test::error_code_of([&] { normalize_url("https://h.io/0", map); }) == Errc::RedirectCycle);
    // Exactly the hop limit resolves.
    CHECK(normalize_url("https://h.io/1", map) == "https://h.io/" + std::to_string(kMaxRedirectHops + 1));
}

TEST_CASE("normalize_url is idempotent") {
    auto map = RedirectMap::bundled();
    const std::vector<std::string> urls{
        "https://nyti.ms/2HxqA1b", "https://CNN.it/2qB5TdC?utm_campaign=a", "http://Example.org:80/x/y?b=2&a=1#top",
        "https://www.npr.org/s?fbclid=1&q=starbucks", "https://sub.domain.co.uk/path/",
    };
    for (const auto& url : urls) {
        auto once = normalize_url(url, map);
        CHECK(normalize_url(once, map) == once);
    }
}

TEST_CASE("public suffix rules") {
    auto psl = PublicSuffixList::bundled();
    CHECK(psl->public_suffix("www.bbc.co.uk") == "co.uk");
    CHECK(psl->registrable_domain("www.bbc.co.uk") == "bbc.co.uk");
    CHECK(psl->registrable_domain("news.nytimes.com") == "nytimes.com");
    CHECK(psl->registrable_domain("co.uk") == "");
    CHECK(psl->registrable_domain("foo.bar.ck") == "foo.bar.ck");  // *.ck wildcard
    CHECK(psl->registrable_domain("www.ck") == "www.ck");          // !www.ck exception
    CHECK(psl->registrable_domain("a.unknowntld") == "a.unknowntld");  // implicit "*" rule
}

TEST_CASE("allowlist parsing") {
    auto list = AllowList::parse("# news\nNYTimes.com\n\nnpr.org  # radio\n");
    CHECK(list.domains() == std::set<std::string>{"npr.org", "nytimes.com"});
    CHECK(test::error_code_of([] { AllowList::parse("https://nytimes.com\n"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { AllowList::parse("nytimes.com/path\n"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { AllowList::parse("co.uk\n"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { AllowList::parse("# nothing\n"); }) == Errc::InvalidConfig);
    CHECK(AllowList::bundled().domains().count("nytimes.com") == 1);
}

TEST_CASE("is_credible examples") {
    auto list = AllowList::parse("nytimes.com\nnpr.org\n");
    CHECK(is_credible("https://nytimes.com/article", list));
    CHECK_FALSE(is_credible("https://randomblog.example/post", list));
    CHECK(is_credible("https://www.npr.org/x", list));
    CHECK_FALSE(is_credible("https://nytimes.com.evil.example/x", list));
    CHECK_FALSE(is_credible("https://notnytimes.com/x", list));
}

TEST_CASE("is_credible is monotone in the allowlist") {
    const std::vector<std::string> domains{"nytimes.com", "npr.org", "bbc.co.uk", "cnn.com", "example.org", "reuters.com"};
    const std::vector<std::string> urls{"https://www.nytimes.com/a", "https://npr.org/b", "https://news.bbc.co.uk/c",
                                        "https://edition.cnn.com/d", "https://blog.example.org/e", "https://x.test/f"};
    std::mt19937 rng(13);
    for (int round = 0; round < 200; ++round) {
        std::string small, large;
        for (const auto& d : domains) {
            bool in_small = rng() % 3 == 0;
            if (in_small) small += d + "\n";
            if (in_small || rng() % 2 == 0) large += d + "\n";
        }
        if (small.empty()) small = "cnn.com\n", large += "cnn.com\n";
        auto a = AllowList::parse(small);
        auto b = AllowList::parse(large);
        for (const auto& url : urls)
            if (is_credible(url, a)) CHECK(is_credible(url, b));
    }
}

TEST_CASE("unique_credible_links examples") {
    auto list = AllowList::parse("nytimes.com\nnpr.org\n");
    EventCluster cluster;
    CHECK(unique_credible_links(cluster, list) == 0);
    for (int i = 0; i < 10; ++i) cluster.links.insert("https://nytimes.com/a");
    CHECK(unique_credible_links(cluster, list) == 1);
    cluster.links = {"https://nytimes.com/a", "https://www.npr.org/b", "https://blog.example/1", "https://blog.example/2",
                     "https://other.test/3"};
    CHECK(unique_credible_links(cluster, list) == 2);
}

TEST_CASE("redirect map rejects bad lines") {
    CHECK(test::error_code_of([] { RedirectMap::parse("https://a.com/x\n"); }) == Errc::InvalidConfig);
    CHECK(test::error_code_of([] { RedirectMap::parse("https://a.com/x\tnope\n"); }) == Errc::BadUrl);
    CHECK(RedirectMap::bundled().size() >= 4);
}
