#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace cdet {

struct EventCluster;

/// Components of an absolute URL (`scheme://[userinfo@]host[:port][path][?query][#fragment]`).
/// Components are kept verbatim; canonicalization happens in canonicalize_url.
struct Url {
    std::string scheme;
    std::string userinfo;
    std::string host;
    std::string port;
    std::string path;
    std::string query;
    std::string fragment;
    bool has_query = false;
    bool has_fragment = false;

    std::string str() const;
};

/// Returns nullopt unless `text` is an absolute URL with a scheme and a non-empty host.
std::optional<Url> parse_url(std::string_view text);

/// Lowercases scheme and host, drops default ports, the fragment, and tracking
/// parameters (utm_*, fbclid, gclid, ...). Throws Error{BadUrl}.
std::string canonicalize_url(std::string_view raw);

/// Rule set in the public-suffix-list text format (`*.` wildcards and `!` exceptions).
class PublicSuffixList {
public:
    static PublicSuffixList parse(std::string_view text);
    static std::shared_ptr<const PublicSuffixList> bundled();

    /// Longest public suffix of `host` under the prevailing rule.
    std::string public_suffix(std::string_view host) const;

    /// The public suffix plus one label; empty when `host` is itself a public suffix.
    std::string registrable_domain(std::string_view host) const;

    std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

private:
    std::unordered_set<std::string> rules_;
    std::unordered_set<std::string> wildcards_;   // stored without the leading "*."
    std::unordered_set<std::string> exceptions_;  // stored without the leading "!"
};

class AllowList {
public:
    /// One domain per line, '#' starts a comment. Throws Error{InvalidConfig} on a
    /// scheme, path, public-suffix-only entry, or an empty list.
    static AllowList parse(std::string_view text, std::string loaded_from = "<memory>",
                           std::shared_ptr<const PublicSuffixList> psl = PublicSuffixList::bundled());
    static AllowList load(const std::filesystem::path& path,
                          std::shared_ptr<const PublicSuffixList> psl = PublicSuffixList::bundled());
    static AllowList bundled();

    const std::set<std::string>& domains() const { return domains_; }
    const std::string& loaded_from() const { return loaded_from_; }
    const PublicSuffixList& suffixes() const { return *psl_; }

    /// Exact match of the host or of any parent domain down to the registrable domain.
    bool covers_host(std::string_view host) const;

    void add(std::string domain);

private:
    std::set<std::string> domains_;
    std::string loaded_from_;
    std::shared_ptr<const PublicSuffixList> psl_;
};

/// Source of redirect hops keyed by canonical URL.
class RedirectSource {
public:
    virtual ~RedirectSource() = default;
    virtual std::optional<std::string> next_hop(const std::string& canonical_url) const = 0;
};

/// Offline redirect table: "short<TAB>final" per line.
class RedirectMap final : public RedirectSource {
public:
    static RedirectMap parse(std::string_view text);
    static RedirectMap load(const std::filesystem::path& path);
    static RedirectMap bundled();

    /// Both sides are canonicalized; throws Error{BadUrl}.
    void insert(std::string_view from, std::string_view to);

    std::optional<std::string> next_hop(const std::string& canonical_url) const override;
    std::size_t size() const { return mapping_.size(); }

private:
    std::unordered_map<std::string, std::string> mapping_;
};

inline constexpr int kMaxRedirectHops = 10;

/// Canonicalizes `raw` and follows redirects transitively (at most kMaxRedirectHops).
/// Throws Error{BadUrl} or Error{RedirectCycle}; a chain longer than the hop limit is
/// reported as a cycle too.
std::string normalize_url(std::string_view raw, const RedirectSource& redirects);
std::string normalize_url(std::string_view raw);

bool is_credible(std::string_view normalized_url, const AllowList& allow);

std::size_t unique_credible_links(const std::set<std::string>& links, const AllowList& allow);
std::size_t unique_credible_links(const EventCluster& cluster, const AllowList& allow);

} // namespace cdet
