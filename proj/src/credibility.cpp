#include "cdet/credibility.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include <fmt/format.h>

#include "cdet/bundled.hpp"
#include "cdet/clustering.hpp"
#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"

namespace cdet {
namespace {

using detail::ascii_lower;
using detail::to_lower;

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_host_char(char c) {
    return is_alpha(c) || is_digit(c) || c == '-' || c == '.' || c == '_' || c == '~' || c == '%' ||
           static_cast<unsigned char>(c) >= 0x80;
}

constexpr std::array<std::string_view, 8> kTrackingParams = {
    "fbclid", "gclid", "dclid", "msclkid", "mc_cid", "mc_eid", "igshid", "_ga",
};

bool is_tracking_param(std::string_view key) {
    auto lower = to_lower(key);
    if (lower.rfind("utm_", 0) == 0) return true;
    return std::find(kTrackingParams.begin(), kTrackingParams.end(), lower) != kTrackingParams.end();
}

std::string strip_tracking(std::string_view query) {
    std::string out;
    while (true) {
        auto amp = query.find('&');
        auto param = query.substr(0, amp);
        auto key = param.substr(0, param.find('='));
        if (!param.empty() && !is_tracking_param(key)) {
            if (!out.empty()) out += '&';
            out += param;
        }
        if (amp == std::string_view::npos) break;
        query.remove_prefix(amp + 1);
    }
    return out;
}

// Labels of a host, right to left: "a.b.c" -> {"c", "b", "a"}.
std::vector<std::string_view> reversed_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    while (true) {
        auto dot = host.rfind('.');
        if (dot == std::string_view::npos) {
            labels.push_back(host);
            break;
        }
        labels.push_back(host.substr(dot + 1));
        host = host.substr(0, dot);
    }
    return labels;
}

// The rightmost `count` labels of `host`.
std::string_view suffix_labels(std::string_view host, std::size_t count) {
    if (count == 0) return {};
    std::size_t pos = host.size();
    for (std::size_t i = 0; i < count; ++i) {
        if (pos == 0) return host;
        auto dot = host.rfind('.', pos - 1);
        if (dot == std::string_view::npos) return host;
        pos = dot;
    }
    return host.substr(pos + 1);
}

bool is_ip_literal(std::string_view host) {
    if (!host.empty() && host.front() == '[') return true;
    return !host.empty() && std::all_of(host.begin(), host.end(), [](char c) { return is_digit(c) || c == '.'; });
}

} // namespace

std::string Url::str() const {
    std::string out = scheme + "://";
    if (!userinfo.empty()) out += userinfo + "@";
    out += host;
    if (!port.empty()) out += ":" + port;
    out += path;
    if (has_query) out += "?" + query;
    if (has_fragment) out += "#" + fragment;
    return out;
}

std::optional<Url> parse_url(std::string_view text) {
    text = detail::trim(text);
    auto colon = text.find("://");
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    auto scheme = text.substr(0, colon);
    if (!is_alpha(scheme.front())) return std::nullopt;
    for (char c : scheme)
        if (!(is_alpha(c) || is_digit(c) || c == '+' || c == '-' || c == '.')) return std::nullopt;

    Url url;
    url.scheme = std::string(scheme);
    auto rest = text.substr(colon + 3);
    auto authority_end = rest.find_first_of("/?#");
    auto authority = rest.substr(0, authority_end);
    rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    if (auto at = authority.rfind('@'); at != std::string_view::npos) {
        url.userinfo = std::string(authority.substr(0, at));
        authority.remove_prefix(at + 1);
    }
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        url.host = std::string(authority.substr(0, close + 1));
        authority.remove_prefix(close + 1);
        if (!authority.empty()) {
            if (authority.front() != ':') return std::nullopt;
            url.port = std::string(authority.substr(1));
        }
    } else {
        auto port_sep = authority.rfind(':');
        if (port_sep != std::string_view::npos) {
            url.port = std::string(authority.substr(port_sep + 1));
            authority = authority.substr(0, port_sep);
        }
        url.host = std::string(authority);
        if (url.host.empty() || url.host.front() == '.' || url.host.find("..") != std::string::npos) return std::nullopt;
        if (!std::all_of(url.host.begin(), url.host.end(), is_host_char)) return std::nullopt;
    }
    if (url.host.empty()) return std::nullopt;
    if (!std::all_of(url.port.begin(), url.port.end(), is_digit)) return std::nullopt;

    auto hash = rest.find('#');
    if (hash != std::string_view::npos) {
        url.has_fragment = true;
        url.fragment = std::string(rest.substr(hash + 1));
        rest = rest.substr(0, hash);
    }
    auto question = rest.find('?');
    if (question != std::string_view::npos) {
        url.has_query = true;
        url.query = std::string(rest.substr(question + 1));
        rest = rest.substr(0, question);
    }
    url.path = std::string(rest);
    for (char c : url.path)
        if (detail::is_space(c)) return std::nullopt;
    return url;
}

std::string canonicalize_url(std::string_view raw) {
    auto parsed = parse_url(raw);
    if (!parsed) throw Error(Errc::BadUrl, fmt::format("not an absolute URL: '{}'", raw));
    Url url = std::move(*parsed);
    url.scheme = to_lower(url.scheme);
    url.host = to_lower(url.host);
    if (url.host.size() > 1 && url.host.back() == '.') url.host.pop_back();
    if ((url.scheme == "http" && url.port == "80") || (url.scheme == "https" && url.port == "443")) url.port.clear();
    if (url.path.empty()) url.path = "/";
    url.has_fragment = false;
    url.fragment.clear();
    if (url.has_query) {
        url.query = strip_tracking(url.query);
        url.has_query = !url.query.empty();
    }
    return url.str();
}

// ---------------------------------------------------------------------------
// Public suffix list
// ---------------------------------------------------------------------------

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
    PublicSuffixList psl;
    for (auto line : detail::split_lines(text)) {
        line = detail::trim(line);
        if (line.empty() || line.substr(0, 2) == "//") continue;
        line = line.substr(0, line.find_first_of(" \t"));
        auto rule = to_lower(line);
        if (rule.rfind("!", 0) == 0) {
            psl.exceptions_.insert(rule.substr(1));
        } else if (rule.rfind("*.", 0) == 0) {
            psl.wildcards_.insert(rule.substr(2));
        } else {
            psl.rules_.insert(rule);
        }
    }
    return psl;
}

std::shared_ptr<const PublicSuffixList> PublicSuffixList::bundled() {
    static const auto instance = std::make_shared<const PublicSuffixList>(parse(bundled::public_suffixes()));
    return instance;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
    std::string lower = to_lower(host);
    std::string_view h = lower;
    auto labels = reversed_labels(h);
    // Default rule "*": the last label is always a public suffix.
    std::size_t best = 1;
    for (std::size_t n = 1; n <= labels.size(); ++n) {
        std::string candidate(suffix_labels(h, n));
        if (exceptions_.count(candidate)) {
            best = n - 1;
            return std::string(suffix_labels(h, best));
        }
        if (rules_.count(candidate)) best = std::max(best, n);
        if (n < labels.size() && wildcards_.count(candidate)) {
            std::string deeper(suffix_labels(h, n + 1));
            if (!exceptions_.count(deeper)) best = std::max(best, n + 1);
        }
    }
    return std::string(suffix_labels(h, best));
}

std::string PublicSuffixList::registrable_domain(std::string_view host) const {
    std::string lower = to_lower(host);
    if (is_ip_literal(lower)) return lower;
    auto suffix = public_suffix(lower);
    if (suffix.size() >= lower.size()) return {};
    std::string_view h = lower;
    auto suffix_count = suffix.empty() ? 0 : reversed_labels(suffix).size();
    return std::string(suffix_labels(h, suffix_count + 1));
}

// ---------------------------------------------------------------------------
// Allow list
// ---------------------------------------------------------------------------

AllowList AllowList::parse(std::string_view text, std::string loaded_from,
                           std::shared_ptr<const PublicSuffixList> psl) {
    AllowList list;
    list.loaded_from_ = std::move(loaded_from);
    list.psl_ = std::move(psl);
    for (auto line : detail::split_lines(text)) {
        line = detail::strip_comment(line);
        if (line.empty()) continue;
        list.add(std::string(line));
    }
    if (list.domains_.empty()) throw Error(Errc::InvalidConfig, "allowlist " + list.loaded_from_ + " is empty");
    return list;
}

AllowList AllowList::load(const std::filesystem::path& path, std::shared_ptr<const PublicSuffixList> psl) {
    return parse(detail::read_file(path), path.string(), std::move(psl));
}

AllowList AllowList::bundled() { return parse(bundled::allowlist(), "<bundled>"); }

void AllowList::add(std::string domain) {
    domain = to_lower(detail::trim(domain));
    if (domain.find("://") != std::string::npos || domain.find('/') != std::string::npos ||
        domain.find_first_of(" \t?#@:") != std::string::npos || domain.empty())
        throw Error(Errc::InvalidConfig, fmt::format("allowlist entry '{}' is not a bare domain", domain));
    if (psl_->registrable_domain(domain).empty())
        throw Error(Errc::InvalidConfig, fmt::format("allowlist entry '{}' is a public suffix", domain));
    domains_.insert(std::move(domain));
}

bool AllowList::covers_host(std::string_view host) const {
    std::string lower = to_lower(host);
    auto registrable = psl_->registrable_domain(lower);
    if (registrable.empty()) return false;
    std::string_view candidate = lower;
    while (candidate.size() >= registrable.size()) {
        if (domains_.count(std::string(candidate))) return true;
        auto dot = candidate.find('.');
        if (dot == std::string_view::npos) break;
        candidate.remove_prefix(dot + 1);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Redirects
// ---------------------------------------------------------------------------

RedirectMap RedirectMap::parse(std::string_view text) {
    RedirectMap map;
    std::size_t line_no = 0;
    for (auto line : detail::split_lines(text)) {
        ++line_no;
        auto trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto tab = trimmed.find('\t');
        if (tab == std::string_view::npos)
            throw Error(Errc::InvalidConfig, fmt::format("redirect map line {}: expected short<TAB>final", line_no));
        map.insert(detail::trim(trimmed.substr(0, tab)), detail::trim(trimmed.substr(tab + 1)));
    }
    return map;
}

RedirectMap RedirectMap::load(const std::filesystem::path& path) { return parse(detail::read_file(path)); }

RedirectMap RedirectMap::bundled() { return parse(bundled::redirects()); }

void RedirectMap::insert(std::string_view from, std::string_view to) {
    mapping_[canonicalize_url(from)] = canonicalize_url(to);
}

std::optional<std::string> RedirectMap::next_hop(const std::string& canonical_url) const {
    auto it = mapping_.find(canonical_url);
    if (it == mapping_.end()) return std::nullopt;
    return it->second;
}

std::string normalize_url(std::string_view raw, const RedirectSource& redirects) {
    std::string current = canonicalize_url(raw);
    std::unordered_set<std::string> seen{current};
    for (int hops = 0;; ++hops) {
        auto next = redirects.next_hop(current);
        if (!next) return current;
        if (hops == kMaxRedirectHops)
            throw Error(Errc::RedirectCycle, fmt::format("more than {} redirects from '{}'", kMaxRedirectHops, raw));
        current = canonicalize_url(*next);
        if (!seen.insert(current).second)
            throw Error(Errc::RedirectCycle, fmt::format("redirect loop through '{}'", current));
    }
}

std::string normalize_url(std::string_view raw) {
    static const RedirectMap empty;
    return normalize_url(raw, empty);
}

bool is_credible(std::string_view normalized_url, const AllowList& allow) {
    auto url = parse_url(normalized_url);
    return url && allow.covers_host(url->host);
}

std::size_t unique_credible_links(const std::set<std::string>& links, const AllowList& allow) {
    return static_cast<std::size_t>(
        std::count_if(links.begin(), links.end(), [&](const std::string& u) { return is_credible(u, allow); }));
}

std::size_t unique_credible_links(const EventCluster& cluster, const AllowList& allow) {
    return unique_credible_links(cluster.links, allow);
}

} // namespace cdet
