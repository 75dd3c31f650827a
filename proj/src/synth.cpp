#include "cdet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"

namespace cdet {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 5> kCredibleHosts = {
    "www.nytimes.com", "www.npr.org", "www.cnn.com", "www.reuters.com", "apnews.com",
};

// Connectors between terms; all are stopwords so they never become terms, and none is
// a negator or intensifier.
constexpr std::array<std::string_view, 8> kFillers = {"with", "at", "near", "about", "for", "and", "in", "on"};
constexpr std::array<std::string_view, 4> kOpeners = {"so", "just", "now", "then"};

constexpr std::array<std::string_view, 12> kSyllables = {"ka", "lo", "mi", "ter", "van", "su",
                                                         "ro", "quin", "dal", "bex", "tor", "ny"};

std::string noise_term(std::uint64_t index) {
    // Three syllables, capitalized: unlikely to collide with any shipped word list.
    std::string word;
    for (int i = 0; i < 3; ++i) {
        word += kSyllables[index % kSyllables.size()];
        index /= kSyllables.size();
    }
    word[0] = detail::ascii_upper(word[0]);
    return word;
}

constexpr std::uint64_t kNoiseVocabulary = 12 * 12 * 12;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [key, value] : obj.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw Error(Errc::InvalidConfig, fmt::format("unknown key '{}' in {}", key, where));
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

struct Draft {
    Timestamp time;
    std::uint64_t order;
    std::string text;
    std::vector<std::string> urls;
    int event = -1;
};

std::vector<std::string> words_in_range(const SentimentLexicon& lexicon, double lo, double hi) {
    std::vector<std::string> out;
    for (const auto& [word, valence] : lexicon.entries())
        if (valence >= lo && valence <= hi && word.find(' ') == std::string::npos) out.push_back(word);
    return out;
}

} // namespace

std::uint64_t SplitRng::below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

double SplitRng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::span<const std::string_view> synthetic_credible_hosts() { return kCredibleHosts; }

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void ScenarioConfig::validate() const {
    auto bad = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
    if (days < 1) bad("days must be at least 1");
    if (ambient_rate < 0) bad("ambient_rate must be nonnegative");
    if (ambient_rate > 0 && ambient_topics.empty()) bad("ambient_rate > 0 needs ambient_topics");
    for (const auto& pool : ambient_topics)
        if (pool.size() < 2) bad("each ambient topic needs at least 2 terms");
    if (!(vocabulary_noise >= 0.0 && vocabulary_noise <= 1.0)) bad("vocabulary_noise must be in [0, 1]");
    if (!(ambient_link_probability >= 0.0 && ambient_link_probability <= 1.0))
        bad("ambient_link_probability must be in [0, 1]");
    if (detail::trim(entity).empty()) bad("entity must be non-empty");
    parse_date(start_date);
    for (const auto& e : injected_events) {
        if (e.start_day < 0 || e.start_day >= days) bad(fmt::format("event '{}' starts outside the scenario", e.name));
        if (e.duration_days < 1) bad(fmt::format("event '{}' needs duration_days >= 1", e.name));
        if (e.peak_rate < 0) bad(fmt::format("event '{}' has a negative rate", e.name));
        if (e.term_pool.size() < 3) bad(fmt::format("event '{}' needs at least 3 pool terms", e.name));
        if (!(e.sentiment_min <= e.sentiment_max) || e.sentiment_min < -2.0 || e.sentiment_max > 2.0)
            bad(fmt::format("event '{}' sentiment range must be ordered within [-2, 2]", e.name));
        if (e.credible_link_count < 0 || e.noncredible_link_count < 0)
            bad(fmt::format("event '{}' link counts must be nonnegative", e.name));
    }
}

ScenarioConfig ScenarioConfig::from_json(std::string_view text) {
    ScenarioConfig cfg;
    try {
        json doc = json::parse(text);
        if (!doc.is_object()) throw Error(Errc::InvalidConfig, "scenario must be a JSON object");
        reject_unknown(doc,
                       {"seed", "days", "start_date", "entity", "ambient_rate", "ambient_topics", "injected_events",
                        "vocabulary_noise", "ambient_link_probability"},
                       "scenario");
        read_opt(doc, "seed", cfg.seed);
        read_opt(doc, "days", cfg.days);
        read_opt(doc, "start_date", cfg.start_date);
        read_opt(doc, "entity", cfg.entity);
        read_opt(doc, "ambient_rate", cfg.ambient_rate);
        read_opt(doc, "ambient_topics", cfg.ambient_topics);
        read_opt(doc, "vocabulary_noise", cfg.vocabulary_noise);
        read_opt(doc, "ambient_link_probability", cfg.ambient_link_probability);
        if (auto it = doc.find("injected_events"); it != doc.end()) {
            cfg.injected_events.clear();
            for (const auto& e : *it) {
                reject_unknown(e,
                               {"name", "start_day", "duration_days", "peak_rate", "term_pool", "sentiment_range",
                                "credible_link_count", "noncredible_link_count"},
                               "injected event");
                InjectedEvent event;
                read_opt(e, "name", event.name);
                read_opt(e, "start_day", event.start_day);
                read_opt(e, "duration_days", event.duration_days);
                read_opt(e, "peak_rate", event.peak_rate);
                read_opt(e, "term_pool", event.term_pool);
                if (auto range = e.find("sentiment_range"); range != e.end()) {
                    if (!range->is_array() || range->size() != 2)
                        throw Error(Errc::InvalidConfig, "sentiment_range must be [min, max]");
                    event.sentiment_min = range->at(0).get<double>();
                    event.sentiment_max = range->at(1).get<double>();
                }
                read_opt(e, "credible_link_count", event.credible_link_count);
                read_opt(e, "noncredible_link_count", event.noncredible_link_count);
                if (event.name.empty()) event.name = fmt::format("event{}", cfg.injected_events.size() + 1);
                cfg.injected_events.push_back(std::move(event));
            }
        }
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, fmt::format("scenario: {}", e.what()));
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) { return from_json(detail::read_file(path)); }

std::string ScenarioConfig::to_json() const {
    json events = json::array();
    for (const auto& e : injected_events) {
        events.push_back({
            {"name", e.name},
            {"start_day", e.start_day},
            {"duration_days", e.duration_days},
            {"peak_rate", e.peak_rate},
            {"term_pool", e.term_pool},
            {"sentiment_range", {e.sentiment_min, e.sentiment_max}},
            {"credible_link_count", e.credible_link_count},
            {"noncredible_link_count", e.noncredible_link_count},
        });
    }
    json doc = {
        {"seed", seed},
        {"days", days},
        {"start_date", start_date},
        {"entity", entity},
        {"ambient_rate", ambient_rate},
        {"ambient_topics", ambient_topics},
        {"injected_events", std::move(events)},
        {"vocabulary_noise", vocabulary_noise},
        {"ambient_link_probability", ambient_link_probability},
    };
    return doc.dump(2);
}

ScenarioConfig ScenarioConfig::reference() {
    ScenarioConfig cfg;
    cfg.seed = 42;
    cfg.days = 7;
    cfg.ambient_rate = 100;
    cfg.ambient_topics = {
        {"GiftCard", "Rewards", "Balance", "Wallet", "Points", "Reload"},
        {"Barista", "Cashier", "Counter", "Drive", "Mobile", "Order"},
        {"Latte", "Mocha", "Frappuccino", "Espresso", "Roast", "Pumpkin"},
        {"Wifi", "Lobby", "Patio", "Outlet", "Table", "Music"},
    };
    cfg.vocabulary_noise = 0.05;
    cfg.injected_events = {InjectedEvent{
        "arrest", 5, 2, 30, {"Rittenhouse", "Philly", "Kelso", "arrested", "protest", "Police", "Apology"},
        -2.0, -1.0, 2, 1,
    }};
    return cfg;
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

std::string GroundTruth::to_json() const {
    json list = json::array();
    for (const auto& e : events)
        list.push_back({{"name", e.name}, {"expected_controversial", e.expected_controversial}, {"tweet_ids", e.tweet_ids}});
    return json{{"schema_version", 1}, {"events", std::move(list)}}.dump(2);
}

GroundTruth GroundTruth::from_json(std::string_view text) {
    try {
        json doc = json::parse(text);
        GroundTruth truth;
        for (const auto& e : doc.at("events")) {
            truth.events.push_back(GroundTruthEvent{e.at("name").get<std::string>(),
                                                    e.at("tweet_ids").get<std::vector<std::string>>(),
                                                    e.at("expected_controversial").get<bool>()});
        }
        return truth;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, fmt::format("ground truth: {}", e.what()));
    }
}

GroundTruth GroundTruth::load(const std::filesystem::path& path) { return from_json(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

std::string SyntheticStream::jsonl() const {
    std::string out;
    for (const auto& tweet : tweets) {
        out += to_json_line(tweet);
        out += '\n';
    }
    return out;
}

SyntheticStream generate(const ScenarioConfig& config, const SentimentLexicon& lexicon) {
    config.validate();
    SplitRng rng(config.seed);
    const Date start = parse_date(config.start_date);
    const std::string entity = detail::to_lower(config.entity);

    auto neutral_words = words_in_range(lexicon, -0.5, 0.5);
    std::vector<std::vector<std::string>> event_words;
    for (const auto& e : config.injected_events) {
        event_words.push_back(words_in_range(lexicon, e.sentiment_min, e.sentiment_max));
        if (event_words.back().empty())
            throw Error(Errc::InvalidConfig,
                        fmt::format("no lexicon word has valence in [{}, {}] for event '{}'", e.sentiment_min,
                                    e.sentiment_max, e.name));
    }

    auto pick = [&](const auto& items) -> const auto& { return items[rng.below(items.size())]; };
    auto filler = [&]() { return std::string(pick(kFillers)); };

    // Each event's link set: credible first, then non-credible.
    std::vector<std::vector<std::string>> event_links;
    for (const auto& e : config.injected_events) {
        std::vector<std::string> links;
        for (int k = 0; k < e.credible_link_count; ++k)
            links.push_back(fmt::format("https://{}/{}/story-{}", kCredibleHosts[k % kCredibleHosts.size()], e.name, k + 1));
        for (int k = 0; k < e.noncredible_link_count; ++k)
            links.push_back(fmt::format("https://blog{}.example/{}", k + 1, e.name));
        event_links.push_back(std::move(links));
    }
    std::vector<std::size_t> event_emitted(config.injected_events.size(), 0);

    auto compose = [&](std::vector<std::string> terms, const std::string& sentiment_word) {
        std::string text = std::string(pick(kOpeners)) + " " + entity;
        for (const auto& term : terms) text += " " + filler() + " " + term;
        if (!sentiment_word.empty()) text += " " + filler() + " " + sentiment_word;
        return text;
    };

    SyntheticStream stream;
    std::uint64_t order = 0;
    std::uint64_t next_id = 1;
    for (auto& e : config.injected_events)
        stream.truth.events.push_back(GroundTruthEvent{e.name, {}, e.sentiment_max < 0.0 && e.credible_link_count > 0});

    for (int day = 0; day < config.days; ++day) {
        const Timestamp day_start{start + std::chrono::days{day}};
        std::vector<Draft> drafts;

        for (int i = 0; i < config.ambient_rate; ++i) {
            const auto& topic = pick(config.ambient_topics);
            auto first = rng.below(topic.size());
            auto second = (first + 1 + rng.below(topic.size() - 1)) % topic.size();
            std::vector<std::string> terms{topic[first], topic[second]};
            if (rng.chance(config.vocabulary_noise)) terms.push_back(noise_term(rng.below(kNoiseVocabulary)));
            std::string word = rng.chance(0.5) && !neutral_words.empty() ? pick(neutral_words) : std::string{};
            Draft draft{day_start + std::chrono::seconds{rng.below(86400)}, order++, compose(terms, word), {}, -1};
            if (rng.chance(config.ambient_link_probability))
                draft.urls.push_back(fmt::format("https://social.example/p/{}", rng.below(1000000)));
            drafts.push_back(std::move(draft));
        }

        for (std::size_t ev = 0; ev < config.injected_events.size(); ++ev) {
            const auto& e = config.injected_events[ev];
            if (day < e.start_day || day >= e.start_day + e.duration_days) continue;
            for (int i = 0; i < e.peak_rate; ++i) {
                std::vector<std::string> terms(e.term_pool.begin(), e.term_pool.begin() + 3);
                if (e.term_pool.size() > 3 && rng.chance(0.5))
                    terms.push_back(e.term_pool[3 + rng.below(e.term_pool.size() - 3)]);
                if (rng.chance(config.vocabulary_noise)) terms.push_back(noise_term(rng.below(kNoiseVocabulary)));
                Draft draft{day_start + std::chrono::seconds{rng.below(86400)}, order++,
                            compose(terms, pick(event_words[ev])), {}, static_cast<int>(ev)};
                const auto& links = event_links[ev];
                auto& emitted = event_emitted[ev];
                if (emitted < links.size()) {
                    draft.urls.push_back(links[emitted]);
                } else if (!links.empty() && rng.chance(0.25)) {
                    draft.urls.push_back(pick(links));
                }
                ++emitted;
                drafts.push_back(std::move(draft));
            }
        }

        std::sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) {
            return a.time != b.time ? a.time < b.time : a.order < b.order;
        });
        for (auto& draft : drafts) {
            Tweet tweet;
            tweet.posting_id = fmt::format("syn-{:07d}", next_id++);
            tweet.creation_time = draft.time;
            tweet.text = std::move(draft.text);
            tweet.language = "en";
            tweet.source = "synth";
            tweet.urls = std::move(draft.urls);
            if (draft.event >= 0) stream.truth.events[static_cast<std::size_t>(draft.event)].tweet_ids.push_back(tweet.posting_id);
            stream.tweets.push_back(std::move(tweet));
        }
    }
    return stream;
}

SyntheticStream generate(const ScenarioConfig& config) { return generate(config, *SentimentLexicon::bundled()); }

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

EvaluationResult evaluate(std::span<const ControversyReport> reports, const GroundTruth& truth) {
    std::unordered_map<std::string, std::size_t> owner;  // tweet id -> positive event index
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < truth.events.size(); ++i) {
        if (!truth.events[i].expected_controversial) continue;
        positives.push_back(i);
        for (const auto& id : truth.events[i].tweet_ids) owner.emplace(id, i);
    }

    EvaluationResult result;
    result.positive_events = positives.size();
    std::set<std::size_t> detected;
    for (const auto& report : reports) {
        if (!report.controversial) continue;
        ++result.flagged;
        std::map<std::size_t, std::size_t> overlap;
        for (const auto& id : report.member_ids)
            if (auto it = owner.find(id); it != owner.end()) ++overlap[it->second];
        bool majority = false;
        for (const auto& [event, count] : overlap) {
            if (2 * count > report.member_ids.size()) majority = true;
            if (2 * count > truth.events[event].tweet_ids.size()) detected.insert(event);
        }
        if (majority) ++result.true_positive_flags;
    }
    result.detected_events = detected.size();
    result.recall = positives.empty() ? 1.0 : static_cast<double>(detected.size()) / static_cast<double>(positives.size());
    if (result.flagged == 0) {
        result.precision = positives.empty() ? 1.0 : 0.0;
    } else {
        result.precision = static_cast<double>(result.true_positive_flags) / static_cast<double>(result.flagged);
    }
    double denom = result.precision + result.recall;
    result.f1 = denom > 0.0 ? 2.0 * result.precision * result.recall / denom : 0.0;
    return result;
}

EvaluationResult evaluate(std::span<const ControversyReport> reports, const ClusterState& clusters,
                          const GroundTruth& truth) {
    std::vector<ControversyReport> filled(reports.begin(), reports.end());
    for (auto& report : filled)
        if (report.member_ids.empty())
            if (const auto* cluster = clusters.find(report.cluster_id)) report.member_ids = cluster->member_ids;
    return evaluate(filled, truth);
}

} // namespace cdet
