#include "cdet/features.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cdet/bundled.hpp"
#include "cdet/credibility.hpp"
#include "cdet/detail/strings.hpp"
#include "cdet/error.hpp"

namespace cdet {
namespace {

using detail::to_lower;

bool is_word_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || u >= 0x80;
}

bool is_url_start(std::string_view chunk) {
    return detail::starts_with_ci(chunk, "http://") || detail::starts_with_ci(chunk, "https://");
}

bool is_sentence_end(const Token& t) {
    return t.kind == TokenKind::Punctuation && (t.surface == "." || t.surface == "!" || t.surface == "?" || t.surface == ":");
}

bool is_capitalized(std::string_view word) { return !word.empty() && word.front() >= 'A' && word.front() <= 'Z'; }

bool has_letter(std::string_view word) {
    return std::any_of(word.begin(), word.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || static_cast<unsigned char>(c) >= 0x80;
    });
}

void push(std::vector<Token>& out, std::string_view surface, TokenKind kind) {
    out.push_back(Token{std::string(surface), out.size(), kind});
}

void tokenize_chunk(std::string_view chunk, std::vector<Token>& out) {
    if (is_url_start(chunk)) {
        std::size_t end = chunk.size();
        while (end > 0 && std::string_view(".,;:!?)\"'").find(chunk[end - 1]) != std::string_view::npos) --end;
        push(out, chunk.substr(0, end), TokenKind::Url);
        for (std::size_t i = end; i < chunk.size(); ++i) push(out, chunk.substr(i, 1), TokenKind::Punctuation);
        return;
    }
    std::size_t i = 0;
    while (i < chunk.size()) {
        char c = chunk[i];
        if ((c == '#' || c == '@') && i + 1 < chunk.size() && is_word_char(chunk[i + 1])) {
            std::size_t j = i + 1;
            while (j < chunk.size() && is_word_char(chunk[j])) ++j;
            push(out, chunk.substr(i, j - i), c == '#' ? TokenKind::Hashtag : TokenKind::Mention);
            i = j;
        } else if (is_word_char(c)) {
            std::size_t j = i + 1;
            while (j < chunk.size()) {
                if (is_word_char(chunk[j])) {
                    ++j;
                } else if ((chunk[j] == '\'' || chunk[j] == '-') && j + 1 < chunk.size() && is_word_char(chunk[j + 1])) {
                    j += 2;
                } else {
                    break;
                }
            }
            push(out, chunk.substr(i, j - i), TokenKind::Word);
            i = j;
        } else {
            push(out, chunk.substr(i, 1), TokenKind::Punctuation);
            ++i;
        }
    }
}

std::vector<std::string> split_words(std::string_view phrase) {
    std::vector<std::string> words;
    for (const auto& token : tokenize(phrase))
        if (token.kind == TokenKind::Word) words.push_back(to_lower(token.surface));
    return words;
}

double parse_number(std::string_view text, std::size_t line_no) {
    try {
        std::size_t used = 0;
        std::string s(text);
        double value = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing");
        return value;
    } catch (const std::exception&) {
        throw Error(Errc::InvalidConfig, fmt::format("lexicon line {}: bad number '{}'", line_no, text));
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && detail::is_space(text[i])) ++i;
        std::size_t j = i;
        while (j < text.size() && !detail::is_space(text[j])) ++j;
        if (j > i) tokenize_chunk(text.substr(i, j - i), out);
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Word lists
// ---------------------------------------------------------------------------

WordList WordList::parse(std::string_view text) {
    WordList list;
    for (auto line : detail::split_lines(text)) {
        line = detail::strip_comment(line);
        if (!line.empty()) list.insert(std::string(line));
    }
    return list;
}

void WordList::insert(std::string word) { words_.insert(to_lower(word)); }

VerbLexicon VerbLexicon::parse(std::string_view text) {
    VerbLexicon lexicon;
    lexicon.words_ = WordList::parse(text);
    return lexicon;
}

std::optional<std::string> VerbLexicon::lemma(std::string_view word) const {
    if (word.empty()) return std::nullopt;
    if (words_.contains(word)) return std::string(word);

    std::vector<std::string> candidates;
    auto ends_with = [&](std::string_view suffix) {
        return word.size() > suffix.size() + 1 && word.substr(word.size() - suffix.size()) == suffix;
    };
    auto stem_of = [&](std::size_t cut) { return std::string(word.substr(0, word.size() - cut)); };
    auto add_stem = [&](std::string stem) {
        candidates.push_back(stem);
        candidates.push_back(stem + "e");
        auto n = stem.size();
        if (n >= 2 && stem[n - 1] == stem[n - 2]) candidates.push_back(stem.substr(0, n - 1));
    };

    if (ends_with("ies")) candidates.push_back(stem_of(3) + "y");
    if (ends_with("ied")) candidates.push_back(stem_of(3) + "y");
    if (ends_with("ing")) add_stem(stem_of(3));
    if (ends_with("ed")) add_stem(stem_of(2));
    if (ends_with("es")) candidates.push_back(stem_of(2));
    if (ends_with("s") && !ends_with("ss")) candidates.push_back(stem_of(1));

    for (const auto& candidate : candidates)
        if (words_.contains(candidate)) return candidate;
    return std::nullopt;
}

Gazetteer Gazetteer::parse(std::string_view text) {
    Gazetteer gazetteer;
    for (auto line : detail::split_lines(text)) {
        line = detail::strip_comment(line);
        if (!line.empty()) gazetteer.insert(line);
    }
    return gazetteer;
}

void Gazetteer::insert(std::string_view phrase) {
    auto words = split_words(phrase);
    if (words.empty()) return;
    auto& bucket = by_first_word_[words.front()];
    if (std::find(bucket.begin(), bucket.end(), words) == bucket.end()) bucket.push_back(std::move(words));
}

std::size_t Gazetteer::match_length(std::span<const Token> tokens, std::size_t index) const {
    if (index >= tokens.size() || tokens[index].kind != TokenKind::Word) return 0;
    auto it = by_first_word_.find(to_lower(tokens[index].surface));
    if (it == by_first_word_.end()) return 0;
    std::size_t best = 0;
    for (const auto& words : it->second) {
        if (words.size() <= best || index + words.size() > tokens.size()) continue;
        bool ok = true;
        for (std::size_t k = 1; k < words.size() && ok; ++k) {
            const auto& tok = tokens[index + k];
            ok = tok.kind == TokenKind::Word && to_lower(tok.surface) == words[k];
        }
        if (ok) best = words.size();
    }
    return best;
}

std::vector<Gazetteer::Match> Gazetteer::find_all(std::span<const Token> tokens) const {
    std::vector<Match> matches;
    for (std::size_t i = 0; i < tokens.size();) {
        auto length = match_length(tokens, i);
        if (length == 0) {
            ++i;
            continue;
        }
        std::string phrase;
        for (std::size_t k = 0; k < length; ++k) {
            if (k) phrase += ' ';
            phrase += to_lower(tokens[i + k].surface);
        }
        matches.push_back(Match{i, length, std::move(phrase)});
        i += length;
    }
    return matches;
}

std::shared_ptr<const LanguageResources> LanguageResources::bundled() {
    static const auto instance = std::make_shared<const LanguageResources>(LanguageResources{
        VerbLexicon::parse(bundled::verbs()),
        WordList::parse(bundled::stopwords()),
        Gazetteer::parse(bundled::gazetteer()),
    });
    return instance;
}

LanguageResources LanguageResources::load(const std::filesystem::path& verbs, const std::filesystem::path& stopwords,
                                          const std::filesystem::path& gazetteer) {
    return LanguageResources{
        VerbLexicon::parse(detail::read_file(verbs)),
        WordList::parse(detail::read_file(stopwords)),
        Gazetteer::parse(detail::read_file(gazetteer)),
    };
}

// ---------------------------------------------------------------------------
// Tagging
// ---------------------------------------------------------------------------

HeuristicTagger::HeuristicTagger(std::shared_ptr<const LanguageResources> resources, bool use_capitalization)
    : resources_(std::move(resources)), use_capitalization_(use_capitalization) {}

std::vector<TaggedToken> HeuristicTagger::tag(std::span<const Token> tokens) const {
    std::vector<TaggedToken> out;
    out.reserve(tokens.size());
    bool sentence_start = true;
    std::size_t entity_end = 0;  // tokens before this index belong to a gazetteer span

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& token = tokens[i];
        PosTag tag = PosTag::Other;
        if (token.kind == TokenKind::Word) {
            if (i >= entity_end) {
                if (auto length = resources_->gazetteer.match_length(tokens, i); length > 0) entity_end = i + length;
            }
            auto lower = to_lower(token.surface);
            if (i < entity_end) {
                tag = PosTag::ProperNoun;
            } else if (resources_->stopwords.contains(lower) || !has_letter(lower)) {
                tag = PosTag::Other;
            } else if (use_capitalization_ && !sentence_start && is_capitalized(token.surface)) {
                tag = PosTag::ProperNoun;
            } else if (resources_->verbs.lemma(lower)) {
                tag = PosTag::Verb;
            }
            sentence_start = false;
        } else if (is_sentence_end(token)) {
            sentence_start = true;
        }
        out.push_back(TaggedToken{token, tag});
    }
    return out;
}

std::vector<TaggedToken> tag_pos(std::span<const Token> tokens, const Tagger& tagger) { return tagger.tag(tokens); }

std::vector<std::string> merge_proper_nouns(std::span<const TaggedToken> tagged) {
    std::vector<std::string> phrases;
    std::string current;
    for (const auto& item : tagged) {
        if (item.tag == PosTag::ProperNoun) {
            if (!current.empty()) current += ' ';
            current += to_lower(item.token.surface);
        } else if (!current.empty()) {
            phrases.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) phrases.push_back(std::move(current));
    return phrases;
}

// ---------------------------------------------------------------------------
// Sentiment
// ---------------------------------------------------------------------------

SentimentLexicon SentimentLexicon::parse(std::string_view text) {
    SentimentLexicon lexicon;
    enum class Section { Valence, Negators, Intensifiers } section = Section::Valence;
    std::size_t line_no = 0;
    for (auto raw : detail::split_lines(text)) {
        ++line_no;
        auto line = detail::strip_comment(raw);
        if (line.empty()) continue;
        if (line == "[valence]") {
            section = Section::Valence;
            continue;
        }
        if (line == "[negators]") {
            section = Section::Negators;
            continue;
        }
        if (line == "[intensifiers]") {
            section = Section::Intensifiers;
            continue;
        }
        if (line.front() == '[') throw Error(Errc::InvalidConfig, fmt::format("lexicon line {}: unknown section {}", line_no, line));

        auto tab = line.find('\t');
        auto token = detail::trim(line.substr(0, tab));
        if (section == Section::Negators) {
            lexicon.add_negator(std::string(token));
            continue;
        }
        if (tab == std::string_view::npos)
            throw Error(Errc::InvalidConfig, fmt::format("lexicon line {}: expected token<TAB>value", line_no));
        double value = parse_number(detail::trim(line.substr(tab + 1)), line_no);
        if (section == Section::Valence) {
            lexicon.set_valence(std::string(token), value);
        } else {
            lexicon.set_intensifier(std::string(token), value);
        }
    }
    return lexicon;
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) { return parse(detail::read_file(path)); }

std::shared_ptr<const SentimentLexicon> SentimentLexicon::bundled() {
    static const auto instance = std::make_shared<const SentimentLexicon>(parse(bundled::lexicon()));
    return instance;
}

void SentimentLexicon::set_valence(std::string token, double valence) {
    if (!std::isfinite(valence) || valence < kMin || valence > kMax)
        throw Error(Errc::InvalidConfig, fmt::format("valence {} for '{}' outside [-2, 2]", valence, token));
    entries_[to_lower(token)] = valence;
}

void SentimentLexicon::add_negator(std::string token) { negators_.insert(to_lower(token)); }

void SentimentLexicon::set_intensifier(std::string token, double multiplier) {
    if (!std::isfinite(multiplier) || multiplier <= 0.0)
        throw Error(Errc::InvalidConfig, fmt::format("intensifier {} for '{}' must be positive", multiplier, token));
    intensifiers_[to_lower(token)] = multiplier;
}

std::optional<double> SentimentLexicon::valence(std::string_view token) const {
    auto it = entries_.find(std::string(token));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> SentimentLexicon::intensifier(std::string_view token) const {
    auto it = intensifiers_.find(std::string(token));
    if (it == intensifiers_.end()) return std::nullopt;
    return it->second;
}

double score_sentiment(std::span<const Token> tokens, const SentimentLexicon& lexicon) {
    double sum = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].kind != TokenKind::Word) continue;
        auto value = lexicon.valence(to_lower(tokens[i].surface));
        if (!value) continue;
        double score = *value;
        bool negated = false;
        for (std::size_t back = 1; back <= SentimentLexicon::kNegationWindow && back <= i; ++back) {
            const Token& prev = tokens[i - back];
            if (prev.kind == TokenKind::Punctuation) break;
            if (prev.kind != TokenKind::Word) continue;
            auto lower = to_lower(prev.surface);
            if (lexicon.is_negator(lower)) negated = !negated;
            if (auto mult = lexicon.intensifier(lower)) score *= *mult;
        }
        sum += negated ? -score : score;
        ++matched;
    }
    if (matched == 0) return 0.0;
    return std::clamp(sum / static_cast<double>(matched), SentimentLexicon::kMin, SentimentLexicon::kMax);
}

// ---------------------------------------------------------------------------
// Tweet vectors
// ---------------------------------------------------------------------------

FeatureExtractor::FeatureExtractor(std::shared_ptr<const Tagger> tagger, std::shared_ptr<const LanguageResources> resources,
                                   std::shared_ptr<const SentimentLexicon> lexicon,
                                   std::shared_ptr<const RedirectSource> redirects)
    : tagger_(std::move(tagger)), resources_(std::move(resources)), lexicon_(std::move(lexicon)),
      redirects_(std::move(redirects)) {}

FeatureExtractor FeatureExtractor::bundled() {
    auto resources = LanguageResources::bundled();
    return FeatureExtractor(std::make_shared<HeuristicTagger>(resources), resources, SentimentLexicon::bundled(),
                            std::make_shared<RedirectMap>());
}

TermBag FeatureExtractor::extract_terms(const Tweet& tweet) const {
    auto tokens = tokenize(tweet.text);
    auto tagged = tagger_->tag(tokens);
    const auto& stopwords = resources_->stopwords;

    TermBag terms;
    auto add = [&](const std::string& term) {
        if (!term.empty() && !stopwords.contains(term)) ++terms[term];
    };

    auto phrases = merge_proper_nouns(tagged);
    for (const auto& phrase : phrases) add(phrase);

    for (const auto& item : tagged)
        if (item.tag == PosTag::Verb)
            if (auto lemma = resources_->verbs.lemma(to_lower(item.token.surface))) add(*lemma);

    // Entities nested in a longer proper-noun phrase also count on their own.
    for (const auto& match : resources_->gazetteer.find_all(tokens))
        if (std::find(phrases.begin(), phrases.end(), match.phrase) == phrases.end()) add(match.phrase);

    std::set<std::string> hashtags;
    for (const auto& tag : tweet.hashtags) hashtags.insert(to_lower(tag));
    for (const auto& token : tokens)
        if (token.kind == TokenKind::Hashtag) hashtags.insert(to_lower(std::string_view(token.surface).substr(1)));
    for (const auto& tag : hashtags)
        if (!tag.empty()) ++terms[tag];

    return terms;
}

VectorResult FeatureExtractor::build(const Tweet& tweet) const {
    TermBag terms = extract_terms(tweet);
    if (terms.empty()) return Discard{tweet.posting_id};

    TweetVector vector;
    vector.tweet_id = tweet.posting_id;
    vector.timestamp = tweet.creation_time;
    vector.terms = std::move(terms);
    auto tokens = tokenize(tweet.text);
    vector.sentiment = score_sentiment(tokens, *lexicon_);
    vector.day = day_of(tweet.creation_time);
    // Links from the record plus any written inline in the text.
    std::set<std::string> raw(tweet.urls.begin(), tweet.urls.end());
    for (const auto& token : tokens)
        if (token.kind == TokenKind::Url) raw.insert(token.surface);
    for (const auto& url : raw) {
        try {
            vector.links.insert(normalize_url(url, *redirects_));
        } catch (const Error&) {
            ++vector.unresolved_links;
        }
    }
    return vector;
}

TermBag extract_5w_terms(const Tweet& tweet, const FeatureExtractor& extractor) { return extractor.extract_terms(tweet); }

VectorResult build_tweet_vector(const Tweet& tweet, const FeatureExtractor& extractor) { return extractor.build(tweet); }

} // namespace cdet
