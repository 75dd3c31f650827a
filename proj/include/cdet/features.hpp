#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "cdet/ingest.hpp"
#include "cdet/time.hpp"

namespace cdet {

class RedirectSource;

enum class TokenKind { Word, Hashtag, Mention, Url, Punctuation };

struct Token {
    std::string surface;
    std::size_t position = 0;
    TokenKind kind = TokenKind::Word;

    bool operator==(const Token&) const = default;
};

/// Splits on whitespace and punctuation. Hashtags, mentions, and http(s) URLs stay
/// whole; apostrophes and hyphens inside a word do not split it.
std::vector<Token> tokenize(std::string_view text);

enum class PosTag { ProperNoun, Verb, Other };

struct TaggedToken {
    Token token;
    PosTag tag = PosTag::Other;

    bool operator==(const TaggedToken&) const = default;
};

/// Lowercase single words, one per line, '#' comments.
class WordList {
public:
    static WordList parse(std::string_view text);
    bool contains(std::string_view lowercase_word) const { return words_.count(std::string(lowercase_word)) > 0; }
    void insert(std::string word);
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

/// Verb word list with suffix-stripping lemma lookup (-s/-es/-ies, -ed/-d/-ied, -ing,
/// doubled final consonants). A form listed verbatim is its own lemma.
class VerbLexicon {
public:
    static VerbLexicon parse(std::string_view text);
    std::optional<std::string> lemma(std::string_view lowercase_word) const;
    void insert(std::string verb) { words_.insert(std::move(verb)); }

private:
    WordList words_;
};

/// Multi-word entity phrases matched case-insensitively over consecutive word tokens.
class Gazetteer {
public:
    struct Match {
        std::size_t start;   // index into the token span
        std::size_t length;  // tokens covered
        std::string phrase;  // lowercase, single-spaced
    };

    static Gazetteer parse(std::string_view text);
    void insert(std::string_view phrase);

    /// Longest entity starting at `index`, or 0 tokens.
    std::size_t match_length(std::span<const Token> tokens, std::size_t index) const;

    /// Non-overlapping leftmost-longest matches.
    std::vector<Match> find_all(std::span<const Token> tokens) const;

private:
    std::unordered_map<std::string, std::vector<std::vector<std::string>>> by_first_word_;
};

struct LanguageResources {
    VerbLexicon verbs;
    WordList stopwords;
    Gazetteer gazetteer;

    static std::shared_ptr<const LanguageResources> bundled();
    static LanguageResources load(const std::filesystem::path& verbs, const std::filesystem::path& stopwords,
                                  const std::filesystem::path& gazetteer);
};

/// Pluggable part-of-speech tagger.
class Tagger {
public:
    virtual ~Tagger() = default;
    virtual std::vector<TaggedToken> tag(std::span<const Token> tokens) const = 0;
};

/// Rule-based tagging, applied per word token in priority order:
/// gazetteer span -> ProperNoun; stopword -> Other; capitalized and not
/// sentence-initial -> ProperNoun; verb lemma -> Verb; otherwise Other.
/// Non-word tokens are Other.
class HeuristicTagger final : public Tagger {
public:
    explicit HeuristicTagger(std::shared_ptr<const LanguageResources> resources, bool use_capitalization = true);
    std::vector<TaggedToken> tag(std::span<const Token> tokens) const override;

    const LanguageResources& resources() const { return *resources_; }
    bool uses_capitalization() const { return use_capitalization_; }

private:
    std::shared_ptr<const LanguageResources> resources_;
    bool use_capitalization_;
};

std::vector<TaggedToken> tag_pos(std::span<const Token> tokens, const Tagger& tagger);

/// Joins maximal runs of adjacent ProperNoun tokens with single spaces, lowercased.
std::vector<std::string> merge_proper_nouns(std::span<const TaggedToken> tagged);

/// Multiset of terms; std::map keeps iteration order deterministic.
using TermBag = std::map<std::string, int>;

class SentimentLexicon {
public:
    static constexpr double kMin = -2.0;
    static constexpr double kMax = 2.0;
    static constexpr std::size_t kNegationWindow = 3;

    /// Sections: valence entries ("token<TAB>valence", also the default section),
    /// "[negators]" (one token per line), "[intensifiers]" ("token<TAB>multiplier").
    /// Throws Error{InvalidConfig} on out-of-range values.
    static SentimentLexicon parse(std::string_view text);
    static SentimentLexicon load(const std::filesystem::path& path);
    static std::shared_ptr<const SentimentLexicon> bundled();

    void set_valence(std::string token, double valence);
    void add_negator(std::string token);
    void set_intensifier(std::string token, double multiplier);

    std::optional<double> valence(std::string_view lowercase_token) const;
    bool is_negator(std::string_view lowercase_token) const { return negators_.count(std::string(lowercase_token)) > 0; }
    std::optional<double> intensifier(std::string_view lowercase_token) const;

    const std::map<std::string, double>& entries() const { return entries_; }

private:
    std::map<std::string, double> entries_;
    std::set<std::string> negators_;
    std::map<std::string, double> intensifiers_;
};

/// Mean of matched valences after negation (flip when an odd number of negators sit in
/// the preceding three tokens, up to a punctuation token) and intensifier scaling,
/// clamped to [-2, 2]. No matches score exactly 0.
double score_sentiment(std::span<const Token> tokens, const SentimentLexicon& lexicon);

struct TweetVector {
    std::string tweet_id;
    Timestamp timestamp;
    TermBag terms;
    double sentiment = 0.0;
    std::set<std::string> links;
    Date day;
    std::size_t unresolved_links = 0;  // URLs dropped by normalization errors

    bool operator==(const TweetVector&) const = default;
};

struct Discard {
    std::string tweet_id;
};

using VectorResult = std::variant<TweetVector, Discard>;

/// Everything needed to turn a Tweet into a TweetVector.
class FeatureExtractor {
public:
    FeatureExtractor(std::shared_ptr<const Tagger> tagger, std::shared_ptr<const LanguageResources> resources,
                     std::shared_ptr<const SentimentLexicon> lexicon, std::shared_ptr<const RedirectSource> redirects);

    /// Bundled resources, heuristic tagger, empty redirect map.
    static FeatureExtractor bundled();

    TermBag extract_terms(const Tweet& tweet) const;
    VectorResult build(const Tweet& tweet) const;

    const Tagger& tagger() const { return *tagger_; }
    const SentimentLexicon& lexicon() const { return *lexicon_; }
    const LanguageResources& resources() const { return *resources_; }

private:
    std::shared_ptr<const Tagger> tagger_;
    std::shared_ptr<const LanguageResources> resources_;
    std::shared_ptr<const SentimentLexicon> lexicon_;
    std::shared_ptr<const RedirectSource> redirects_;
};

/// Union of merged proper-noun phrases, verb lemmas, gazetteer entities inside longer
/// phrases, and hashtags (text and field, counted once each); stopwords removed.
TermBag extract_5w_terms(const Tweet& tweet, const FeatureExtractor& extractor);

VectorResult build_tweet_vector(const Tweet& tweet, const FeatureExtractor& extractor);

} // namespace cdet
