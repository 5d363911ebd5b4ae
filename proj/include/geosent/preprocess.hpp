#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "geosent/corpus.hpp"

namespace geosent::preprocess {

using WordSet = std::unordered_set<std::string>;
using LemmaMap = std::unordered_map<std::string, std::string>;

enum class RejectReason { TooShort, Misspelled };
std::string_view to_string(RejectReason r);

struct RemovalCounts {
  std::size_t links = 0;             // items
  std::size_t mentions = 0;          // items
  std::size_t hashtags = 0;          // items
  std::size_t emojis_dropped = 0;    // codepoints
  std::size_t nonword = 0;           // codepoints
  std::size_t stopwords = 0;         // tokens
  std::size_t entity_codepoints = 0; // codepoints consumed by links, mentions and hashtags

  bool operator==(const RemovalCounts&) const = default;
};

struct CleanPost {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> kept_emojis;  // one UTF-8 encoded codepoint each
  RemovalCounts removed;
  std::optional<RejectReason> rejected;

  bool operator==(const CleanPost&) const = default;
};

struct Steps {
  bool links = true;
  bool mentions = true;
  bool hashtags = true;
  bool emojis = true;
  bool nonword = true;
  bool short_posts = true;
  bool misspellings = true;
  bool lemmatize = true;
  bool stopwords = true;
};

// Raw word lists as read from disk. Terms are folded when a Cleaner is built.
struct CleanConfig {
  Steps steps;
  WordSet conjunctions;
  WordSet emoji_whitelist;
  WordSet dictionary;
  LemmaMap lemmas;
  WordSet stop_words;
  std::size_t max_short_words = 3;  // posts with at most this many words are rejected
};

// Folded, closed lexicons ready for repeated cleaning.
//
// Lemma chains are resolved to their fixed point, lemma targets join the
// dictionary, and with lemmatization on a word counts as a stop word (or a
// conjunction) when its lemma is one. These closures make clean() stable
// when applied to its own rendered output.
class Cleaner {
 public:
  explicit Cleaner(CleanConfig config);

  CleanPost clean(const corpus::RawPost& post) const;
  CleanPost clean(std::string id, std::string_view text) const;

  const Steps& steps() const noexcept { return steps_; }
  const WordSet& dictionary() const noexcept { return dictionary_; }
  const LemmaMap& lemmas() const noexcept { return lemmas_; }
  const WordSet& stop_words() const noexcept { return stops_; }
  const WordSet& conjunctions() const noexcept { return conjunctions_; }

 private:
  Steps steps_;
  std::size_t max_short_words_;
  WordSet conjunctions_;
  WordSet emoji_whitelist_;
  WordSet dictionary_;
  LemmaMap lemmas_;
  WordSet stops_;
};

CleanPost clean(const corpus::RawPost& post, const Cleaner& cleaner);

// Tokens joined by single spaces, followed by the kept emojis.
std::string render(const CleanPost& post);

enum class GateResult { Pass, Fail };

// Fail iff at least one token is absent from the dictionary.
GateResult spell_gate(std::span<const std::string> tokens, const WordSet& dictionary);

std::vector<std::string> lemmatize_and_stop(std::span<const std::string> tokens, const LemmaMap& lemmas,
                                            const WordSet& stops, bool lemmatize = true,
                                            bool remove_stops = true);

struct FrequencyRow {
  std::string item;
  std::size_t count = 0;
  double share = 0.0;
};

struct FrequencyReport {
  std::vector<FrequencyRow> rows;  // count descending, then item ascending
  std::size_t total = 0;

  FrequencyReport top(std::size_t k) const;
};

FrequencyReport make_report(const std::map<std::string, std::size_t>& counts);

// Folded hashtag bodies ("#SilniRazem" -> "silnirazem") in order of appearance.
std::vector<std::string> extract_hashtags(std::string_view text);
std::vector<std::string> extract_emojis(std::string_view text);

FrequencyReport hashtag_report(std::span<const corpus::RawPost> posts);
FrequencyReport emoji_report(std::span<const corpus::RawPost> posts);

enum class Polarity { Positive, Negative, Ambiguous };
using PolarityMap = std::map<std::string, Polarity>;

std::set<std::string> select_emoji_whitelist(std::span<const corpus::RawPost> posts,
                                             const PolarityMap& polarity, double min_share = 0.01);

// One term per line (UTF-8); blank lines skipped. Terms are returned unfolded.
WordSet load_word_list(const std::string& path);
// Two columns per line, comma or tab separated: word,lemma.
LemmaMap load_lemma_map(const std::string& path);
// Two columns per line: emoji,{pos|neg|ambiguous}.
PolarityMap load_polarity_map(const std::string& path);

}  // namespace geosent::preprocess
