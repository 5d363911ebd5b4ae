#include "geosent/preprocess.hpp"

#include <algorithm>
#include <fstream>

#include "geosent/error.hpp"
#include "geosent/unicode.hpp"

namespace geosent::preprocess {
namespace {

using Codepoints = std::vector<char32_t>;

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c - U'A' + U'a' : c; }

bool at_boundary(const Codepoints& cps, std::size_t i) { return i == 0 || !unicode::is_word(cps[i - 1]); }

bool starts_with_ci(const Codepoints& cps, std::size_t i, std::u32string_view prefix) {
  if (i + prefix.size() > cps.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (ascii_lower(cps[i + k]) != prefix[k]) return false;
  }
  return true;
}

// Length of a link starting at i, or 0.
std::size_t link_length(const Codepoints& cps, std::size_t i) {
  if (!at_boundary(cps, i)) return 0;
  std::size_t prefix = 0;
  if (starts_with_ci(cps, i, U"https://")) {
    prefix = 8;
  } else if (starts_with_ci(cps, i, U"http://")) {
    prefix = 7;
  } else if (starts_with_ci(cps, i, U"www.")) {
    prefix = 4;
  } else {
    return 0;
  }
  std::size_t j = i + prefix;
  while (j < cps.size() && !unicode::is_whitespace(cps[j])) ++j;
  return j - i;
}

// Length of `sigil` followed by one or more word characters at i, or 0.
std::size_t tagged_length(const Codepoints& cps, std::size_t i, char32_t sigil) {
  if (cps[i] != sigil || !at_boundary(cps, i)) return 0;
  std::size_t j = i + 1;
  while (j < cps.size() && unicode::is_word(cps[j])) ++j;
  return j - i > 1 ? j - i : 0;
}

template <typename Measure>
std::size_t strip_spans(Codepoints& cps, Measure measure, std::size_t& consumed) {
  Codepoints out;
  out.reserve(cps.size());
  std::size_t items = 0;
  for (std::size_t i = 0; i < cps.size();) {
    std::size_t len = measure(cps, i);
    if (len > 0) {
      ++items;
      consumed += len;
      out.push_back(U' ');
      i += len;
    } else {
      out.push_back(cps[i++]);
    }
  }
  cps = std::move(out);
  return items;
}

std::vector<std::string> split_tokens(const Codepoints& cps) {
  std::vector<std::string> tokens;
  Codepoints cur;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back(unicode::fold(unicode::encode(cur)));
      cur.clear();
    }
  };
  for (char32_t c : cps) {
    if (unicode::is_whitespace(c)) {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return tokens;
}

WordSet fold_all(const WordSet& words) {
  WordSet out;
  for (const auto& w : words) {
    auto f = unicode::fold(unicode::trim(w));
    if (!f.empty()) out.insert(std::move(f));
  }
  return out;
}

bool letters_only(std::string_view word) {
  auto cps = unicode::decode(word);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), unicode::is_letter);
}

LemmaMap close_lemmas(const LemmaMap& raw) {
  LemmaMap folded;
  for (const auto& [w, l] : raw) {
    auto fw = unicode::fold(unicode::trim(w));
    auto fl = unicode::fold(unicode::trim(l));
    if (fw.empty() || fl.empty()) continue;
    if (!letters_only(fl)) throw DataError("lemma map: target '" + l + "' is not a word");
    folded[fw] = fl;
  }
  LemmaMap closed;
  for (const auto& [w, l] : folded) {
    std::string target = l;
    std::size_t hops = 0;
    for (auto it = folded.find(target); it != folded.end() && it->second != target;
         it = folded.find(target)) {
      target = it->second;
      if (++hops > folded.size()) throw DataError("lemma map: cycle through '" + w + "'");
    }
    closed[w] = target;
  }
  return closed;
}

const std::string& lemma_of(const LemmaMap& lemmas, const std::string& w) {
  auto it = lemmas.find(w);
  return it == lemmas.end() ? w : it->second;
}

}  // namespace

std::string_view to_string(RejectReason r) {
  return r == RejectReason::TooShort ? "too_short" : "misspelled";
}

Cleaner::Cleaner(CleanConfig config)
    : steps_(config.steps), max_short_words_(config.max_short_words) {
  conjunctions_ = fold_all(config.conjunctions);
  dictionary_ = fold_all(config.dictionary);
  stops_ = fold_all(config.stop_words);
  lemmas_ = close_lemmas(config.lemmas);
  for (const auto& e : config.emoji_whitelist) {
    for (char32_t c : unicode::decode(e)) {
      if (unicode::is_emoji(c)) {
        emoji_whitelist_.insert(unicode::encode(c));
        break;
      }
    }
  }
  if (steps_.lemmatize) {
    for (const auto& [w, l] : lemmas_) {
      dictionary_.insert(l);
    }
    WordSet extra_stops, extra_conj;
    for (const auto& [w, l] : lemmas_) {
      if (stops_.count(l)) extra_stops.insert(w);
      if (conjunctions_.count(l)) extra_conj.insert(w);
    }
    stops_.insert(extra_stops.begin(), extra_stops.end());
    conjunctions_.insert(extra_conj.begin(), extra_conj.end());
  }
}

CleanPost Cleaner::clean(const corpus::RawPost& post) const { return clean(post.id, post.text); }

CleanPost Cleaner::clean(std::string id, std::string_view text) const {
  CleanPost out;
  out.id = std::move(id);
  auto& removed = out.removed;
  Codepoints cps = unicode::decode(unicode::nfc(text));

  if (steps_.links) {
    removed.links = strip_spans(cps, link_length, removed.entity_codepoints);
  }
  if (steps_.mentions) {
    removed.mentions = strip_spans(
        cps, [](const Codepoints& c, std::size_t i) { return tagged_length(c, i, U'@'); },
        removed.entity_codepoints);
  }
  if (steps_.hashtags) {
    removed.hashtags = strip_spans(
        cps, [](const Codepoints& c, std::size_t i) { return tagged_length(c, i, U'#'); },
        removed.entity_codepoints);
  }
  if (steps_.emojis) {
    for (auto& c : cps) {
      if (!unicode::is_emoji(c)) continue;
      auto utf8 = unicode::encode(c);
      if (emoji_whitelist_.count(utf8)) {
        out.kept_emojis.push_back(std::move(utf8));
      } else {
        ++removed.emojis_dropped;
      }
      c = U' ';
    }
  }
  if (steps_.nonword) {
    for (auto& c : cps) {
      if (unicode::is_whitespace(c) || unicode::is_letter(c)) continue;
      ++removed.nonword;
      c = U' ';
    }
  }

  std::vector<std::string> tokens = split_tokens(cps);

  auto reject = [&](RejectReason why) {
    out.rejected = why;
    out.kept_emojis.clear();
    return out;
  };
  if (steps_.short_posts) {
    std::size_t words = 0;
    for (const auto& t : tokens) {
      if (conjunctions_.count(t)) continue;
      if (steps_.stopwords && stops_.count(t)) continue;
      ++words;
    }
    if (words <= max_short_words_) return reject(RejectReason::TooShort);
  }
  if (steps_.misspellings && spell_gate(tokens, dictionary_) == GateResult::Fail) {
    return reject(RejectReason::Misspelled);
  }
  out.tokens = lemmatize_and_stop(tokens, lemmas_, stops_, steps_.lemmatize, steps_.stopwords);
  removed.stopwords = tokens.size() - out.tokens.size();
  return out;
}

CleanPost clean(const corpus::RawPost& post, const Cleaner& cleaner) { return cleaner.clean(post); }

std::string render(const CleanPost& post) {
  std::string out;
  auto append = [&](const std::string& piece) {
    if (!out.empty()) out.push_back(' ');
    out += piece;
  };
  for (const auto& t : post.tokens) append(t);
  for (const auto& e : post.kept_emojis) append(e);
  return out;
}

GateResult spell_gate(std::span<const std::string> tokens, const WordSet& dictionary) {
  for (const auto& t : tokens) {
    if (!dictionary.count(t)) return GateResult::Fail;
  }
  return GateResult::Pass;
}

std::vector<std::string> lemmatize_and_stop(std::span<const std::string> tokens, const LemmaMap& lemmas,
                                            const WordSet& stops, bool lemmatize, bool remove_stops) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    const std::string& word = lemmatize ? lemma_of(lemmas, t) : t;
    if (remove_stops && stops.count(word)) continue;
    out.push_back(word);
  }
  return out;
}

FrequencyReport FrequencyReport::top(std::size_t k) const {
  FrequencyReport out;
  out.total = total;
  out.rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(std::min(k, rows.size())));
  return out;
}

FrequencyReport make_report(const std::map<std::string, std::size_t>& counts) {
  FrequencyReport report;
  for (const auto& [item, n] : counts) {
    report.total += n;
    report.rows.push_back({item, n, 0.0});
  }
  for (auto& row : report.rows) {
    row.share = static_cast<double>(row.count) / static_cast<double>(report.total);
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const FrequencyRow& a, const FrequencyRow& b) { return a.count > b.count; });
  return report;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
  Codepoints cps = unicode::decode(unicode::nfc(text));
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < cps.size();) {
    std::size_t len = tagged_length(cps, i, U'#');
    if (len == 0) {
      ++i;
      continue;
    }
    Codepoints body(cps.begin() + static_cast<std::ptrdiff_t>(i + 1),
                    cps.begin() + static_cast<std::ptrdiff_t>(i + len));
    tags.push_back(unicode::fold(unicode::encode(body)));
    i += len;
  }
  return tags;
}

std::vector<std::string> extract_emojis(std::string_view text) {
  std::vector<std::string> out;
  for (char32_t c : unicode::decode(text)) {
    if (unicode::is_emoji(c)) out.push_back(unicode::encode(c));
  }
  return out;
}

FrequencyReport hashtag_report(std::span<const corpus::RawPost> posts) {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : posts) {
    for (auto& tag : extract_hashtags(p.text)) ++counts[tag];
  }
  return make_report(counts);
}

FrequencyReport emoji_report(std::span<const corpus::RawPost> posts) {
  std::map<std::string, std::size_t> counts;
  for (const auto& p : posts) {
    for (auto& e : extract_emojis(p.text)) ++counts[e];
  }
  return make_report(counts);
}

std::set<std::string> select_emoji_whitelist(std::span<const corpus::RawPost> posts,
                                             const PolarityMap& polarity, double min_share) {
  std::set<std::string> out;
  for (const auto& row : emoji_report(posts).rows) {
    auto it = polarity.find(row.item);
    if (it == polarity.end() || it->second == Polarity::Ambiguous) continue;
    if (row.share >= min_share) out.insert(row.item);
  }
  return out;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open word list " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (lines.empty() && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    auto t = unicode::trim(line);
    if (!t.empty()) lines.push_back(std::move(t));
  }
  return lines;
}

std::pair<std::string, std::string> two_columns(const std::string& line, const std::string& where) {
  auto cut = line.find_first_of("\t,");
  if (cut == std::string::npos) throw DataError(where + ": expected two columns");
  return {unicode::trim(line.substr(0, cut)), unicode::trim(line.substr(cut + 1))};
}

}  // namespace

WordSet load_word_list(const std::string& path) {
  auto lines = read_lines(path);
  return WordSet(lines.begin(), lines.end());
}

LemmaMap load_lemma_map(const std::string& path) {
  LemmaMap out;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto [w, l] = two_columns(lines[i], path + " entry " + std::to_string(i + 1));
    out[w] = l;
  }
  return out;
}

PolarityMap load_polarity_map(const std::string& path) {
  PolarityMap out;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto where = path + " entry " + std::to_string(i + 1);
    auto [emoji, label] = two_columns(lines[i], where);
    Polarity p;
    if (label == "pos" || label == "positive") {
      p = Polarity::Positive;
    } else if (label == "neg" || label == "negative") {
      p = Polarity::Negative;
    } else if (label == "ambiguous") {
      p = Polarity::Ambiguous;
    } else {
      throw DataError(where + ": unknown polarity '" + label + "'");
    }
    auto emojis = extract_emojis(emoji);
    if (emojis.empty()) throw DataError(where + ": no emoji in '" + emoji + "'");
    out[emojis.front()] = p;
  }
  return out;
}

}  // namespace geosent::preprocess
