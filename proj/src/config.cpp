#include "geosent/config.hpp"

#include <filesystem>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "geosent/error.hpp"

namespace geosent {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' is not key=value");
  }
  std::string key = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    auto dot = key.find('.', start);
    std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw UsageError("override key '" + key + "' is malformed");
    if (!node->is_object()) throw UsageError("override key '" + key + "' crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config: '") + key + "' has the wrong type");
  }
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return empty;
  if (!it->is_object()) throw UsageError(std::string("config: '") + key + "' must be an object");
  return *it;
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal().string();
  return (fs::path(base) / path).lexically_normal().string();
}

void check_known_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw UsageError("config: unknown key '" + where + k + "'");
  }
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text, const std::string& base_dir,
                            const std::vector<std::string>& overrides) {
  json doc = json::parse(json_text, nullptr, false, true);
  if (doc.is_discarded() || !doc.is_object()) throw UsageError("config is not a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);
  check_known_keys(doc, {"paths", "language", "event_date", "event_day", "thresholds", "clean",
                         "classifier", "regression", "alpha", "seed"}, "");

  PipelineConfig cfg;
  const auto& paths = section(doc, "paths");
  check_known_keys(paths, {"posts", "gazetteer", "dictionary", "lemmas", "stop_words", "conjunctions",
                           "emoji_polarity", "training", "region_table"}, "paths.");
  auto path_field = [&](const char* key, std::string& out) {
    read(paths, key, out);
    out = resolve(base_dir, out);
  };
  path_field("posts", cfg.paths.posts);
  path_field("gazetteer", cfg.paths.gazetteer);
  path_field("dictionary", cfg.paths.dictionary);
  path_field("lemmas", cfg.paths.lemmas);
  path_field("stop_words", cfg.paths.stop_words);
  path_field("conjunctions", cfg.paths.conjunctions);
  path_field("emoji_polarity", cfg.paths.emoji_polarity);
  path_field("training", cfg.paths.training);
  path_field("region_table", cfg.paths.region_table);

  read(doc, "language", cfg.language);
  std::string date_text;
  read(doc, "event_date", date_text);
  if (!date_text.empty()) {
    auto d = parse_date(date_text);
    if (!d) throw UsageError("config: event_date '" + date_text + "' is not YYYY-MM-DD");
    cfg.event_date = *d;
  }
  std::string event_day;
  read(doc, "event_day", event_day);
  if (event_day == "after") {
    cfg.event_day = regional::EventDay::After;
  } else if (!event_day.empty() && event_day != "before") {
    throw UsageError("config: event_day must be 'before' or 'after'");
  }

  const auto& th = section(doc, "thresholds");
  check_known_keys(th, {"min_region_posts", "emoji_min_share", "max_short_words"}, "thresholds.");
  read(th, "min_region_posts", cfg.min_region_posts);
  read(th, "emoji_min_share", cfg.emoji_min_share);
  read(th, "max_short_words", cfg.max_short_words);

  const auto& cl = section(doc, "clean");
  check_known_keys(cl, {"links", "mentions", "hashtags", "emojis", "nonword", "short_posts", "misspellings",
                        "lemmatize", "stopwords"}, "clean.");
  read(cl, "links", cfg.steps.links);
  read(cl, "mentions", cfg.steps.mentions);
  read(cl, "hashtags", cfg.steps.hashtags);
  read(cl, "emojis", cfg.steps.emojis);
  read(cl, "nonword", cfg.steps.nonword);
  read(cl, "short_posts", cfg.steps.short_posts);
  read(cl, "misspellings", cfg.steps.misspellings);
  read(cl, "lemmatize", cfg.steps.lemmatize);
  read(cl, "stopwords", cfg.steps.stopwords);

  const auto& cf = section(doc, "classifier");
  check_known_keys(cf, {"kind", "smoothing", "learning_rate", "epochs", "l2", "binary", "pseudo_label",
                        "train_fraction", "pseudo_fraction", "pseudo_min_confidence"}, "classifier.");
  std::string kind = "naive_bayes";
  read(cf, "kind", kind);
  if (kind == "naive_bayes") {
    cfg.classifier.train.kind = sentiment::ModelKind::NaiveBayes;
  } else if (kind == "logistic") {
    cfg.classifier.train.kind = sentiment::ModelKind::Logistic;
  } else {
    throw UsageError("config: classifier.kind must be naive_bayes or logistic");
  }
  read(cf, "smoothing", cfg.classifier.train.nb.smoothing);
  read(cf, "learning_rate", cfg.classifier.train.logistic.learning_rate);
  read(cf, "epochs", cfg.classifier.train.logistic.epochs);
  read(cf, "l2", cfg.classifier.train.logistic.l2);
  read(cf, "binary", cfg.classifier.binary);
  read(cf, "pseudo_label", cfg.classifier.pseudo_label);
  read(cf, "train_fraction", cfg.classifier.train_fraction);
  read(cf, "pseudo_fraction", cfg.classifier.pseudo.fraction);
  if (cf.contains("pseudo_min_confidence") && !cf["pseudo_min_confidence"].is_null()) {
    double c = 0;
    read(cf, "pseudo_min_confidence", c);
    cfg.classifier.pseudo.min_confidence = c;
  }

  const auto& rg = section(doc, "regression");
  check_known_keys(rg, {"features", "standardize", "direction", "start"}, "regression.");
  read(rg, "features", cfg.regression.features);
  read(rg, "standardize", cfg.regression.standardize);
  std::string direction = "both", start = "full";
  read(rg, "direction", direction);
  read(rg, "start", start);
  if (direction == "both") {
    cfg.regression.direction = stats::Direction::Both;
  } else if (direction == "backward") {
    cfg.regression.direction = stats::Direction::Backward;
  } else if (direction == "forward") {
    cfg.regression.direction = stats::Direction::Forward;
  } else {
    throw UsageError("config: regression.direction must be both, backward or forward");
  }
  if (start == "full") {
    cfg.regression.start = stats::StartFrom::Full;
  } else if (start == "empty") {
    cfg.regression.start = stats::StartFrom::Empty;
  } else {
    throw UsageError("config: regression.start must be full or empty");
  }

  read(doc, "alpha", cfg.alpha);
  read(doc, "seed", cfg.seed);
  cfg.classifier.pseudo.seed = cfg.seed;

  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw UsageError("config: alpha must be in (0,1)");
  if (!(cfg.emoji_min_share >= 0.0 && cfg.emoji_min_share <= 1.0)) {
    throw UsageError("config: thresholds.emoji_min_share must be in [0,1]");
  }
  if (!(cfg.classifier.train_fraction > 0.0 && cfg.classifier.train_fraction <= 1.0)) {
    throw UsageError("config: classifier.train_fraction must be in (0,1]");
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::path(path).parent_path().string(), overrides);
}

void validate_paths(const PipelineConfig& config) {
  const std::pair<const char*, const std::string*> entries[] = {
      {"posts", &config.paths.posts},
      {"gazetteer", &config.paths.gazetteer},
      {"dictionary", &config.paths.dictionary},
      {"lemmas", &config.paths.lemmas},
      {"stop_words", &config.paths.stop_words},
      {"conjunctions", &config.paths.conjunctions},
      {"emoji_polarity", &config.paths.emoji_polarity},
      {"training", &config.paths.training},
      {"region_table", &config.paths.region_table},
  };
  for (const auto& [name, path] : entries) {
    if (!path->empty() && !fs::exists(*path)) {
      throw UsageError(std::string("config: paths.") + name + " does not exist: " + *path);
    }
  }
}

preprocess::CleanConfig load_clean_config(const PipelineConfig& config) {
  preprocess::CleanConfig cc;
  cc.steps = config.steps;
  cc.max_short_words = config.max_short_words;
  if (!config.paths.conjunctions.empty()) cc.conjunctions = preprocess::load_word_list(config.paths.conjunctions);
  if (!config.paths.dictionary.empty()) cc.dictionary = preprocess::load_word_list(config.paths.dictionary);
  if (!config.paths.lemmas.empty()) cc.lemmas = preprocess::load_lemma_map(config.paths.lemmas);
  if (!config.paths.stop_words.empty()) cc.stop_words = preprocess::load_word_list(config.paths.stop_words);
  if (cc.steps.misspellings && config.paths.dictionary.empty()) {
    throw UsageError("config: misspelling filter is on but paths.dictionary is not set");
  }
  return cc;
}

}  // namespace geosent
