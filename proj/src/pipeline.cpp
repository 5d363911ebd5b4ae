#include "geosent/pipeline.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "geosent/corpus.hpp"
#include "geosent/csv.hpp"
#include "geosent/error.hpp"
#include "geosent/preprocess.hpp"
#include "geosent/regional.hpp"
#include "geosent/stats/report.hpp"
#include "geosent/stats/stepwise.hpp"
#include "json.hpp"

namespace geosent::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using Metrics = std::vector<std::pair<std::string, std::string>>;

std::ofstream open_out(const Context& ctx, const char* name) {
  fs::create_directories(ctx.out);
  std::ofstream out(ctx.out / name, std::ios::binary);
  if (!out) throw DataError("cannot write " + (ctx.out / name).string());
  return out;
}

std::ifstream open_in(const Context& ctx, const char* name, const char* producer) {
  std::ifstream in(ctx.out / name, std::ios::binary);
  if (!in) {
    throw UsageError("missing " + (ctx.out / name).string() + "; run '" + producer + "' first");
  }
  return in;
}

const std::string& require_path(const std::string& path, const char* key) {
  if (path.empty()) throw UsageError(std::string("config: paths.") + key + " is required");
  return path;
}

void write_metrics(const Context& ctx, const char* name, const Metrics& metrics) {
  auto out = open_out(ctx, name);
  csv::write_row(out, {"metric", "value"});
  for (const auto& [k, v] : metrics) csv::write_row(out, {k, v});
}

std::map<std::string, std::string> read_metrics(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  auto table = csv::read_stream(in);
  for (const auto& row : table.rows) {
    if (row.size() == 2) out[row[0]] = row[1];
  }
  return out;
}

std::optional<std::string> json_opt_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

struct IngestedPost {
  corpus::RawPost post;
  std::optional<std::string> region;
};

std::vector<IngestedPost> read_ingested(const Context& ctx) {
  auto in = open_in(ctx, files::kIngested, "ingest");
  std::vector<IngestedPost> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto obj = nlohmann::json::parse(line);
    IngestedPost ip;
    ip.post.id = obj.at("id").get<std::string>();
    ip.post.text = obj.at("text").get<std::string>();
    if (auto ts = json_opt_string(obj, "timestamp")) ip.post.timestamp = parse_rfc3339(*ts);
    ip.post.place_name = json_opt_string(obj, "place");
    ip.post.language = json_opt_string(obj, "lang");
    ip.region = json_opt_string(obj, "region");
    out.push_back(std::move(ip));
  }
  return out;
}

struct CleanRecord {
  std::string id;
  std::optional<std::string> region;
  std::optional<Timestamp> timestamp;
  std::vector<std::string> features;  // tokens then kept emojis
  bool accepted = false;
};

std::vector<CleanRecord> read_clean(const Context& ctx) {
  auto in = open_in(ctx, files::kClean, "clean");
  std::vector<CleanRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto obj = nlohmann::json::parse(line);
    CleanRecord r;
    r.id = obj.at("id").get<std::string>();
    r.region = json_opt_string(obj, "region");
    if (auto ts = json_opt_string(obj, "timestamp")) r.timestamp = parse_rfc3339(*ts);
    r.features = obj.at("tokens").get<std::vector<std::string>>();
    auto emojis = obj.at("emojis").get<std::vector<std::string>>();
    r.features.insert(r.features.end(), emojis.begin(), emojis.end());
    r.accepted = obj.at("rejected").is_null();
    out.push_back(std::move(r));
  }
  return out;
}

sentiment::PredictionMap read_predictions(const Context& ctx) {
  auto in = open_in(ctx, files::kPredictions, "classify' or 'import-predictions");
  return sentiment::read_external_predictions(in, files::kPredictions).predictions;
}

preprocess::WordSet read_whitelist(const Context& ctx) {
  auto in = open_in(ctx, files::kEmojiWhitelist, "clean");
  preprocess::WordSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.insert(line);
  }
  return out;
}

void write_report(const Context& ctx, const char* name, const preprocess::FrequencyReport& report) {
  auto out = open_out(ctx, name);
  csv::write_row(out, {"item", "count", "share"});
  for (const auto& row : report.rows) {
    csv::write_row(out, {row.item, std::to_string(row.count), csv::format_double(row.share)});
  }
}

std::vector<corpus::RawPost> ingested_posts(const Context& ctx) {
  std::vector<corpus::RawPost> posts;
  for (auto& ip : read_ingested(ctx)) posts.push_back(std::move(ip.post));
  return posts;
}

std::string pct(double share) { return fmt::format("{:.2f}", 100.0 * share); }

}  // namespace

void ingest(const Context& ctx) {
  const auto& cfg = ctx.config;
  const auto& posts_path = require_path(cfg.paths.posts, "posts");
  auto loaded = corpus::load_posts(posts_path, corpus::format_from_path(posts_path));
  for (const auto& w : loaded.warnings) ctx.warn("posts: skipped record, " + w);
  auto located = corpus::filter_located(loaded.posts, cfg.language);
  auto gazetteer = corpus::Gazetteer::load(require_path(cfg.paths.gazetteer, "gazetteer"));

  std::map<std::string, std::int64_t> populations;
  if (!cfg.paths.region_table.empty()) populations = corpus::load_region_table(cfg.paths.region_table).populations();

  std::vector<std::optional<std::string>> regions;
  std::set<std::string> tied_names;
  auto out = open_out(ctx, files::kIngested);
  for (const auto& p : located) {
    auto res = gazetteer.resolve(*p.place_name);
    if (res && res->tied && tied_names.insert(corpus::place_key(*p.place_name)).second) {
      ctx.warn("gazetteer: importance tie for '" + *p.place_name + "', chose region " + res->region_id);
    }
    regions.push_back(res ? std::optional<std::string>(res->region_id) : std::nullopt);
    ordered_json obj;
    obj["id"] = p.id;
    obj["text"] = p.text;
    obj["timestamp"] = p.timestamp ? ordered_json(format_rfc3339(*p.timestamp)) : nullptr;
    obj["place"] = *p.place_name;
    obj["lang"] = p.language ? ordered_json(*p.language) : nullptr;
    obj["region"] = res ? ordered_json(res->region_id) : nullptr;
    out << obj.dump() << '\n';
  }

  auto counts = corpus::region_counts(regions, populations);
  auto rc = open_out(ctx, files::kRegionCounts);
  csv::write_row(rc, {"region_id", "count", "weighted"});
  for (const auto& [id, c] : counts.regions) {
    csv::write_row(rc, {id, std::to_string(c.count), c.weighted ? csv::format_double(*c.weighted) : ""});
  }
  write_metrics(ctx, files::kIngestSummary,
                {{"loaded", std::to_string(loaded.posts.size())},
                 {"skipped", std::to_string(loaded.skipped)},
                 {"located", std::to_string(located.size())},
                 {"resolved", std::to_string(counts.resolved)},
                 {"unresolved", std::to_string(counts.unresolved)},
                 {"regions", std::to_string(counts.regions.size())},
                 {"ambiguous_names", std::to_string(tied_names.size())}});
}

void report_hashtags(const Context& ctx) {
  write_report(ctx, files::kHashtags, preprocess::hashtag_report(ingested_posts(ctx)));
}

void report_emojis(const Context& ctx) {
  write_report(ctx, files::kEmojis, preprocess::emoji_report(ingested_posts(ctx)));
}

void clean(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto ingested = read_ingested(ctx);
  auto cc = load_clean_config(cfg);

  std::set<std::string> whitelist;
  if (!cfg.paths.emoji_polarity.empty()) {
    std::vector<corpus::RawPost> posts;
    for (const auto& ip : ingested) posts.push_back(ip.post);
    whitelist = preprocess::select_emoji_whitelist(posts, preprocess::load_polarity_map(cfg.paths.emoji_polarity),
                                                   cfg.emoji_min_share);
  }
  cc.emoji_whitelist.insert(whitelist.begin(), whitelist.end());
  {
    auto wl = open_out(ctx, files::kEmojiWhitelist);
    for (const auto& e : whitelist) wl << e << '\n';
  }
  preprocess::Cleaner cleaner(std::move(cc));

  std::size_t accepted = 0, too_short = 0, misspelled = 0, kept_emojis = 0;
  preprocess::RemovalCounts totals;
  auto out = open_out(ctx, files::kClean);
  for (const auto& ip : ingested) {
    auto cp = cleaner.clean(ip.post.id, ctx.transform(ip.post.text));
    if (!cp.rejected) {
      ++accepted;
    } else if (*cp.rejected == preprocess::RejectReason::TooShort) {
      ++too_short;
    } else {
      ++misspelled;
    }
    kept_emojis += cp.kept_emojis.size();
    totals.links += cp.removed.links;
    totals.mentions += cp.removed.mentions;
    totals.hashtags += cp.removed.hashtags;
    totals.emojis_dropped += cp.removed.emojis_dropped;
    totals.nonword += cp.removed.nonword;
    totals.stopwords += cp.removed.stopwords;
    ordered_json obj;
    obj["id"] = cp.id;
    obj["region"] = ip.region ? ordered_json(*ip.region) : nullptr;
    obj["timestamp"] = ip.post.timestamp ? ordered_json(format_rfc3339(*ip.post.timestamp)) : nullptr;
    obj["tokens"] = cp.tokens;
    obj["emojis"] = cp.kept_emojis;
    obj["rejected"] = cp.rejected ? ordered_json(std::string(preprocess::to_string(*cp.rejected))) : nullptr;
    out << obj.dump() << '\n';
  }
  write_metrics(ctx, files::kCleanSummary,
                {{"posts", std::to_string(ingested.size())},
                 {"accepted", std::to_string(accepted)},
                 {"rejected_too_short", std::to_string(too_short)},
                 {"rejected_misspelled", std::to_string(misspelled)},
                 {"links_removed", std::to_string(totals.links)},
                 {"mentions_removed", std::to_string(totals.mentions)},
                 {"hashtags_removed", std::to_string(totals.hashtags)},
                 {"emojis_kept", std::to_string(kept_emojis)},
                 {"emojis_dropped", std::to_string(totals.emojis_dropped)},
                 {"nonword_chars_removed", std::to_string(totals.nonword)},
                 {"stopwords_removed", std::to_string(totals.stopwords)},
                 {"emoji_whitelist_size", std::to_string(whitelist.size())}});
}

void train(const Context& ctx) {
  using sentiment::Label;
  const auto& cfg = ctx.config;
  auto records = sentiment::load_training_data(require_path(cfg.paths.training, "training"));

  // Training texts are normalized like posts but never rejected: the gates
  // filter the study corpus, not the annotated data.
  auto cc = load_clean_config(cfg);
  cc.steps.short_posts = false;
  cc.steps.misspellings = false;
  auto whitelist = read_whitelist(ctx);
  cc.emoji_whitelist.insert(whitelist.begin(), whitelist.end());
  preprocess::Cleaner cleaner(std::move(cc));

  std::vector<sentiment::LabeledExample> labeled;
  std::vector<std::vector<std::string>> pool;
  std::size_t empty = 0;
  for (const auto& rec : records) {
    auto cp = cleaner.clean(rec.id, ctx.transform(rec.text));
    std::vector<std::string> features = cp.tokens;
    features.insert(features.end(), cp.kept_emojis.begin(), cp.kept_emojis.end());
    if (features.empty()) {
      ++empty;
      continue;
    }
    if (cfg.classifier.binary && rec.label == Label::Neutral) {
      pool.push_back(std::move(features));
    } else {
      labeled.push_back({std::move(features), rec.label, 1.0});
    }
  }
  if (empty) ctx.warn("training: " + std::to_string(empty) + " examples had no tokens after cleaning");

  auto split = sentiment::holdout_split(labeled.size(), cfg.classifier.train_fraction, cfg.seed);
  std::vector<sentiment::LabeledExample> train_set, test_set;
  for (auto i : split.train) train_set.push_back(labeled[i]);
  for (auto i : split.test) test_set.push_back(labeled[i]);

  std::vector<Label> required;
  if (cfg.classifier.binary) required = {Label::Negative, Label::Positive};

  struct Evaluated {
    std::string model, dataset;
    sentiment::EvalReport report;
  };
  std::vector<Evaluated> evals;
  auto evaluate_on = [&](const std::string& name, const sentiment::Model& m) {
    evals.push_back({name, "train", sentiment::evaluate(m, train_set)});
    if (!test_set.empty()) evals.push_back({name, "test", sentiment::evaluate(m, test_set)});
  };

  sentiment::Model final_model;
  std::size_t pseudo_count = 0;
  const bool use_pseudo = cfg.classifier.binary && cfg.classifier.pseudo_label && !pool.empty();
  if (use_pseudo) {
    auto result = sentiment::self_train(train_set, pool, cfg.classifier.train, cfg.classifier.pseudo);
    pseudo_count = result.pseudo_count;
    evaluate_on("base", result.base);
    evaluate_on("pseudo_labeled", result.final_model);
    final_model = std::move(result.final_model);
  } else {
    final_model = sentiment::train(train_set, cfg.classifier.train, required);
    evaluate_on("base", final_model);
  }
  sentiment::save_model(final_model, (ctx.out / files::kModel).string());

  auto ev = open_out(ctx, files::kEvaluation);
  csv::write_row(ev, {"model", "dataset", "n", "accuracy"});
  auto cm = open_out(ctx, files::kConfusion);
  csv::write_row(cm, {"model", "dataset", "true", "predicted", "count"});
  for (const auto& e : evals) {
    csv::write_row(ev, {e.model, e.dataset, std::to_string(e.report.size), csv::format_double(e.report.accuracy)});
    for (std::size_t t = 0; t < e.report.classes.size(); ++t) {
      for (std::size_t p = 0; p < e.report.classes.size(); ++p) {
        csv::write_row(cm, {e.model, e.dataset, std::string(sentiment::to_string(e.report.classes[t])),
                            std::string(sentiment::to_string(e.report.classes[p])),
                            std::to_string(e.report.confusion[t][p])});
      }
    }
  }
  write_metrics(ctx, files::kTrainSummary,
                {{"kind", std::string(sentiment::to_string(final_model.kind))},
                 {"labeled", std::to_string(labeled.size())},
                 {"train", std::to_string(train_set.size())},
                 {"test", std::to_string(test_set.size())},
                 {"neutral_pool", std::to_string(pool.size())},
                 {"pseudo_labeled", std::to_string(pseudo_count)},
                 {"vocabulary", std::to_string(final_model.num_features())}});
}

void classify(const Context& ctx) {
  auto model = sentiment::load_model((ctx.out / files::kModel).string());
  sentiment::PredictionMap predictions;
  std::size_t fallback = 0;
  std::map<sentiment::Label, std::size_t> by_label;
  for (const auto& r : read_clean(ctx)) {
    if (!r.accepted) continue;
    auto pred = sentiment::predict(model, r.features);
    if (pred.fallback) {
      ++fallback;
      continue;
    }
    predictions[r.id] = pred.label;
    ++by_label[pred.label];
  }
  auto out = open_out(ctx, files::kPredictions);
  sentiment::write_predictions(out, predictions);
  write_metrics(ctx, files::kClassifySummary,
                {{"classified", std::to_string(predictions.size())},
                 {"undecidable", std::to_string(fallback)},
                 {"negative", std::to_string(by_label[sentiment::Label::Negative])},
                 {"neutral", std::to_string(by_label[sentiment::Label::Neutral])},
                 {"positive", std::to_string(by_label[sentiment::Label::Positive])}});
}

void import_predictions(const Context& ctx, const std::string& path) {
  std::vector<std::string> known;
  for (const auto& r : read_clean(ctx)) {
    if (r.accepted) known.push_back(r.id);
  }
  auto report = sentiment::import_external_predictions(path, known);
  if (report.unknown_ids) {
    ctx.warn("import-predictions: rejected " + std::to_string(report.unknown_ids) + " unknown ids");
  }
  auto out = open_out(ctx, files::kPredictions);
  sentiment::write_predictions(out, report.predictions);
  std::map<sentiment::Label, std::size_t> by_label;
  for (const auto& [id, l] : report.predictions) ++by_label[l];
  write_metrics(ctx, files::kImportSummary,
                {{"imported", std::to_string(report.predictions.size())},
                 {"unknown_ids", std::to_string(report.unknown_ids)}});
  write_metrics(ctx, files::kClassifySummary,
                {{"classified", std::to_string(report.predictions.size())},
                 {"undecidable", "0"},
                 {"negative", std::to_string(by_label[sentiment::Label::Negative])},
                 {"neutral", std::to_string(by_label[sentiment::Label::Neutral])},
                 {"positive", std::to_string(by_label[sentiment::Label::Positive])}});
}

void aggregate(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto predictions = read_predictions(ctx);
  std::vector<regional::ClassifiedPost> posts;
  for (const auto& r : read_clean(ctx)) {
    auto it = predictions.find(r.id);
    if (it == predictions.end()) continue;
    posts.push_back({r.region, r.timestamp, it->second});
  }
  auto report = regional::aggregate(posts, {cfg.event_date, cfg.min_region_posts, cfg.event_day});
  auto out = open_out(ctx, files::kRegionSentiment);
  regional::write_region_csv(out, report.regions);
  auto included = std::count_if(report.regions.begin(), report.regions.end(),
                                [](const auto& r) { return r.included; });
  write_metrics(ctx, files::kAggregateSummary,
                {{"posts", std::to_string(posts.size())},
                 {"without_region", std::to_string(report.without_region)},
                 {"without_timestamp", std::to_string(report.without_timestamp)},
                 {"neutral_skipped", std::to_string(report.neutral)},
                 {"regions", std::to_string(report.regions.size())},
                 {"included_regions", std::to_string(included)},
                 {"threshold", std::to_string(cfg.min_region_posts)},
                 {"event_date", format_date(cfg.event_date)}});
}

void shift_test(const Context& ctx) {
  const double alpha = ctx.config.alpha;
  auto in = open_in(ctx, files::kRegionSentiment, "aggregate");
  auto regions = regional::read_region_csv(in, files::kRegionSentiment);

  std::vector<regional::ShiftTestResult> per_region;
  for (const auto& r : regions) {
    if (r.included) per_region.push_back(regional::shift_test(r, alpha));
  }
  auto global = regional::shift_test(regional::pooled_table(regions), "global", alpha);

  {
    auto out = open_out(ctx, files::kRegions);
    regional::write_region_csv(out, regions, per_region);
  }
  auto tests = open_out(ctx, files::kShiftTests);
  csv::write_row(tests, {"scope", "chi2", "df", "p_value", "significant", "degenerate"});
  auto row = [&](const regional::ShiftTestResult& t) {
    csv::write_row(tests, {t.scope, csv::format_double(t.chi2), std::to_string(t.df), csv::format_double(t.p_value),
                           t.significant() ? "true" : "false", t.degenerate ? "true" : "false"});
  };
  row(global);
  for (const auto& t : per_region) row(t);

  auto summary = regional::shift_summary(per_region, alpha);
  Metrics metrics{{"alpha", csv::format_double(alpha)},
                  {"global_chi2", csv::format_double(global.chi2)},
                  {"global_p", csv::format_double(global.p_value)},
                  {"regions_tested", std::to_string(summary.tested)},
                  {"regions_significant", std::to_string(summary.significant())}};
  std::string ids;
  for (const auto& id : summary.significant_regions) ids += (ids.empty() ? "" : ";") + id;
  metrics.emplace_back("significant_regions", ids);

  std::size_t included = per_region.size();
  if (included >= 2) {
    try {
      auto fit = regional::shift_regression(regions);
      stats::NamedFit named[] = {{"Shift regression", &fit}};
      auto coef = open_out(ctx, files::kShiftRegression);
      stats::write_coefficients_csv(coef, named);
      auto text = open_out(ctx, files::kShiftRegressionText);
      text << stats::format_table(named);
      metrics.emplace_back("flag_coefficient", csv::format_double(fit.beta(1)));
      metrics.emplace_back("flag_p", csv::format_double(fit.p(1)));
    } catch (const NumericalError& e) {
      ctx.warn(std::string("shift regression skipped: ") + e.what());
    }
  } else {
    ctx.warn("shift regression skipped: fewer than two included regions");
  }
  write_metrics(ctx, files::kShiftSummary, metrics);
}

stats::DesignMatrix build_design(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto table = corpus::load_region_table(require_path(cfg.paths.region_table, "region_table"));
  const bool table_has_sentiment =
      std::find(table.feature_names.begin(), table.feature_names.end(), "sentiment") != table.feature_names.end();

  std::vector<std::string> features = cfg.regression.features;
  if (features.empty()) {
    if (!table_has_sentiment) features.push_back("sentiment");
    features.insert(features.end(), table.feature_names.begin(), table.feature_names.end());
  }
  const bool wants_sentiment = std::find(features.begin(), features.end(), "sentiment") != features.end();

  std::map<std::string, double> sentiment_by_region;
  if (wants_sentiment && !table_has_sentiment) {
    auto in = open_in(ctx, files::kRegionSentiment, "aggregate");
    for (const auto& r : regional::read_region_csv(in, files::kRegionSentiment)) {
      if (r.included) sentiment_by_region[r.region_id] = r.mean_sentiment;
    }
  }
  for (const auto& f : features) {
    if (f == "sentiment" && !table_has_sentiment) continue;
    if (std::find(table.feature_names.begin(), table.feature_names.end(), f) == table.feature_names.end()) {
      throw UsageError("regression feature '" + f + "' is not a region table column");
    }
  }

  std::vector<std::vector<double>> columns(features.size());
  std::vector<double> y;
  std::size_t dropped = 0;
  for (const auto& row : table.rows) {
    std::vector<double> values;
    bool complete = true;
    for (const auto& f : features) {
      if (f == "sentiment" && !table_has_sentiment) {
        auto it = sentiment_by_region.find(row.region_id);
        if (it == sentiment_by_region.end()) {
          complete = false;
          break;
        }
        values.push_back(it->second);
      } else {
        values.push_back(row.features.at(f));
      }
    }
    if (!complete) {
      ++dropped;
      continue;
    }
    for (std::size_t j = 0; j < values.size(); ++j) columns[j].push_back(values[j]);
    y.push_back(row.outcome);
  }
  if (dropped) ctx.warn("regression: " + std::to_string(dropped) + " regions lack an included sentiment value");

  auto design = stats::DesignMatrix::from_columns(features, columns, y);
  {
    auto out = open_out(ctx, files::kDesign);
    csv::Row header{"outcome"};
    header.insert(header.end(), features.begin(), features.end());
    csv::write_row(out, header);
    for (Eigen::Index i = 0; i < design.x.rows(); ++i) {
      csv::Row r{csv::format_double(design.y(i))};
      for (Eigen::Index j = 1; j < design.x.cols(); ++j) r.push_back(csv::format_double(design.x(i, j)));
      csv::write_row(out, r);
    }
  }
  if (cfg.regression.standardize) return stats::standardize(design).design;
  return design;
}

void regress(const Context& ctx) {
  auto fit = stats::ols(build_design(ctx));
  stats::NamedFit named[] = {{"General model", &fit}};
  auto coef = open_out(ctx, files::kRegression);
  stats::write_coefficients_csv(coef, named);
  auto st = open_out(ctx, files::kRegressionStats);
  stats::write_fit_stats_csv(st, named);
  auto text = open_out(ctx, files::kRegressionText);
  text << stats::format_table(named);
}

void stepwise(const Context& ctx) {
  const auto& cfg = ctx.config;
  auto design = build_design(ctx);
  auto general = stats::ols(design);
  auto result = stats::stepwise(design, cfg.regression.direction, cfg.regression.start);
  stats::NamedFit named[] = {{"General model", &general}, {"Best AIC", &result.fit}};
  auto coef = open_out(ctx, files::kStepwise);
  stats::write_coefficients_csv(coef, named);
  auto st = open_out(ctx, files::kStepwiseStats);
  stats::write_fit_stats_csv(st, named);
  auto trace = open_out(ctx, files::kStepwiseTrace);
  csv::write_row(trace, {"step", "action", "name", "aic"});
  csv::write_row(trace, {"0", "start", "", csv::format_double(result.initial_aic)});
  for (const auto& s : result.trace) {
    csv::write_row(trace, {std::to_string(s.step), std::string(stats::to_string(s.action)), s.name,
                           csv::format_double(s.aic)});
  }
  auto text = open_out(ctx, files::kStepwiseText);
  text << stats::format_table(named);
}

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<csv::Table> maybe_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return csv::read_stream(in);
}

std::string metric_table(const std::map<std::string, std::string>& metrics, std::initializer_list<const char*> keys) {
  std::string out = "| Metric | Value |\n|---|---|\n";
  for (const char* k : keys) {
    auto it = metrics.find(k);
    if (it != metrics.end()) out += fmt::format("| {} | {} |\n", k, it->second);
  }
  return out;
}

}  // namespace

void write_summary(const Context& ctx) {
  const auto& dir = ctx.out;
  std::string md = "# Regional sentiment and vote share report\n\n";

  auto ingest_m = read_metrics(dir / files::kIngestSummary);
  if (!ingest_m.empty()) {
    md += "## Corpus\n\n";
    md += metric_table(ingest_m, {"loaded", "skipped", "located", "resolved", "unresolved", "regions",
                                  "ambiguous_names"});
    md += '\n';
  }

  if (auto t = maybe_table(dir / files::kHashtags)) {
    md += "## Most frequent hashtags\n\n| Position | Hashtag | Occurrences | % of hashtags |\n|---|---|---|---|\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(10, t->rows.size()); ++i) {
      const auto& r = t->rows[i];
      md += fmt::format("| {} | {} | {} | {} |\n", i + 1, r[0], r[1], pct(csv::to_double(r[2]).value_or(0)));
    }
    md += '\n';
  }

  if (auto t = maybe_table(dir / files::kEmojis)) {
    std::set<std::string> whitelist;
    std::ifstream wl(dir / files::kEmojiWhitelist, std::ios::binary);
    for (std::string line; std::getline(wl, line);) {
      if (!line.empty()) whitelist.insert(line);
    }
    md += "## Most frequent emojis\n\n| Position | Emoji | % of emojis | Kept |\n|---|---|---|---|\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(20, t->rows.size()); ++i) {
      const auto& r = t->rows[i];
      md += fmt::format("| {} | {} | {} | {} |\n", i + 1, r[0], pct(csv::to_double(r[2]).value_or(0)),
                        whitelist.count(r[0]) ? "yes" : "no");
    }
    md += '\n';
  }

  auto clean_m = read_metrics(dir / files::kCleanSummary);
  if (!clean_m.empty()) {
    md += "## Preprocessing\n\n";
    md += metric_table(clean_m, {"posts", "accepted", "rejected_too_short", "rejected_misspelled", "links_removed",
                                 "mentions_removed", "hashtags_removed", "emojis_kept", "emojis_dropped",
                                 "nonword_chars_removed", "stopwords_removed", "emoji_whitelist_size"});
    md += '\n';
  }

  if (auto t = maybe_table(dir / files::kEvaluation)) {
    md += "## Sentiment classifier\n\n| Model | Dataset | N | Accuracy (%) |\n|---|---|---|---|\n";
    for (const auto& r : t->rows) {
      md += fmt::format("| {} | {} | {} | {:.1f} |\n", r[0], r[1], r[2], 100.0 * csv::to_double(r[3]).value_or(0));
    }
    md += '\n';
  }

  auto cls = read_metrics(dir / files::kClassifySummary);
  if (!cls.empty()) {
    md += "## Sentiment distribution\n\n";
    md += metric_table(cls, {"classified", "undecidable", "negative", "neutral", "positive"});
    md += '\n';
  }

  auto agg = read_metrics(dir / files::kAggregateSummary);
  auto shift = read_metrics(dir / files::kShiftSummary);
  if (auto t = maybe_table(dir / files::kRegions)) {
    md += "## Regions\n\n";
    md += metric_table(agg, {"posts", "without_region", "without_timestamp", "neutral_skipped", "regions",
                             "included_regions", "threshold", "event_date"});
    md += "\n| Region | Posts | Mean sentiment | Before (+/-) | After (+/-) | chi2 | p |\n"
          "|---|---|---|---|---|---|---|\n";
    for (const auto& r : t->rows) {
      if (r[6] != "true") continue;
      std::size_t total = 0;
      for (int c = 1; c <= 4; ++c) total += static_cast<std::size_t>(csv::to_int64(r[c]).value_or(0));
      md += fmt::format("| {} | {} | {:.4f} | {}/{} | {}/{} | {:.3f} | {:.3f} |\n", r[0], total,
                        csv::to_double(r[5]).value_or(0), r[1], r[2], r[3], r[4],
                        csv::to_double(r[7]).value_or(0), csv::to_double(r[8]).value_or(1));
    }
    md += '\n';
  }
  if (!shift.empty()) {
    md += "## Sentiment before and after the event\n\n";
    md += fmt::format("Global test: X^2(1) = {:.3f}, p = {:.3f}.\n\n",
                      csv::to_double(shift["global_chi2"]).value_or(0), csv::to_double(shift["global_p"]).value_or(1));
    md += fmt::format("Per-region tests significant at alpha = {}: {} of {}.\n\n", shift["alpha"],
                      shift["regions_significant"], shift["regions_tested"]);
    auto text = slurp(dir / files::kShiftRegressionText);
    if (!text.empty()) md += "```\n" + text + "```\n\n";
  }

  auto stepwise_text = slurp(dir / files::kStepwiseText);
  auto regression_text = slurp(dir / files::kRegressionText);
  if (!stepwise_text.empty() || !regression_text.empty()) {
    md += "## Vote share regression\n\n";
    md += "```\n" + (stepwise_text.empty() ? regression_text : stepwise_text) + "```\n\n";
    if (auto t = maybe_table(dir / files::kStepwiseTrace)) {
      md += "| Step | Action | Predictor | AIC |\n|---|---|---|---|\n";
      for (const auto& r : t->rows) {
        md += fmt::format("| {} | {} | {} | {:.2f} |\n", r[0], r[1], r[2], csv::to_double(r[3]).value_or(0));
      }
      md += '\n';
    }
  }

  auto out = open_out(ctx, files::kSummary);
  out << md;
}

void run_all(const Context& ctx) {
  ingest(ctx);
  report_hashtags(ctx);
  report_emojis(ctx);
  clean(ctx);
  train(ctx);
  classify(ctx);
  aggregate(ctx);
  shift_test(ctx);
  regress(ctx);
  stepwise(ctx);
  write_summary(ctx);
}

}  // namespace geosent::pipeline
