#include "geosent/sentiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <numeric>
#include <random>
#include <set>

#include "geosent/csv.hpp"
#include "geosent/error.hpp"
#include "geosent/unicode.hpp"

namespace geosent::sentiment {
namespace {

constexpr int kModelVersion = 1;
constexpr const char* kModelFormat = "geosent-sentiment-model";

std::size_t class_index(const std::vector<Label>& classes, Label label) {
  auto it = std::find(classes.begin(), classes.end(), label);
  return it == classes.end() ? classes.size() : static_cast<std::size_t>(it - classes.begin());
}

// In-place softmax of log-scores.
void normalize_log_scores(std::vector<double>& scores) {
  double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (auto& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (auto& s : scores) s /= sum;
}

std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<std::pair<int, double>> featurize(const std::map<std::string, int>& vocabulary,
                                              std::span<const std::string> tokens) {
  std::map<int, double> counts;
  for (const auto& t : tokens) {
    auto it = vocabulary.find(t);
    if (it != vocabulary.end()) counts[it->second] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

void train_naive_bayes(Model& model, std::span<const LabeledExample> data, double smoothing) {
  if (!(smoothing > 0.0)) throw UsageError("naive Bayes smoothing must be positive");
  const std::size_t k = model.num_classes(), v = model.num_features();
  std::vector<double> counts(k * v, 0.0), totals(k, 0.0);
  for (const auto& ex : data) {
    std::size_t c = class_index(model.classes, ex.label);
    for (const auto& t : ex.tokens) {
      counts[c * v + static_cast<std::size_t>(model.vocabulary.at(t))] += ex.weight;
      totals[c] += ex.weight;
    }
  }
  model.smoothing = smoothing;
  model.weights.resize(k * v);
  for (std::size_t c = 0; c < k; ++c) {
    double denom = totals[c] + smoothing * static_cast<double>(v);
    for (std::size_t f = 0; f < v; ++f) {
      model.weights[c * v + f] = std::log((counts[c * v + f] + smoothing) / denom);
    }
  }
}

void train_logistic(Model& model, std::span<const LabeledExample> data, const LogisticParams& p) {
  if (!(p.learning_rate > 0.0) || p.epochs < 0 || !(p.l2 >= 0.0)) {
    throw UsageError("logistic settings need learning_rate > 0, epochs >= 0, l2 >= 0");
  }
  LogisticProblem problem;
  problem.num_classes = model.num_classes();
  problem.num_features = model.num_features();
  problem.l2 = p.l2;
  for (const auto& ex : data) {
    problem.rows.push_back(featurize(model.vocabulary, ex.tokens));
    problem.targets.push_back(class_index(model.classes, ex.label));
    problem.weights.push_back(ex.weight);
  }
  std::vector<double> params(problem.num_params(), 0.0);
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    auto grad = problem.gradient(params);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= p.learning_rate * grad[i];
  }
  const std::size_t nw = problem.num_classes * problem.num_features;
  model.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(nw));
  model.bias.assign(params.begin() + static_cast<std::ptrdiff_t>(nw), params.end());
  model.logistic = p;
  for (double w : params) {
    if (!std::isfinite(w)) throw NumericalError("logistic training diverged; lower the learning rate");
  }
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Negative: return "negative";
    case Label::Neutral: return "neutral";
    case Label::Positive: return "positive";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  std::string t = unicode::fold(unicode::trim(text));
  if (t == "negative") return Label::Negative;
  if (t == "neutral") return Label::Neutral;
  if (t == "positive") return Label::Positive;
  return std::nullopt;
}

int binary_value(Label label) {
  if (label == Label::Neutral) throw DataError("neutral label has no binary encoding");
  return label == Label::Positive ? 1 : 0;
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::NaiveBayes ? "naive_bayes" : "logistic";
}

double LogisticProblem::objective(std::span<const double> params) const {
  const std::size_t nw = num_classes * num_features;
  double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  double loss = 0.0;
  std::vector<double> z(num_classes);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      double s = params[nw + c];
      for (auto [f, x] : rows[i]) s += params[c * num_features + static_cast<std::size_t>(f)] * x;
      z[c] = s;
    }
    double top = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double s : z) lse += std::exp(s - top);
    lse = top + std::log(lse);
    loss += weights[i] * (lse - z[targets[i]]);
  }
  double penalty = 0.0;
  for (std::size_t j = 0; j < nw; ++j) penalty += params[j] * params[j];
  return loss / total_weight + 0.5 * l2 * penalty;
}

std::vector<double> LogisticProblem::gradient(std::span<const double> params) const {
  const std::size_t nw = num_classes * num_features;
  double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> grad(num_params(), 0.0);
  std::vector<double> z(num_classes);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      double s = params[nw + c];
      for (auto [f, x] : rows[i]) s += params[c * num_features + static_cast<std::size_t>(f)] * x;
      z[c] = s;
    }
    normalize_log_scores(z);
    double w = weights[i] / total_weight;
    for (std::size_t c = 0; c < num_classes; ++c) {
      double diff = w * (z[c] - (c == targets[i] ? 1.0 : 0.0));
      grad[nw + c] += diff;
      for (auto [f, x] : rows[i]) grad[c * num_features + static_cast<std::size_t>(f)] += diff * x;
    }
  }
  for (std::size_t j = 0; j < nw; ++j) grad[j] += l2 * params[j];
  return grad;
}

Model train(std::span<const LabeledExample> data, const TrainParams& params,
            std::span<const Label> required) {
  std::set<Label> observed;
  double total_weight = 0.0;
  for (const auto& ex : data) {
    if (!(ex.weight > 0.0) || !std::isfinite(ex.weight)) {
      throw DataError("training example weights must be positive");
    }
    observed.insert(ex.label);
    total_weight += ex.weight;
  }
  std::set<Label> classes(required.begin(), required.end());
  if (classes.empty()) {
    classes = observed;
  } else {
    for (Label l : observed) {
      if (!classes.count(l)) {
        throw DataError("training data contains unexpected class '" + std::string(to_string(l)) + "'");
      }
    }
  }
  for (Label l : classes) {
    if (!observed.count(l)) {
      throw DataError("class '" + std::string(to_string(l)) + "' is absent from the training data");
    }
  }
  if (classes.size() < 2) throw DataError("training data needs at least two classes");

  Model model;
  model.kind = params.kind;
  model.classes.assign(classes.begin(), classes.end());
  for (const auto& ex : data) {
    for (const auto& t : ex.tokens) model.vocabulary.emplace(t, 0);
  }
  int next = 0;
  for (auto& [word, idx] : model.vocabulary) idx = next++;

  std::vector<double> class_weight(model.num_classes(), 0.0);
  for (const auto& ex : data) class_weight[class_index(model.classes, ex.label)] += ex.weight;
  for (double w : class_weight) model.log_priors.push_back(std::log(w / total_weight));

  if (params.kind == ModelKind::NaiveBayes) {
    train_naive_bayes(model, data, params.nb.smoothing);
  } else {
    train_logistic(model, data, params.logistic);
  }
  return model;
}

Prediction predict(const Model& model, std::span<const std::string> tokens) {
  Prediction out;
  auto features = featurize(model.vocabulary, tokens);
  const std::size_t k = model.num_classes();
  std::vector<double> scores(model.log_priors);
  if (features.empty()) {
    out.fallback = true;
  } else if (model.kind == ModelKind::NaiveBayes) {
    for (std::size_t c = 0; c < k; ++c) {
      for (auto [f, x] : features) scores[c] += x * model.weight(c, static_cast<std::size_t>(f));
    }
  } else {
    for (std::size_t c = 0; c < k; ++c) {
      double z = model.bias[c];
      for (auto [f, x] : features) z += x * model.weight(c, static_cast<std::size_t>(f));
      scores[c] = z;
    }
  }
  normalize_log_scores(scores);
  out.label = model.classes[argmax(scores)];
  out.scores = std::move(scores);
  return out;
}

EvalReport evaluate(const Model& model, std::span<const LabeledExample> data) {
  EvalReport report;
  report.classes = model.classes;
  const std::size_t k = model.num_classes();
  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (const auto& ex : data) {
    std::size_t truth = class_index(model.classes, ex.label);
    if (truth == k) {
      throw DataError("evaluation label '" + std::string(to_string(ex.label)) +
                      "' is not a model class");
    }
    std::size_t guess = class_index(model.classes, predict(model, ex.tokens).label);
    ++report.confusion[truth][guess];
    if (truth == guess) ++correct;
  }
  report.size = data.size();
  report.accuracy = data.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
  return report;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

Split holdout_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw UsageError("train fraction must be in (0, 1]");
  }
  auto perm = shuffled_indices(n, seed);
  auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Split s;
  s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(cut), perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<LabeledExample> pseudo_label(const Model& model,
                                         std::span<const std::vector<std::string>> pool,
                                         const PseudoLabelOptions& options) {
  if (class_index(model.classes, Label::Positive) == model.num_classes() ||
      class_index(model.classes, Label::Negative) == model.num_classes()) {
    throw DataError("pseudo-labeling needs a model with positive and negative classes");
  }
  if (!(options.fraction >= 0.0 && options.fraction <= 1.0)) {
    throw UsageError("pseudo-label fraction must be in [0, 1]");
  }
  std::vector<std::size_t> chosen;
  if (options.fraction >= 1.0) {
    chosen.resize(pool.size());
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  } else {
    auto perm = shuffled_indices(pool.size(), options.seed);
    auto m = static_cast<std::size_t>(std::llround(options.fraction * static_cast<double>(pool.size())));
    chosen.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<LabeledExample> out;
  for (std::size_t i : chosen) {
    auto pred = predict(model, pool[i]);
    if (pred.fallback || pred.label == Label::Neutral) continue;
    if (options.min_confidence &&
        *std::max_element(pred.scores.begin(), pred.scores.end()) < *options.min_confidence) {
      continue;
    }
    out.push_back({pool[i], pred.label, 1.0});
  }
  return out;
}

std::vector<LabeledExample> augment(std::span<const LabeledExample> labeled,
                                    std::span<const LabeledExample> pseudo) {
  std::vector<LabeledExample> out(labeled.begin(), labeled.end());
  out.insert(out.end(), pseudo.begin(), pseudo.end());
  return out;
}

SelfTrainingResult self_train(std::span<const LabeledExample> labeled,
                              std::span<const std::vector<std::string>> pool,
                              const TrainParams& params, const PseudoLabelOptions& options) {
  SelfTrainingResult result;
  result.base = train(labeled, params);
  auto pseudo = pseudo_label(result.base, pool, options);
  result.pseudo_count = pseudo.size();
  result.augmented = augment(labeled, pseudo);
  result.final_model = train(result.augmented, params, result.base.classes);
  return result;
}

void save_model(const Model& model, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  doc["kind"] = to_string(model.kind);
  auto& classes = doc["classes"] = nlohmann::ordered_json::array();
  for (Label l : model.classes) classes.push_back(to_string(l));
  std::vector<std::string> words(model.num_features());
  for (const auto& [w, i] : model.vocabulary) words[static_cast<std::size_t>(i)] = w;
  doc["vocabulary"] = words;
  doc["log_priors"] = model.log_priors;
  auto& rows = doc["weights"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < model.num_classes(); ++c) {
    auto first = model.weights.begin() + static_cast<std::ptrdiff_t>(c * model.num_features());
    rows.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(model.num_features())));
  }
  doc["bias"] = model.bias;
  doc["smoothing"] = model.smoothing;
  doc["logistic"] = {{"learning_rate", model.logistic.learning_rate},
                     {"epochs", model.logistic.epochs},
                     {"l2", model.logistic.l2}};
  out << doc.dump(1) << '\n';
}

Model load_model(std::istream& in) {
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw DataError("model file is not valid JSON");
  if (doc.value("format", "") != kModelFormat) throw DataError("not a sentiment model file");
  if (doc.value("version", 0) != kModelVersion) {
    throw DataError("unsupported model version " + doc.value("version", nlohmann::json()).dump());
  }
  try {
    Model m;
    auto kind = doc.at("kind").get<std::string>();
    if (kind == "naive_bayes") {
      m.kind = ModelKind::NaiveBayes;
    } else if (kind == "logistic") {
      m.kind = ModelKind::Logistic;
    } else {
      throw DataError("unknown model kind '" + kind + "'");
    }
    for (const auto& c : doc.at("classes")) {
      auto l = parse_label(c.get<std::string>());
      if (!l) throw DataError("unknown class in model file");
      m.classes.push_back(*l);
    }
    auto words = doc.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < words.size(); ++i) m.vocabulary[words[i]] = static_cast<int>(i);
    m.log_priors = doc.at("log_priors").get<std::vector<double>>();
    for (const auto& row : doc.at("weights")) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != words.size()) throw DataError("model weights do not match vocabulary");
      m.weights.insert(m.weights.end(), r.begin(), r.end());
    }
    m.bias = doc.at("bias").get<std::vector<double>>();
    m.smoothing = doc.at("smoothing").get<double>();
    const auto& lg = doc.at("logistic");
    m.logistic = {lg.at("learning_rate").get<double>(), lg.at("epochs").get<int>(), lg.at("l2").get<double>()};
    if (m.log_priors.size() != m.classes.size() || m.weights.size() != m.classes.size() * words.size() ||
        (m.kind == ModelKind::Logistic && m.bias.size() != m.classes.size())) {
      throw DataError("model file dimensions are inconsistent");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  save_model(model, out);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path);
  return load_model(in);
}

ImportReport read_external_predictions(std::istream& in, std::string_view source,
                                       const std::optional<std::vector<std::string>>& known_ids) {
  auto table = csv::read_stream(in);
  auto c_id = table.require_column("id", source);
  auto c_label = table.require_column("label", source);
  std::set<std::string> known;
  if (known_ids) known.insert(known_ids->begin(), known_ids->end());
  ImportReport report;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto where = std::string(source) + ":" + std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw DataError(where + ": wrong field count");
    auto label = parse_label(row[c_label]);
    if (!label) throw DataError(where + ": unknown label '" + row[c_label] + "'");
    const auto& id = row[c_id];
    if (id.empty()) throw DataError(where + ": empty id");
    if (known_ids && !known.count(id)) {
      ++report.unknown_ids;
      continue;
    }
    if (!report.predictions.emplace(id, *label).second) {
      throw DataError(where + ": duplicate id '" + id + "'");
    }
  }
  return report;
}

ImportReport import_external_predictions(const std::string& path,
                                         const std::optional<std::vector<std::string>>& known_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open predictions " + path);
  return read_external_predictions(in, path, known_ids);
}

void write_predictions(std::ostream& out, const PredictionMap& predictions) {
  csv::write_row(out, {"id", "label"});
  for (const auto& [id, label] : predictions) csv::write_row(out, {id, std::string(to_string(label))});
}

std::vector<TrainingRecord> load_training_data(const std::string& path) {
  auto table = csv::read_file(path);
  auto c_id = table.require_column("id", path);
  auto c_label = table.require_column("label", path);
  auto c_text = table.require_column("text", path);
  std::vector<TrainingRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto where = path + ":" + std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw DataError(where + ": wrong field count");
    auto label = parse_label(row[c_label]);
    if (!label) throw DataError(where + ": unknown label '" + row[c_label] + "'");
    out.push_back({row[c_id], *label, row[c_text]});
  }
  return out;
}

TextTransform identity_transform() {
  return [](std::string_view text) { return std::string(text); };
}

}  // namespace geosent::sentiment
