#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geosent::sentiment {

enum class Label { Negative, Neutral, Positive };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);
// Negative -> 0, Positive -> 1. Throws DataError for Neutral.
int binary_value(Label label);

struct LabeledExample {
  std::vector<std::string> tokens;
  Label label = Label::Neutral;
  double weight = 1.0;

  bool operator==(const LabeledExample&) const = default;
};

enum class ModelKind { NaiveBayes, Logistic };
std::string_view to_string(ModelKind kind);

struct NaiveBayesParams {
  double smoothing = 1.0;  // additive (Laplace) pseudo-count
};

struct LogisticParams {
  double learning_rate = 0.1;
  int epochs = 300;
  double l2 = 1e-4;

  bool operator==(const LogisticParams&) const = default;
};

struct TrainParams {
  ModelKind kind = ModelKind::NaiveBayes;
  NaiveBayesParams nb;
  LogisticParams logistic;
};

struct Model {
  ModelKind kind = ModelKind::NaiveBayes;
  std::vector<Label> classes;              // ascending enum order
  std::map<std::string, int> vocabulary;   // word -> feature index
  std::vector<double> log_priors;          // per class
  // Naive Bayes: log P(word | class). Logistic: softmax weights.
  // Row-major, classes.size() x vocabulary.size().
  std::vector<double> weights;
  std::vector<double> bias;                // logistic only, per class
  double smoothing = 0.0;
  LogisticParams logistic;

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::size_t num_features() const noexcept { return vocabulary.size(); }
  double weight(std::size_t cls, std::size_t feature) const {
    return weights[cls * vocabulary.size() + feature];
  }

  bool operator==(const Model&) const = default;
};

// Every class label present in `required` must occur in the data (DataError
// naming the class otherwise). With `required` empty the classes are those
// observed, and at least two are needed.
Model train(std::span<const LabeledExample> data, const TrainParams& params,
            std::span<const Label> required = {});

struct Prediction {
  Label label = Label::Neutral;
  std::vector<double> scores;  // aligned with Model::classes, sums to 1
  bool fallback = false;       // no in-vocabulary token; prior argmax used
};

Prediction predict(const Model& model, std::span<const std::string> tokens);

struct EvalReport {
  std::vector<Label> classes;
  std::vector<std::vector<std::size_t>> confusion;  // rows = true, cols = predicted
  double accuracy = 0.0;
  std::size_t size = 0;
};

// Throws DataError if a true label is not one of the model's classes.
EvalReport evaluate(const Model& model, std::span<const LabeledExample> data);

struct PseudoLabelOptions {
  double fraction = 1.0;                   // share of the pool that is labeled
  std::optional<double> min_confidence;    // off unless set
  std::uint64_t seed = 0;                  // picks the subset when fraction < 1
};

// Positive/Negative predictions on the pool become new examples carrying the
// predicted label; Neutral predictions and fallbacks are excluded.
std::vector<LabeledExample> pseudo_label(const Model& model,
                                         std::span<const std::vector<std::string>> pool,
                                         const PseudoLabelOptions& options = {});

// The original examples followed by the pseudo-labeled ones.
std::vector<LabeledExample> augment(std::span<const LabeledExample> labeled,
                                    std::span<const LabeledExample> pseudo);

struct SelfTrainingResult {
  Model base;
  Model final_model;
  std::vector<LabeledExample> augmented;
  std::size_t pseudo_count = 0;
};

// Train on `labeled`, pseudo-label `pool`, retrain on the union.
SelfTrainingResult self_train(std::span<const LabeledExample> labeled,
                              std::span<const std::vector<std::string>> pool,
                              const TrainParams& params, const PseudoLabelOptions& options = {});

// Seeded Fisher-Yates permutation of 0..n-1 (platform independent).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split holdout_split(std::size_t n, double train_fraction, std::uint64_t seed);

// Logistic training objective: mean weighted cross-entropy plus (l2/2)*|W|^2
// (biases unpenalized). Parameters are laid out as weights then biases.
struct LogisticProblem {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  // Sparse rows of (feature, value).
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::vector<std::size_t> targets;
  std::vector<double> weights;
  double l2 = 0.0;

  std::size_t num_params() const noexcept { return num_classes * (num_features + 1); }
  double objective(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;
};

// Model persistence: versioned JSON, exact double round-trip.
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

using PredictionMap = std::map<std::string, Label>;

struct ImportReport {
  PredictionMap predictions;
  std::size_t unknown_ids = 0;  // ids not in the known set, rejected
};

// CSV `id,label`. An unrecognized label throws DataError citing the line.
// When `known_ids` is given, rows with other ids are dropped and counted.
ImportReport import_external_predictions(const std::string& path,
                                         const std::optional<std::vector<std::string>>& known_ids = std::nullopt);
ImportReport read_external_predictions(std::istream& in, std::string_view source,
                                       const std::optional<std::vector<std::string>>& known_ids = std::nullopt);
void write_predictions(std::ostream& out, const PredictionMap& predictions);

// Training data CSV `id,label,text`.
struct TrainingRecord {
  std::string id;
  Label label;
  std::string text;
};
std::vector<TrainingRecord> load_training_data(const std::string& path);

// Where machine translation would plug in. Defaults to identity.
using TextTransform = std::function<std::string(std::string_view)>;
TextTransform identity_transform();

}  // namespace geosent::sentiment
