#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "geosent/config.hpp"
#include "geosent/sentiment.hpp"
#include "geosent/stats/ols.hpp"

namespace geosent::pipeline {

using Logger = std::function<void(std::string_view)>;

// Everything a stage needs. Stages read their inputs from `out` (as written by
// earlier stages) or from configured paths, and write plain CSV/JSONL there.
struct Context {
  PipelineConfig config;
  std::filesystem::path out;
  Logger warn = [](std::string_view) {};
  sentiment::TextTransform transform = sentiment::identity_transform();
};

// File names inside the output directory.
namespace files {
inline constexpr const char* kIngested = "ingested.jsonl";
inline constexpr const char* kRegionCounts = "region_counts.csv";
inline constexpr const char* kIngestSummary = "ingest_summary.csv";
inline constexpr const char* kHashtags = "hashtags.csv";
inline constexpr const char* kEmojis = "emojis.csv";
inline constexpr const char* kEmojiWhitelist = "emoji_whitelist.txt";
inline constexpr const char* kClean = "clean.jsonl";
inline constexpr const char* kCleanSummary = "clean_summary.csv";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kEvaluation = "evaluation.csv";
inline constexpr const char* kConfusion = "confusion.csv";
inline constexpr const char* kTrainSummary = "train_summary.csv";
inline constexpr const char* kPredictions = "predictions.csv";
inline constexpr const char* kClassifySummary = "classify_summary.csv";
inline constexpr const char* kImportSummary = "import_summary.csv";
inline constexpr const char* kRegionSentiment = "region_sentiment.csv";
inline constexpr const char* kAggregateSummary = "aggregate_summary.csv";
inline constexpr const char* kRegions = "regions.csv";
inline constexpr const char* kShiftTests = "shift_tests.csv";
inline constexpr const char* kShiftRegression = "shift_regression.csv";
inline constexpr const char* kShiftRegressionText = "shift_regression.txt";
inline constexpr const char* kShiftSummary = "shift_summary.csv";
inline constexpr const char* kDesign = "design.csv";
inline constexpr const char* kRegression = "regression_coefficients.csv";
inline constexpr const char* kRegressionStats = "regression_stats.csv";
inline constexpr const char* kRegressionText = "regression.txt";
inline constexpr const char* kStepwise = "stepwise_coefficients.csv";
inline constexpr const char* kStepwiseStats = "stepwise_stats.csv";
inline constexpr const char* kStepwiseTrace = "stepwise_trace.csv";
inline constexpr const char* kStepwiseText = "stepwise.txt";
inline constexpr const char* kSummary = "summary.md";
}  // namespace files

void ingest(const Context& ctx);
void report_hashtags(const Context& ctx);
void report_emojis(const Context& ctx);
void clean(const Context& ctx);
void train(const Context& ctx);
void classify(const Context& ctx);
void import_predictions(const Context& ctx, const std::string& path);
void aggregate(const Context& ctx);
void shift_test(const Context& ctx);
void regress(const Context& ctx);
void stepwise(const Context& ctx);
void write_summary(const Context& ctx);

// ingest, reports, clean, train, classify, aggregate, shift-test, regress,
// stepwise, then summary.md.
void run_all(const Context& ctx);

// Joins the region table with region_sentiment.csv (when the table itself has
// no "sentiment" column) into the regression design, standardized if
// configured.
stats::DesignMatrix build_design(const Context& ctx);

}  // namespace geosent::pipeline
