#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geosent/preprocess.hpp"
#include "geosent/regional.hpp"
#include "geosent/sentiment.hpp"
#include "geosent/stats/stepwise.hpp"
#include "geosent/timeutil.hpp"

namespace geosent {

struct Paths {
  std::string posts;
  std::string gazetteer;
  std::string dictionary;
  std::string lemmas;
  std::string stop_words;
  std::string conjunctions;
  std::string emoji_polarity;
  std::string training;
  std::string region_table;
};

struct ClassifierSettings {
  sentiment::TrainParams train;
  bool binary = true;
  bool pseudo_label = true;
  double train_fraction = 0.8;
  sentiment::PseudoLabelOptions pseudo;
};

struct RegressionSettings {
  std::vector<std::string> features;  // empty: every region-table feature plus "sentiment"
  bool standardize = true;
  stats::Direction direction = stats::Direction::Both;
  stats::StartFrom start = stats::StartFrom::Full;
};

struct PipelineConfig {
  Paths paths;
  std::string language = "pl";
  Date event_date = Date{std::chrono::year{2019} / 10 / 13};
  regional::EventDay event_day = regional::EventDay::Before;
  std::size_t min_region_posts = 100;
  double emoji_min_share = 0.01;
  std::size_t max_short_words = 3;
  preprocess::Steps steps;
  ClassifierSettings classifier;
  RegressionSettings regression;
  double alpha = 0.05;
  std::uint64_t seed = 20191013;
};

// Parses a JSON config. Relative paths resolve against `base_dir`.
// `overrides` are "dotted.key=value" strings; values parse as JSON when they
// can and are taken as strings otherwise. Throws UsageError.
PipelineConfig parse_config(const std::string& json_text, const std::string& base_dir,
                            const std::vector<std::string>& overrides = {});
PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Throws UsageError if a configured path does not exist.
void validate_paths(const PipelineConfig& config);

// Reads the word lists named in the config into a CleanConfig.
preprocess::CleanConfig load_clean_config(const PipelineConfig& config);

}  // namespace geosent
