#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geosent/sentiment.hpp"
#include "geosent/stats/ols.hpp"
#include "geosent/timeutil.hpp"

namespace geosent::regional {

struct ClassifiedPost {
  std::optional<std::string> region_id;
  std::optional<Timestamp> timestamp;
  sentiment::Label label = sentiment::Label::Neutral;
};

// Which period posts made on the event day itself belong to.
enum class EventDay { Before, After };

struct AggregateOptions {
  Date event_date;
  std::size_t threshold = 100;  // a region is included when its total exceeds this
  EventDay event_day = EventDay::Before;
};

bool is_before(Timestamp ts, Date event_date, EventDay event_day);

struct RegionSentiment {
  std::string region_id;
  std::size_t n_pos_before = 0;
  std::size_t n_neg_before = 0;
  std::size_t n_pos_after = 0;
  std::size_t n_neg_after = 0;
  double mean_sentiment = 0.0;  // positive share over both periods
  bool included = false;

  std::size_t total() const noexcept { return n_pos_before + n_neg_before + n_pos_after + n_neg_after; }
  std::optional<double> mean_before() const;
  std::optional<double> mean_after() const;
};

struct AggregateReport {
  std::vector<RegionSentiment> regions;  // sorted by region_id
  std::size_t without_region = 0;
  std::size_t without_timestamp = 0;
  std::size_t neutral = 0;  // not binary, skipped
};

AggregateReport aggregate(std::span<const ClassifiedPost> posts, const AggregateOptions& options);

// Period x polarity counts: rows before/after, columns positive/negative.
struct Table2x2 {
  double pos_before = 0;
  double neg_before = 0;
  double pos_after = 0;
  double neg_after = 0;
};

Table2x2 table_of(const RegionSentiment& region);
// Sums the included regions.
Table2x2 pooled_table(std::span<const RegionSentiment> regions);

struct ShiftTestResult {
  std::string scope;  // "global" or a region id
  double chi2 = 0.0;
  int df = 1;
  double p_value = 1.0;
  double alpha = 0.05;
  bool degenerate = false;  // a zero margin; reported as chi2 = 0, p = 1

  bool significant() const noexcept { return p_value < alpha; }
};

// Pearson chi-square for equality of two proportions, no continuity correction.
ShiftTestResult shift_test(const Table2x2& table, std::string scope = "global", double alpha = 0.05);
ShiftTestResult shift_test(const RegionSentiment& region, double alpha = 0.05);

// Pooled two-proportion z statistic for positive share before vs after.
double two_proportion_z(const Table2x2& table);

// OLS of per-period mean sentiment on an intercept and an after-event flag,
// one observation per included region and non-empty period.
stats::OlsFit shift_regression(std::span<const RegionSentiment> regions);

struct ShiftSummary {
  double alpha = 0.05;
  std::size_t tested = 0;
  std::vector<std::string> significant_regions;

  std::size_t significant() const noexcept { return significant_regions.size(); }
};

ShiftSummary shift_summary(std::span<const ShiftTestResult> results, double alpha = 0.05);

// region_id,n_pos_before,n_neg_before,n_pos_after,n_neg_after,mean_sentiment,included,chi2,p
// The test columns are left empty for regions without a result.
void write_region_csv(std::ostream& out, std::span<const RegionSentiment> regions,
                      std::span<const ShiftTestResult> tests = {});
std::vector<RegionSentiment> read_region_csv(std::istream& in, std::string_view source);

}  // namespace geosent::regional
