#include "geosent/regional.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "geosent/csv.hpp"
#include "geosent/error.hpp"
#include "geosent/stats/distributions.hpp"

namespace geosent::regional {

bool is_before(Timestamp ts, Date event_date, EventDay event_day) {
  using namespace std::chrono;
  Timestamp cut = event_day == EventDay::Before ? Timestamp{event_date + days{1}} : Timestamp{event_date};
  return ts < cut;
}

std::optional<double> RegionSentiment::mean_before() const {
  auto n = n_pos_before + n_neg_before;
  if (n == 0) return std::nullopt;
  return static_cast<double>(n_pos_before) / static_cast<double>(n);
}

std::optional<double> RegionSentiment::mean_after() const {
  auto n = n_pos_after + n_neg_after;
  if (n == 0) return std::nullopt;
  return static_cast<double>(n_pos_after) / static_cast<double>(n);
}

AggregateReport aggregate(std::span<const ClassifiedPost> posts, const AggregateOptions& options) {
  AggregateReport report;
  std::map<std::string, RegionSentiment> by_region;
  for (const auto& p : posts) {
    if (!p.region_id) {
      ++report.without_region;
      continue;
    }
    if (p.label == sentiment::Label::Neutral) {
      ++report.neutral;
      continue;
    }
    if (!p.timestamp) {
      ++report.without_timestamp;
      continue;
    }
    auto& r = by_region[*p.region_id];
    r.region_id = *p.region_id;
    bool positive = sentiment::binary_value(p.label) == 1;
    if (is_before(*p.timestamp, options.event_date, options.event_day)) {
      ++(positive ? r.n_pos_before : r.n_neg_before);
    } else {
      ++(positive ? r.n_pos_after : r.n_neg_after);
    }
  }
  for (auto& [id, r] : by_region) {
    r.mean_sentiment = static_cast<double>(r.n_pos_before + r.n_pos_after) / static_cast<double>(r.total());
    r.included = r.total() > options.threshold;
    report.regions.push_back(r);
  }
  return report;
}

Table2x2 table_of(const RegionSentiment& region) {
  return {static_cast<double>(region.n_pos_before), static_cast<double>(region.n_neg_before),
          static_cast<double>(region.n_pos_after), static_cast<double>(region.n_neg_after)};
}

Table2x2 pooled_table(std::span<const RegionSentiment> regions) {
  Table2x2 t;
  for (const auto& r : regions) {
    if (!r.included) continue;
    auto s = table_of(r);
    t.pos_before += s.pos_before;
    t.neg_before += s.neg_before;
    t.pos_after += s.pos_after;
    t.neg_after += s.neg_after;
  }
  return t;
}

ShiftTestResult shift_test(const Table2x2& t, std::string scope, double alpha) {
  ShiftTestResult res;
  res.scope = std::move(scope);
  res.alpha = alpha;
  const double a = t.pos_before, b = t.neg_before, c = t.pos_after, d = t.neg_after;
  const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
  if (r1 <= 0 || r2 <= 0 || c1 <= 0 || c2 <= 0) {
    res.degenerate = true;
    return res;
  }
  const double n = r1 + r2;
  const double diff = a * d - b * c;
  // Divide stepwise to keep large tables finite.
  res.chi2 = n * (diff / r1) * (diff / r2) / c1 / c2;
  res.p_value = stats::chi2_sf(res.chi2, 1.0);
  return res;
}

ShiftTestResult shift_test(const RegionSentiment& region, double alpha) {
  return shift_test(table_of(region), region.region_id, alpha);
}

double two_proportion_z(const Table2x2& t) {
  const double n1 = t.pos_before + t.neg_before, n2 = t.pos_after + t.neg_after;
  const double p1 = t.pos_before / n1, p2 = t.pos_after / n2;
  const double pooled = (t.pos_before + t.pos_after) / (n1 + n2);
  return (p1 - p2) / std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2));
}

stats::OlsFit shift_regression(std::span<const RegionSentiment> regions) {
  std::vector<double> flag, y;
  std::size_t used = 0;
  for (const auto& r : regions) {
    if (!r.included) continue;
    ++used;
    if (auto m = r.mean_before()) {
      flag.push_back(0.0);
      y.push_back(*m);
    }
    if (auto m = r.mean_after()) {
      flag.push_back(1.0);
      y.push_back(*m);
    }
  }
  if (used < 2) throw DataError("shift regression needs at least two included regions");
  return stats::ols(stats::DesignMatrix::from_columns({"After event"}, {flag}, y));
}

ShiftSummary shift_summary(std::span<const ShiftTestResult> results, double alpha) {
  ShiftSummary s;
  s.alpha = alpha;
  for (const auto& r : results) {
    ++s.tested;
    if (r.p_value < alpha) s.significant_regions.push_back(r.scope);
  }
  return s;
}

void write_region_csv(std::ostream& out, std::span<const RegionSentiment> regions,
                      std::span<const ShiftTestResult> tests) {
  std::map<std::string, const ShiftTestResult*> by_scope;
  for (const auto& t : tests) by_scope[t.scope] = &t;
  csv::write_row(out, {"region_id", "n_pos_before", "n_neg_before", "n_pos_after", "n_neg_after",
                       "mean_sentiment", "included", "chi2", "p"});
  for (const auto& r : regions) {
    auto it = by_scope.find(r.region_id);
    bool has = it != by_scope.end();
    csv::write_row(out, {r.region_id, std::to_string(r.n_pos_before), std::to_string(r.n_neg_before),
                         std::to_string(r.n_pos_after), std::to_string(r.n_neg_after),
                         csv::format_double(r.mean_sentiment), r.included ? "true" : "false",
                         has ? csv::format_double(it->second->chi2) : "",
                         has ? csv::format_double(it->second->p_value) : ""});
  }
}

std::vector<RegionSentiment> read_region_csv(std::istream& in, std::string_view source) {
  auto table = csv::read_stream(in);
  const char* cols[] = {"region_id", "n_pos_before", "n_neg_before", "n_pos_after", "n_neg_after",
                        "mean_sentiment", "included"};
  std::size_t idx[7];
  for (int i = 0; i < 7; ++i) idx[i] = table.require_column(cols[i], source);
  std::vector<RegionSentiment> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto where = std::string(source) + ":" + std::to_string(table.lines[r]);
    if (row.size() != table.header.size()) throw DataError(where + ": wrong field count");
    RegionSentiment rs;
    rs.region_id = row[idx[0]];
    std::size_t* counts[] = {&rs.n_pos_before, &rs.n_neg_before, &rs.n_pos_after, &rs.n_neg_after};
    for (int i = 0; i < 4; ++i) {
      auto v = csv::to_int64(row[idx[i + 1]]);
      if (!v || *v < 0) throw DataError(where + ": bad count in '" + cols[i + 1] + "'");
      *counts[i] = static_cast<std::size_t>(*v);
    }
    auto mean = csv::to_double(row[idx[5]]);
    if (!mean) throw DataError(where + ": bad mean_sentiment");
    rs.mean_sentiment = *mean;
    if (row[idx[6]] != "true" && row[idx[6]] != "false") throw DataError(where + ": bad included flag");
    rs.included = row[idx[6]] == "true";
    out.push_back(std::move(rs));
  }
  return out;
}

}  // namespace geosent::regional
