#include "doctest.h"
#include "printers.hpp"

#include <algorithm>
#include <cmath>

#include "geosent/error.hpp"
#include "geosent/stats/stepwise.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace geosent;
using namespace geosent::stats;

namespace {

// Projects v off the span of the given columns (Gram-Schmidt, twice).
std::vector<double> project_off(std::vector<double> v, const std::vector<std::vector<double>>& basis) {
  std::vector<std::vector<double>> q;
  for (auto b : basis) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : q) {
        double dot = 0;
        for (std::size_t i = 0; i < b.size(); ++i) dot += b[i] * e[i];
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= dot * e[i];
      }
    }
    double norm = 0;
    for (double x : b) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : b) x /= norm;
    q.push_back(b);
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& e : q) {
      double dot = 0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * e[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= dot * e[i];
    }
  }
  return v;
}

std::vector<double> column(const DesignMatrix& d, Eigen::Index j) {
  return std::vector<double>(d.x.col(j).data(), d.x.col(j).data() + d.x.rows());
}

// Replays `trace` against the brute-force evaluator.
void verify_trace(const DesignMatrix& d, const StepwiseResult& res, std::vector<std::size_t> current) {
  testing::SubsetEvaluator eval(d);
  for (const auto& step : res.trace) {
    auto move = testing::best_single_move(eval, d.names, current);
    REQUIRE(move.found);
    CHECK(move.name == step.name);
    CHECK(move.add == (step.action == Move::Add));
    CHECK(step.aic == doctest::Approx(move.aic).epsilon(1e-9));
    const std::size_t j = d.index_of(step.name);
    auto it = std::find(current.begin(), current.end(), j);
    if (it == current.end()) {
      current.push_back(j);
      std::sort(current.begin(), current.end());
    } else {
      current.erase(it);
    }
  }
  CHECK_FALSE(testing::best_single_move(eval, d.names, current).found);
  std::vector<std::string> names;
  for (auto j : current) names.push_back(d.names[j]);
  CHECK(names == res.selected);
}

std::vector<std::size_t> all_of(const DesignMatrix& d) {
  std::vector<std::size_t> v(d.k());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = j;
  return v;
}

}  // namespace

TEST_CASE("stepwise: a predictor that explains nothing is dropped") {
  testing::Rng rng(61);
  const std::size_t n = 200;
  std::vector<double> x(n), y(n), noise(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal();
    y[i] = 1 + 3 * x[i] + 0.5 * rng.normal();
    noise[i] = rng.normal();
  }
  noise = project_off(noise, {std::vector<double>(n, 1.0), x, y});
  auto res = stepwise(DesignMatrix::from_columns({"noise", "signal"}, {noise, x}, y));
  CHECK(res.selected == std::vector<std::string>{"signal"});
  REQUIRE(res.trace.size() == 1);
  CHECK(res.trace[0].name == "noise");
  CHECK(res.trace[0].action == Move::Drop);
  CHECK(res.trace[0].aic == doctest::Approx(res.initial_aic - 2.0).epsilon(1e-12));
}

TEST_CASE("stepwise: pure noise response ends at the intercept") {
  testing::Rng rng(62);
  const std::size_t n = 80;
  std::vector<double> y(n);
  for (auto& v : y) v = rng.normal();
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  for (int j = 0; j < 6; ++j) {
    std::vector<double> c(n);
    for (auto& v : c) v = rng.normal();
    cols.push_back(project_off(c, {std::vector<double>(n, 1.0), y}));
    names.push_back("z" + std::to_string(j));
  }
  auto res = stepwise(DesignMatrix::from_columns(names, cols, y));
  CHECK(res.selected.empty());
  CHECK(res.fit.k == 0);
  CHECK(res.trace.size() == 6);
}

TEST_CASE("stepwise: trace matches the brute-force move evaluator") {
  testing::Rng rng(63);
  std::size_t top3 = 0;
  const int seeds = 30;
  for (int s = 0; s < seeds; ++s) {
    const std::size_t k = 2 + rng.below(11);
    auto d = testing::random_design(rng, 30 + rng.below(100), k, 1.0);
    // Shrink some effects toward zero so that selection has work to do.
    for (std::size_t j = 0; j < k; ++j) {
      if (rng.chance(0.5)) {
        Eigen::VectorXd e(d.n());
        for (auto& v : e) v = rng.normal();
        d.x.col(static_cast<Eigen::Index>(j + 1)) = e;
      }
    }
    auto res = stepwise(d);
    verify_trace(d, res, all_of(d));
    double prev = res.initial_aic;
    for (const auto& t : res.trace) {
      CHECK(t.aic < prev);
      prev = t.aic;
    }
    CHECK(res.fit.aic <= res.initial_aic);
    testing::SubsetEvaluator eval(d);
    auto ranking = testing::all_subset_aics(eval);
    top3 += res.fit.aic <= ranking[std::min<std::size_t>(2, ranking.size() - 1)] + 1e-9;
  }
  CHECK(top3 >= 28);
}

TEST_CASE("stepwise: directions and starting points") {
  testing::Rng rng(64);
  for (int s = 0; s < 20; ++s) {
    auto d = testing::random_design(rng, 60, 6, 3.0);
    auto fwd = stepwise(d, Direction::Forward, StartFrom::Empty);
    verify_trace(d, fwd, {});
    for (const auto& t : fwd.trace) CHECK(t.action == Move::Add);
    auto back = stepwise(d, Direction::Backward, StartFrom::Full);
    for (const auto& t : back.trace) CHECK(t.action == Move::Drop);
    auto both = stepwise(d, Direction::Both, StartFrom::Empty);
    verify_trace(d, both, {});
    auto none = stepwise(d, Direction::Forward, StartFrom::Full);
    CHECK(none.trace.empty());
    CHECK(none.selected == d.names);
  }
}

TEST_CASE("stepwise: column order does not matter") {
  testing::Rng rng(65);
  for (int s = 0; s < 20; ++s) {
    auto d = testing::random_design(rng, 50, 7, 4.0);
    std::vector<std::size_t> perm = all_of(d);
    rng.shuffle(perm);
    auto p = d.select(perm);
    auto a = stepwise(d), b = stepwise(p);
    std::vector<std::string> sa = a.selected, sb = b.selected;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    CHECK(sa == sb);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].name == b.trace[i].name);
  }
}

TEST_CASE("stepwise: collinear candidates are skipped and names must be unique") {
  testing::Rng rng(66);
  auto d = testing::random_design(rng, 40, 2, 1.0);
  auto a = column(d, 1), b = column(d, 2), y = std::vector<double>(d.y.data(), d.y.data() + 40);
  std::vector<double> dup = a;
  auto res = stepwise(DesignMatrix::from_columns({"a", "b", "copy"}, {a, b, dup}, y), Direction::Forward,
                      StartFrom::Empty);
  CHECK(std::count(res.selected.begin(), res.selected.end(), "copy") +
            std::count(res.selected.begin(), res.selected.end(), "a") <=
        1);
  CHECK_THROWS_AS(stepwise(DesignMatrix::from_columns({"a", "a"}, {a, b}, y)), DataError);
}

TEST_CASE("stepwise: exact vote share fixture drops the noise predictors in name order") {
  auto data = testing::vote_share_data(6126, true);
  auto res = stepwise(data.standardized);
  std::vector<std::string> true_set(testing::kVoteShareNames.begin(), testing::kVoteShareNames.begin() + 5);
  CHECK(res.selected == true_set);
  for (const auto& t : res.trace) CHECK(t.action == Move::Drop);
  verify_trace(data.standardized, res, all_of(data.standardized));
}
