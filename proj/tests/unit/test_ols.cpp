#include "doctest.h"

#include <Eigen/SVD>
#include <chrono>
#include <cmath>
#include <numbers>

#include "geosent/error.hpp"
#include "geosent/stats/ols.hpp"
#include "geosent/stats/report.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace geosent;
using namespace geosent::stats;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("ols: exact line") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) x.push_back(i), y.push_back(3 + 2.0 * i);
  auto fit = ols(DesignMatrix::from_columns({"x"}, {x}, y));
  CHECK(std::abs(fit.beta[0] - 3) <= 1e-10);
  CHECK(std::abs(fit.beta[1] - 2) <= 1e-10);
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("ols: orthogonal response") {
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i % 2 ? 1.0 : -1.0);
    y.push_back((i / 2) % 2 ? 1.0 : -1.0);
  }
  auto fit = ols(DesignMatrix::from_columns({"x"}, {x}, y));
  CHECK(std::abs(fit.beta[1]) <= 1e-10);
  CHECK(fit.p[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ols: matches the normal-equations oracle") {
  testing::Rng rng(51);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 1 + rng.below(10);
    const std::size_t n = k + 5 + rng.below(200 - k - 4);
    auto d = testing::random_design(rng, n, k, 0.5 + rng.uniform());
    auto fit = ols(d);
    auto o = testing::normal_equations(d);
    for (std::size_t j = 0; j <= k; ++j) {
      CHECK(rel(fit.beta[j], o.beta[j]) <= 1e-8);
      CHECK(rel(fit.se[j], o.se[j]) <= 1e-8);
      CHECK(rel(fit.t[j], o.t[j]) <= 1e-8);
    }
    CHECK(rel(fit.r2, o.r2) <= 1e-8);
    CHECK(rel(fit.rss, o.rss) <= 1e-8);
    CHECK((d.x.transpose() * fit.residuals).norm() <= 1e-8 * d.y.norm());
    CHECK(fit.adj_r2 == doctest::Approx(1 - (1 - fit.r2) * (n - 1.0) / (n - k - 1.0)).epsilon(1e-12));
    const double f = (fit.r2 / k) / ((1 - fit.r2) / (n - k - 1.0));
    CHECK(rel(fit.f_stat, f) <= 1e-8);
    for (std::size_t j = 0; j <= k; ++j) {
      CHECK(fit.p[j] >= 0.0);
      CHECK(fit.p[j] <= 1.0);
    }
  }
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
}

TEST_CASE("ols: zero-noise recovery on ill-conditioned designs") {
  testing::Rng rng(52);
  for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const std::size_t n = 60, k = 4;
    std::vector<double> common(n);
    for (auto& v : common) v = rng.normal();
    std::vector<std::vector<double>> cols(k, std::vector<double>(n));
    for (auto& c : cols) {
      for (std::size_t i = 0; i < n; ++i) c[i] = common[i] + delta * rng.normal();
    }
    std::vector<double> beta = {0.7, -1.3, 2.1, 0.4, -0.9};
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = beta[0];
      for (std::size_t j = 0; j < k; ++j) y[i] += beta[j + 1] * cols[j][i];
    }
    auto d = DesignMatrix::from_columns({"a", "b", "c", "d"}, cols, y);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.x);
    const double cond = svd.singularValues()(0) / svd.singularValues()(k);
    CAPTURE(cond);
    REQUIRE(cond <= 1e6);
    auto fit = ols(d);
    for (std::size_t j = 0; j <= k; ++j) CHECK(std::abs(fit.beta[j] - beta[j]) <= 1e-9 * std::abs(beta[j]));
  }
}

TEST_CASE("ols: rank deficiency names the column") {
  std::vector<double> a = {1, 2, 3, 4, 5, 6}, b = {2, 1, 4, 3, 6, 5}, y = {1, 3, 2, 5, 4, 6};
  std::vector<double> c(6);
  for (int i = 0; i < 6; ++i) c[i] = a[i] + 2 * b[i];
  try {
    ols(DesignMatrix::from_columns({"a", "b", "sum"}, {a, b, c}, y));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("'sum'") != std::string::npos);
  }
  std::vector<double> constant(6, 4.0);
  CHECK_THROWS_AS(ols(DesignMatrix::from_columns({"const"}, {constant}, y)), NumericalError);
  CHECK_THROWS_AS(ols(DesignMatrix::from_columns({"a", "b"}, {a, b}, {1, 2, 3})), DataError);
  std::vector<double> short_y = {1, 2};
  CHECK_THROWS_AS(ols(DesignMatrix::from_columns({"a"}, {{1, 2}}, short_y)), DataError);
}

TEST_CASE("ols: adding a predictor never lowers R-squared") {
  testing::Rng rng(53);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 2 + rng.below(8);
    auto d = testing::random_design(rng, 30 + rng.below(50), k, 2.0);
    std::vector<std::size_t> subset;
    double prev = ols(d.select(subset)).r2;
    for (std::size_t j = 0; j < k; ++j) {
      subset.push_back(j);
      const double r2 = ols(d.select(subset)).r2;
      CHECK(r2 >= prev - 1e-12);
      prev = r2;
    }
  }
}

TEST_CASE("ols: dummy coefficient is the difference of group means") {
  testing::Rng rng(54);
  for (int i = 0; i < 100; ++i) {
    const std::size_t m = 2 + rng.below(100);
    std::vector<double> flag, y;
    double s0 = 0, s1 = 0;
    for (std::size_t j = 0; j < 2 * m; ++j) {
      const double v = rng.uniform();
      flag.push_back(j % 2);
      y.push_back(v);
      (j % 2 ? s1 : s0) += v;
    }
    auto fit = ols(DesignMatrix::from_columns({"flag"}, {flag}, y));
    CHECK(std::abs(fit.beta[1] - (s1 / m - s0 / m)) <= 1e-12);
  }
}

TEST_CASE("aic") {
  const std::size_t n = 50;
  CHECK(aic(10.0, n, 3) == doctest::Approx(n * std::log(2 * std::numbers::pi) + n * std::log(10.0 / n) + n + 10));
  CHECK(aic(12.0, n, 3) > aic(10.0, n, 3));
  CHECK(std::isinf(aic(0.0, n, 3)));
  CHECK(aic(0.0, n, 3) < 0);

  // Adding a noise predictor raises AIC exactly when it removes less than a
  // 1 - exp(-2/n) share of the residual sum of squares.
  testing::Rng rng(55);
  std::size_t small_reduction = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t m = 20 + rng.below(100);
    auto d = testing::random_design(rng, m, 2, 1.0);
    std::vector<double> noise(m);
    for (auto& v : noise) v = rng.normal();
    std::vector<std::vector<double>> cols = {std::vector<double>(d.x.col(1).data(), d.x.col(1).data() + m),
                                             std::vector<double>(d.x.col(2).data(), d.x.col(2).data() + m), noise};
    std::vector<double> y(d.y.data(), d.y.data() + m);
    auto small = ols(d);
    auto big = ols(DesignMatrix::from_columns({"x01", "x02", "noise"}, cols, y));
    const double reduction = 1.0 - big.rss / small.rss;
    const bool below = reduction < 1.0 - std::exp(-2.0 / m);
    CHECK((big.aic > small.aic) == below);
    if (reduction < 2.0 / m - 2.0 / (double(m) * m)) {
      ++small_reduction;
      CHECK(big.aic > small.aic);
    }
    // Differences do not depend on the additive constant.
    CHECK((big.aic - small.aic) == doctest::Approx(m * std::log(big.rss / small.rss) + 2.0));
  }
  CHECK(small_reduction > 50);
}

TEST_CASE("standardize") {
  auto d = DesignMatrix::from_columns({"c"}, {{0.0, 2.0}, }, {1.0, 2.0});
  // Two observations leave no residual degrees of freedom, but standardizing
  // itself only needs the columns.
  auto s = standardize(d);
  CHECK(s.design.x(0, 1) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
  CHECK(s.design.x(1, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  testing::Rng rng(56);
  auto raw = testing::random_design(rng, 80, 4, 1.0);
  for (Eigen::Index j = 1; j < raw.x.cols(); ++j) raw.x.col(j) = raw.x.col(j) * (j * 7.0) + Eigen::VectorXd::Constant(80, 3.0 * j);
  auto st = standardize(raw);
  auto again = standardize(st.design);
  CHECK((again.design.x - st.design.x).cwiseAbs().maxCoeff() <= 1e-12);

  auto f_raw = ols(raw), f_std = ols(st.design);
  CHECK((f_raw.fitted - f_std.fitted).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(rel(f_raw.r2, f_std.r2) <= 1e-9);
  CHECK(rel(f_raw.f_stat, f_std.f_stat) <= 1e-9);
  CHECK(rel(f_raw.aic, f_std.aic) <= 1e-9);
  for (Eigen::Index j = 1; j < raw.x.cols(); ++j) CHECK(rel(f_raw.t[j], f_std.t[j]) <= 1e-9);
  auto back = st.unstandardize(f_std.beta);
  for (Eigen::Index j = 0; j < raw.x.cols(); ++j) CHECK(rel(back[j], f_raw.beta[j]) <= 1e-9);

  auto flat = DesignMatrix::from_columns({"flat"}, {{5.0, 5.0, 5.0}}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(standardize(flat), NumericalError);
}

TEST_CASE("ols: vote share coefficients recovered within two standard errors") {
  std::size_t all_within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto data = testing::vote_share_data(seed, false);
    auto fit = ols(data.standardized.select({0, 1, 2, 3, 4}));
    bool ok = std::abs(fit.beta[0] - testing::kVoteShareIntercept) <= 2 * fit.se[0];
    for (std::size_t j = 0; j < 5; ++j) ok = ok && std::abs(fit.beta[j + 1] - testing::kVoteShareBeta[j]) <= 2 * fit.se[j + 1];
    all_within += ok;
  }
  // Six independent-ish 95% intervals jointly hold in roughly 74% of samples;
  // per coefficient the rate is about 95%.
  CHECK(all_within >= 60);

  for (std::size_t j = 0; j < 5; ++j) {
    std::size_t within = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto data = testing::vote_share_data(seed, false);
      auto fit = ols(data.standardized.select({0, 1, 2, 3, 4}));
      within += std::abs(fit.beta[j + 1] - testing::kVoteShareBeta[j]) <= 2 * fit.se[j + 1];
    }
    CAPTURE(j);
    CHECK(within >= 90);
  }

  auto exact = testing::vote_share_data(6126, true);
  auto fit = ols(exact.standardized.select({0, 1, 2, 3, 4}));
  CHECK(std::abs(fit.beta[0] - testing::kVoteShareIntercept) <= 1e-12);
  for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(fit.beta[j + 1] - testing::kVoteShareBeta[j]) <= 1e-12);
}

TEST_CASE("report formatting") {
  CHECK(significance_stars(0.005) == "***");
  CHECK(significance_stars(0.01) == "**");
  CHECK(significance_stars(0.049) == "**");
  CHECK(significance_stars(0.05) == "*");
  CHECK(significance_stars(0.0999) == "*");
  CHECK(significance_stars(0.1) == "");

  auto exact = testing::vote_share_data(6126, true);
  auto fit = ols(exact.standardized.select({0, 1, 2, 3, 4}));
  std::vector<NamedFit> models = {{"True model", &fit}};
  const std::string table = format_table(models);
  CHECK(table.find("-0.0133*") != std::string::npos);
  CHECK(table.find("-0.0439***") != std::string::npos);
  CHECK(table.find("0.4246") != std::string::npos);
}
