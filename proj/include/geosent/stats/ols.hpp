#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace geosent::stats {

// Regressors with a leading intercept column of ones.
struct DesignMatrix {
  std::vector<std::string> names;  // predictor names, intercept excluded
  Eigen::MatrixXd x;               // n x (k+1)
  Eigen::VectorXd y;

  std::size_t n() const noexcept { return static_cast<std::size_t>(x.rows()); }
  std::size_t k() const noexcept { return names.size(); }

  // Builds X = [1 | columns]. Throws DataError on ragged or non-finite input.
  static DesignMatrix from_columns(std::vector<std::string> names,
                                   const std::vector<std::vector<double>>& columns,
                                   std::vector<double> y);

  // Keeps the listed predictors (indices into `names`) in the given order.
  DesignMatrix select(const std::vector<std::size_t>& predictors) const;
  std::size_t index_of(const std::string& name) const;
};

struct OlsFit {
  std::vector<std::string> terms;  // "Intercept" then predictor names
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd t;
  Eigen::VectorXd p;  // two-sided, Student-t with n-k-1 df
  Eigen::VectorXd residuals;
  Eigen::VectorXd fitted;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double f_stat = 0.0;
  double f_p = 1.0;
  double aic = 0.0;
  double rss = 0.0;
  double sigma2 = 0.0;
  std::size_t n = 0;
  std::size_t k = 0;
  bool perfect_fit = false;  // rss == 0: AIC is -inf
};

// Least squares through a Householder QR of X. A column whose R diagonal is
// below 1e-10 times the largest column norm is reported as collinear
// (NumericalError naming it). Requires n > k + 1.
OlsFit ols(const DesignMatrix& design);

// n*ln(2*pi) + n*ln(rss/n) + n + 2*(k+2); -inf when rss == 0.
double aic(double rss, std::size_t n, std::size_t k);
double aic(const OlsFit& fit);

constexpr double kRankTolerance = 1e-10;

struct Standardized {
  DesignMatrix design;
  std::vector<double> means;
  std::vector<double> sds;  // sample sd (n-1 divisor)

  // Coefficients on the original predictor scale.
  Eigen::VectorXd unstandardize(const Eigen::VectorXd& beta) const;
};

// Centers and scales every non-intercept column. Zero variance throws
// NumericalError naming the column.
Standardized standardize(const DesignMatrix& design);

}  // namespace geosent::stats
