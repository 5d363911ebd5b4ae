#include "geosent/stats/ols.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "geosent/error.hpp"
#include "geosent/stats/distributions.hpp"

namespace geosent::stats {

DesignMatrix DesignMatrix::from_columns(std::vector<std::string> names,
                                        const std::vector<std::vector<double>>& columns,
                                        std::vector<double> y) {
  if (names.size() != columns.size()) throw DataError("design: names and columns differ in length");
  const auto n = static_cast<Eigen::Index>(y.size());
  DesignMatrix d;
  d.names = std::move(names);
  d.x.resize(n, static_cast<Eigen::Index>(columns.size() + 1));
  d.x.col(0).setOnes();
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != y.size()) {
      throw DataError("design: column '" + d.names[j] + "' has the wrong length");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      double v = columns[j][static_cast<std::size_t>(i)];
      if (!std::isfinite(v)) throw DataError("design: non-finite value in '" + d.names[j] + "'");
      d.x(i, static_cast<Eigen::Index>(j + 1)) = v;
    }
  }
  d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  if (!d.y.allFinite()) throw DataError("design: non-finite response value");
  return d;
}

DesignMatrix DesignMatrix::select(const std::vector<std::size_t>& predictors) const {
  DesignMatrix d;
  d.x.resize(x.rows(), static_cast<Eigen::Index>(predictors.size() + 1));
  d.x.col(0) = x.col(0);
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    d.names.push_back(names.at(predictors[j]));
    d.x.col(static_cast<Eigen::Index>(j + 1)) = x.col(static_cast<Eigen::Index>(predictors[j] + 1));
  }
  d.y = y;
  return d;
}

std::size_t DesignMatrix::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return j;
  }
  throw DataError("design: no predictor named '" + name + "'");
}

double aic(double rss, std::size_t n, std::size_t k) {
  if (rss <= 0.0) return -std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return nn * std::log(2.0 * std::numbers::pi) + nn * std::log(rss / nn) + nn +
         2.0 * static_cast<double>(k + 2);
}

double aic(const OlsFit& fit) { return aic(fit.rss, fit.n, fit.k); }

OlsFit ols(const DesignMatrix& design) {
  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();
  const std::size_t k = design.k();
  if (p != static_cast<Eigen::Index>(k + 1) || design.y.size() != n) {
    throw DataError("design: inconsistent dimensions");
  }
  if (n <= p) {
    throw DataError("design: need more observations (" + std::to_string(n) + ") than coefficients (" +
                    std::to_string(p) + ")");
  }
  if (!design.x.allFinite() || !design.y.allFinite()) throw DataError("design: non-finite entries");

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design.x);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  double max_norm = design.x.colwise().norm().maxCoeff();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (std::fabs(packed(j, j)) <= kRankTolerance * max_norm) {
      std::string name = j == 0 ? "Intercept" : design.names[static_cast<std::size_t>(j - 1)];
      throw NumericalError("rank deficient design: column '" + name +
                           "' is collinear with the preceding columns");
    }
  }
  auto r = packed.topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Eigen::VectorXd qty = qr.householderQ().transpose() * design.y;

  OlsFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.k = k;
  fit.terms.push_back("Intercept");
  fit.terms.insert(fit.terms.end(), design.names.begin(), design.names.end());
  fit.beta = r.solve(qty.head(p));
  fit.fitted = design.x * fit.beta;
  fit.residuals = design.y - fit.fitted;
  fit.rss = fit.residuals.squaredNorm();
  fit.perfect_fit = fit.rss == 0.0;

  const double df_resid = static_cast<double>(n - p);
  fit.sigma2 = fit.rss / df_resid;
  Eigen::MatrixXd r_inv = r.solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::VectorXd diag = r_inv.rowwise().squaredNorm();
  fit.se = (fit.sigma2 * diag).cwiseSqrt();
  fit.t.resize(p);
  fit.p.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (fit.se(j) > 0.0) {
      fit.t(j) = fit.beta(j) / fit.se(j);
    } else {
      fit.t(j) = fit.beta(j) == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.beta(j));
    }
    fit.p(j) = student_t_two_sided(fit.t(j), df_resid);
  }

  const double tss = (design.y.array() - design.y.mean()).matrix().squaredNorm();
  fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : (fit.rss == 0.0 ? 1.0 : 0.0);
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / df_resid;
  if (k == 0) {
    fit.f_stat = 0.0;
    fit.f_p = 1.0;
  } else if (fit.rss == 0.0) {
    fit.f_stat = std::numeric_limits<double>::infinity();
    fit.f_p = 0.0;
  } else {
    fit.f_stat = std::max(0.0, (tss - fit.rss) / static_cast<double>(k)) / fit.sigma2;
    fit.f_p = f_sf(fit.f_stat, static_cast<double>(k), df_resid);
  }
  fit.aic = aic(fit.rss, fit.n, fit.k);
  return fit;
}

Standardized standardize(const DesignMatrix& design) {
  Standardized out;
  out.design = design;
  const auto n = design.x.rows();
  if (n < 2) throw DataError("standardize: need at least two observations");
  for (std::size_t j = 0; j < design.k(); ++j) {
    auto col = out.design.x.col(static_cast<Eigen::Index>(j + 1));
    double mean = col.mean();
    double ss = (col.array() - mean).square().sum();
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw NumericalError("standardize: column '" + design.names[j] + "' has zero variance");
    col = (col.array() - mean) / sd;
    out.means.push_back(mean);
    out.sds.push_back(sd);
  }
  return out;
}

Eigen::VectorXd Standardized::unstandardize(const Eigen::VectorXd& beta) const {
  Eigen::VectorXd raw = beta;
  for (std::size_t j = 0; j < sds.size(); ++j) {
    auto idx = static_cast<Eigen::Index>(j + 1);
    raw(idx) = beta(idx) / sds[j];
    raw(0) -= beta(idx) * means[j] / sds[j];
  }
  return raw;
}

}  // namespace geosent::stats
