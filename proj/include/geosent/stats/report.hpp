#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "geosent/stats/ols.hpp"

namespace geosent::stats {

// "***" below 0.01, "**" below 0.05, "*" below 0.10.
std::string_view significance_stars(double p);

struct NamedFit {
  std::string label;
  const OlsFit* fit = nullptr;
};

// Side-by-side coefficient table: estimate with stars, standard error in
// parentheses underneath, then R-squared, adjusted R-squared, Prob (F) and AIC.
std::string format_table(std::span<const NamedFit> models);

// model,term,estimate,std_error,t_value,p_value
void write_coefficients_csv(std::ostream& out, std::span<const NamedFit> models);
// model,n,k,r2,adj_r2,f_stat,f_p,aic,rss
void write_fit_stats_csv(std::ostream& out, std::span<const NamedFit> models);

}  // namespace geosent::stats
