#include "geosent/stats/report.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <optional>
#include <ostream>
#include <vector>

#include "geosent/csv.hpp"

namespace geosent::stats {
namespace {

// Fixed four decimals without a sign on values that round to zero.
std::string fixed4(double v) {
  std::string s = fmt::format("{:.4f}", v);
  return s == "-0.0000" ? "0.0000" : s;
}

std::string prob_text(double p) { return p < 1e-4 ? "<0.0001" : fmt::format("{:.4f}", p); }

std::optional<std::size_t> term_index(const OlsFit& fit, const std::string& term) {
  auto it = std::find(fit.terms.begin(), fit.terms.end(), term);
  if (it == fit.terms.end()) return std::nullopt;
  return static_cast<std::size_t>(it - fit.terms.begin());
}

}  // namespace

std::string_view significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

std::string format_table(std::span<const NamedFit> models) {
  std::vector<std::string> terms;
  for (const auto& m : models) {
    for (const auto& t : m.fit->terms) {
      if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
    }
  }
  std::size_t label_width = std::string_view("Adjusted R-squared").size();
  for (const auto& t : terms) label_width = std::max(label_width, t.size());
  std::size_t col_width = 14;
  for (const auto& m : models) col_width = std::max(col_width, m.label.size() + 2);

  std::string out;
  auto line = [&](std::string_view label, const std::vector<std::string>& cells) {
    out += fmt::format("{:<{}}", label, label_width);
    for (const auto& c : cells) out += fmt::format("  {:>{}}", c, col_width);
    out += '\n';
  };
  std::vector<std::string> header;
  for (const auto& m : models) header.push_back(m.label);
  line("", header);
  out += std::string(label_width + models.size() * (col_width + 2), '-') + '\n';
  for (const auto& term : terms) {
    std::vector<std::string> est, se;
    for (const auto& m : models) {
      auto j = term_index(*m.fit, term);
      if (!j) {
        est.emplace_back();
        se.emplace_back();
        continue;
      }
      auto idx = static_cast<Eigen::Index>(*j);
      est.push_back(fmt::format("{}{:<3}", fixed4(m.fit->beta(idx)), significance_stars(m.fit->p(idx))));
      se.push_back(fmt::format("({:.4f})   ", m.fit->se(idx)));
    }
    line(term, est);
    line("", se);
  }
  out += std::string(label_width + models.size() * (col_width + 2), '-') + '\n';
  std::vector<std::string> r2, adj, fp, aic_row, n_row;
  for (const auto& m : models) {
    r2.push_back(fmt::format("{:.4f}", m.fit->r2));
    adj.push_back(fmt::format("{:.4f}", m.fit->adj_r2));
    fp.push_back(prob_text(m.fit->f_p));
    aic_row.push_back(fmt::format("{:.1f}", m.fit->aic));
    n_row.push_back(std::to_string(m.fit->n));
  }
  line("R-squared", r2);
  line("Adjusted R-squared", adj);
  line("Prob (F-statistic)", fp);
  line("AIC", aic_row);
  line("Observations", n_row);
  out += "Standard errors in parentheses. *, **, *** mark significance at the 10%, 5% and 1% level.\n";
  return out;
}

void write_coefficients_csv(std::ostream& out, std::span<const NamedFit> models) {
  csv::write_row(out, {"model", "term", "estimate", "std_error", "t_value", "p_value"});
  for (const auto& m : models) {
    for (std::size_t j = 0; j < m.fit->terms.size(); ++j) {
      auto idx = static_cast<Eigen::Index>(j);
      csv::write_row(out, {m.label, m.fit->terms[j], csv::format_double(m.fit->beta(idx)),
                           csv::format_double(m.fit->se(idx)), csv::format_double(m.fit->t(idx)),
                           csv::format_double(m.fit->p(idx))});
    }
  }
}

void write_fit_stats_csv(std::ostream& out, std::span<const NamedFit> models) {
  csv::write_row(out, {"model", "n", "k", "r2", "adj_r2", "f_stat", "f_p", "aic", "rss"});
  for (const auto& m : models) {
    const auto& f = *m.fit;
    csv::write_row(out, {m.label, std::to_string(f.n), std::to_string(f.k), csv::format_double(f.r2),
                         csv::format_double(f.adj_r2), csv::format_double(f.f_stat),
                         csv::format_double(f.f_p), csv::format_double(f.aic), csv::format_double(f.rss)});
  }
}

}  // namespace geosent::stats
