#include "geosent/stats/stepwise.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "geosent/error.hpp"

namespace geosent::stats {
namespace {

std::vector<std::size_t> members(const std::vector<bool>& included) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < included.size(); ++j) {
    if (included[j]) out.push_back(j);
  }
  return out;
}

std::optional<OlsFit> try_fit(const DesignMatrix& design, const std::vector<bool>& included) {
  try {
    return ols(design.select(members(included)));
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(Move move) { return move == Move::Add ? "add" : "drop"; }

StepwiseResult stepwise(const DesignMatrix& design, Direction direction, StartFrom start) {
  const std::size_t k = design.k();
  if (std::set<std::string>(design.names.begin(), design.names.end()).size() != k) {
    throw DataError("stepwise: predictor names must be unique");
  }
  std::vector<std::size_t> by_name(k);
  std::iota(by_name.begin(), by_name.end(), std::size_t{0});
  std::sort(by_name.begin(), by_name.end(),
            [&](std::size_t a, std::size_t b) { return design.names[a] < design.names[b]; });

  std::vector<bool> included(k, start == StartFrom::Full);
  OlsFit current = ols(design.select(members(included)));

  StepwiseResult result;
  result.initial_aic = current.aic;
  const bool may_drop = direction != Direction::Forward;
  const bool may_add = direction != Direction::Backward;

  for (std::size_t step = 1;; ++step) {
    std::optional<std::size_t> best;
    std::optional<OlsFit> best_fit;
    for (std::size_t j : by_name) {
      if (included[j] ? !may_drop : !may_add) continue;
      auto trial = included;
      trial[j] = !trial[j];
      auto fit = try_fit(design, trial);
      if (!fit) continue;
      if (!best_fit || fit->aic < best_fit->aic) {
        best = j;
        best_fit = std::move(fit);
      }
    }
    if (!best || !(best_fit->aic < current.aic)) break;
    result.trace.push_back({step, included[*best] ? Move::Drop : Move::Add, design.names[*best], best_fit->aic});
    included[*best] = !included[*best];
    current = std::move(*best_fit);
  }

  for (std::size_t j : members(included)) result.selected.push_back(design.names[j]);
  result.fit = std::move(current);
  return result;
}

}  // namespace geosent::stats
