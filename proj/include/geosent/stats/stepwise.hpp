#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "geosent/stats/ols.hpp"

namespace geosent::stats {

enum class Direction { Backward, Forward, Both };
enum class StartFrom { Full, Empty };
enum class Move { Add, Drop };

std::string_view to_string(Move move);

struct TraceStep {
  std::size_t step = 0;
  Move action = Move::Drop;
  std::string name;
  double aic = 0.0;  // AIC after the move
};

struct StepwiseResult {
  std::vector<std::string> selected;  // in design order
  OlsFit fit;
  double initial_aic = 0.0;
  std::vector<TraceStep> trace;
};

// Greedy AIC search. Every step scores all single add/drop moves permitted by
// `direction` and takes the lowest-AIC move if it beats the current AIC.
// Equal AICs go to the lexicographically smaller predictor name; the
// intercept is always kept. Moves that make the design rank deficient are
// not candidates.
StepwiseResult stepwise(const DesignMatrix& design, Direction direction = Direction::Both,
                        StartFrom start = StartFrom::Full);

}  // namespace geosent::stats
