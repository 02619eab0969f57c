// Internal: primal network simplex for the balanced transportation problem.
#pragma once

#include <span>
#include <vector>

#include "goat/core.hpp"

namespace goat::detail {

struct FlowArc {
  int source;
  int target;
  double flow;
};

struct NetworkSimplexResult {
  /// Basic arcs carrying positive flow.
  std::vector<FlowArc> arcs;
  double objective = 0.0;
  long pivots = 0;
};

/// supply (size m) and demand (size n) must be strictly positive with equal
/// totals; cost is m x n.
NetworkSimplexResult network_simplex(std::span<const double> supply,
                                     std::span<const double> demand, const Matrix& cost);

}  // namespace goat::detail
