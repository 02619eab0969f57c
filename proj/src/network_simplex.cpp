#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace goat::detail {
namespace {

// Flows below this are round-off left behind by degenerate pivots.
constexpr double kFlowFloor = 1e-14;

enum : signed char { kTree = 0, kLower = 1 };
enum : signed char { kUp = 1, kDown = -1 };

// Complete bipartite graph: nodes [0, m) supply, [m, m + n) demand, plus a
// root. Arc e < m*n joins e / n to m + e % n. Arc m*n + u is the artificial
// arc between node u and the root that forms the initial spanning tree.
//
// The basis is kept as a strongly feasible spanning tree rooted at the root
// (every zero-flow tree arc points away from the root), and the leaving arc is
// chosen by the last-blocking-arc rule, which rules out cycling under
// degeneracy. Tree potentials and depths are rebuilt by BFS after each pivot.
class TransportationSimplex {
 public:
  TransportationSimplex(std::span<const double> supply, std::span<const double> demand,
                        const Matrix& cost)
      : m_(static_cast<int>(supply.size())),
        n_(static_cast<int>(demand.size())),
        nodes_(m_ + n_),
        root_(m_ + n_),
        real_arcs_(static_cast<long>(m_) * n_) {
    const long all_arcs = real_arcs_ + nodes_;
    src_.resize(all_arcs);
    tgt_.resize(all_arcs);
    cost_.resize(all_arcs);
    flow_.assign(all_arcs, 0.0);
    state_.assign(all_arcs, kLower);

    double max_cost = 0.0;
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) {
        const long e = static_cast<long>(i) * n_ + j;
        src_[e] = i;
        tgt_[e] = m_ + j;
        cost_[e] = cost(i, j);
        max_cost = std::max(max_cost, std::abs(cost_[e]));
      }
    }
    // Any supply-to-demand path through the root costs more than a direct arc.
    const double artificial = 2.0 * max_cost + 1.0;
    eps_ = 1e-12 * (1.0 + artificial);

    adjacency_.assign(nodes_ + 1, {});
    parent_.assign(nodes_ + 1, -1);
    pred_.assign(nodes_ + 1, -1);
    dir_.assign(nodes_ + 1, kUp);
    depth_.assign(nodes_ + 1, 0);
    pi_.assign(nodes_ + 1, 0.0);
    for (int u = 0; u < nodes_; ++u) {
      const long e = real_arcs_ + u;
      state_[e] = kTree;
      if (u < m_) {
        src_[e] = u;
        tgt_[e] = root_;
        cost_[e] = 0.0;
        flow_[e] = supply[u];
      } else {
        src_[e] = root_;
        tgt_[e] = u;
        cost_[e] = artificial;
        flow_[e] = demand[u - m_];
      }
      adjacency_[u].push_back(e);
      adjacency_[root_].push_back(e);
    }
    block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(real_arcs_))));
    rebuild_tree();
  }

  NetworkSimplexResult run() {
    NetworkSimplexResult result;
    for (long e = find_entering(); e >= 0; e = find_entering()) {
      pivot(e);
      ++result.pivots;
    }
    double artificial_flow = 0.0;
    for (int u = 0; u < nodes_; ++u) artificial_flow += flow_[real_arcs_ + u];
    if (artificial_flow > kMassTolerance) {
      throw SolverError("network simplex finished with " + std::to_string(artificial_flow) +
                            " mass on artificial arcs",
                        artificial_flow);
    }
    for (long e = 0; e < real_arcs_; ++e) {
      if (state_[e] == kTree && flow_[e] > kFlowFloor) {
        result.arcs.push_back({src_[e], tgt_[e] - m_, flow_[e]});
        result.objective += flow_[e] * cost_[e];
      }
    }
    return result;
  }

 private:
  double reduced_cost(long e) const { return cost_[e] + pi_[src_[e]] - pi_[tgt_[e]]; }

  long find_entering() {
    double best_rc = 0.0;
    long best = -1;
    long remaining = block_;
    for (long scanned = 0; scanned < real_arcs_; ++scanned) {
      const long e = next_arc_;
      next_arc_ = (next_arc_ + 1 == real_arcs_) ? 0 : next_arc_ + 1;
      if (state_[e] == kLower) {
        const double rc = reduced_cost(e);
        if (rc < best_rc) {
          best_rc = rc;
          best = e;
        }
      }
      if (--remaining == 0) {
        if (best_rc < -eps_) return best;
        remaining = block_;
      }
    }
    return best_rc < -eps_ ? best : -1;
  }

  void pivot(long in_arc) {
    const int first = src_[in_arc];
    const int second = tgt_[in_arc];
    int u = first, v = second;
    while (u != v) {
      if (depth_[u] > depth_[v]) {
        u = parent_[u];
      } else if (depth_[v] > depth_[u]) {
        v = parent_[v];
      } else {
        u = parent_[u];
        v = parent_[v];
      }
    }
    const int join = u;

    double delta = std::numeric_limits<double>::infinity();
    int u_out = -1;
    for (int w = first; w != join; w = parent_[w]) {
      if (dir_[w] == kUp && flow_[pred_[w]] < delta) {
        delta = flow_[pred_[w]];
        u_out = w;
      }
    }
    for (int w = second; w != join; w = parent_[w]) {
      if (dir_[w] == kDown && flow_[pred_[w]] <= delta) {
        delta = flow_[pred_[w]];
        u_out = w;
      }
    }
    if (u_out < 0) throw SolverError("transportation problem is unbounded", 0.0);

    if (delta > 0.0) {
      flow_[in_arc] += delta;
      for (int w = first; w != join; w = parent_[w]) flow_[pred_[w]] -= dir_[w] * delta;
      for (int w = second; w != join; w = parent_[w]) flow_[pred_[w]] += dir_[w] * delta;
    }
    const long out_arc = pred_[u_out];
    flow_[out_arc] = 0.0;
    state_[out_arc] = kLower;
    state_[in_arc] = kTree;
    detach(src_[out_arc], out_arc);
    detach(tgt_[out_arc], out_arc);
    adjacency_[first].push_back(in_arc);
    adjacency_[second].push_back(in_arc);
    rebuild_tree();
  }

  void detach(int node, long arc) {
    auto& adj = adjacency_[node];
    const auto it = std::find(adj.begin(), adj.end(), arc);
    *it = adj.back();
    adj.pop_back();
  }

  void rebuild_tree() {
    order_.clear();
    order_.push_back(root_);
    parent_[root_] = -1;
    pred_[root_] = -1;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t h = 0; h < order_.size(); ++h) {
      const int u = order_[h];
      for (const long e : adjacency_[u]) {
        if (e == pred_[u]) continue;
        const int v = src_[e] == u ? tgt_[e] : src_[e];
        parent_[v] = u;
        pred_[v] = e;
        depth_[v] = depth_[u] + 1;
        if (src_[e] == v) {
          dir_[v] = kUp;
          pi_[v] = pi_[u] - cost_[e];
        } else {
          dir_[v] = kDown;
          pi_[v] = pi_[u] + cost_[e];
        }
        order_.push_back(v);
      }
    }
  }

  int m_, n_, nodes_, root_;
  long real_arcs_;
  long block_ = 10;
  long next_arc_ = 0;
  double eps_ = 0.0;

  std::vector<int> src_, tgt_;
  std::vector<double> cost_, flow_;
  std::vector<signed char> state_;

  std::vector<std::vector<long>> adjacency_;
  std::vector<int> parent_;
  std::vector<long> pred_;
  std::vector<signed char> dir_;
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<int> order_;
};

}  // namespace

NetworkSimplexResult network_simplex(std::span<const double> supply,
                                     std::span<const double> demand, const Matrix& cost) {
  if (supply.empty() || demand.empty()) {
    throw ValidationError("transportation problem needs nonempty supply and demand");
  }
  if (static_cast<std::size_t>(cost.rows()) != supply.size() ||
      static_cast<std::size_t>(cost.cols()) != demand.size()) {
    throw ValidationError("cost matrix shape does not match marginals");
  }
  TransportationSimplex simplex(supply, demand, cost);
  return simplex.run();
}

}  // namespace goat::detail
