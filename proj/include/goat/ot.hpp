// Discrete optimal transport between weighted point sets.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "goat/core.hpp"

namespace goat {

/// Dense m x n matrix of ||a_i - b_j||_2^p under the Euclidean ground metric.
class CostMatrix {
 public:
  CostMatrix(Matrix values, double p);
  const Matrix& values() const { return values_; }
  double p() const { return p_; }
  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  Matrix values_;
  double p_;
};

CostMatrix cost_matrix(const WeightedDataset& source, const WeightedDataset& target,
                       double p = 2.0);

double median_cost(const CostMatrix& cost);

/// Sum of mass * cost over plan entries.
double transport_cost(const TransportPlan& plan, const CostMatrix& cost);

enum class OtMode { exact, entropic };

/// linear: plain scaling, fails on underflow. log: stabilized log-domain
/// scaling. automatic: log-domain when lambda < 1e-2 * median cost, else linear
/// with a log-domain retry on underflow.
enum class Stabilization { automatic, linear, log };

struct Cutoff {
  enum class Kind { none, top_k, threshold, confidence };
  Kind kind = Kind::top_k;
  /// top_k only; unset means m + n.
  std::optional<std::size_t> k;
  /// threshold tau, or confidence c_min.
  double value = 0.0;

  static Cutoff none() { return {Kind::none, std::nullopt, 0.0}; }
  static Cutoff top_k(std::optional<std::size_t> k = std::nullopt) {
    return {Kind::top_k, k, 0.0};
  }
  static Cutoff threshold(double tau) { return {Kind::threshold, std::nullopt, tau}; }
  static Cutoff confidence(double c_min) { return {Kind::confidence, std::nullopt, c_min}; }

  /// Parses "none", "top_k", "top_k:K", "threshold:T", "confidence:C".
  static Cutoff parse(const std::string& text);
  std::string to_string() const;
};

struct OtConfig {
  OtMode mode = OtMode::exact;
  double p = 2.0;
  double lambda = 0.0;
  int max_iterations = 100000;
  double convergence_tol = 1e-9;
  Stabilization stabilization = Stabilization::automatic;
  Cutoff cutoff = Cutoff::top_k();

  /// Throws ValidationError on violated invariants.
  void validate() const;
};

/// Network simplex on the bipartite transportation polytope. Returns a vertex
/// of the feasible set, so at most m + n - 1 entries. Zero-weight points are
/// dropped before solving and never appear in the plan.
TransportPlan solve_exact(const Vector& source_weights, const Vector& target_weights,
                          const CostMatrix& cost);

struct EntropicOptions {
  double lambda = 1.0;
  int max_iterations = 100000;
  double tol = 1e-9;
  Stabilization stabilization = Stabilization::automatic;
};

struct EntropicResult {
  TransportPlan plan;
  int iterations;
  /// Largest absolute marginal deviation at exit.
  double residual;
  bool log_domain;
};

/// Minimizes <gamma, C> + lambda * sum gamma log gamma subject to both
/// marginals. Throws SolverError when max_iterations is reached without the
/// residual dropping below tol, or when linear-domain scaling underflows.
EntropicResult solve_entropic_detailed(const Vector& source_weights,
                                       const Vector& target_weights, const CostMatrix& cost,
                                       const EntropicOptions& options);

TransportPlan solve_entropic(const Vector& source_weights, const Vector& target_weights,
                             const CostMatrix& cost, double lambda, int max_iterations,
                             double tol);

/// Keeps the min(k, size) heaviest entries (ties by (i, j)) or those with mass
/// strictly above tau, then rescales to total mass 1.
TransportPlan small_value_cutoff(const TransportPlan& plan, const Cutoff& keep);

/// Drops every target column whose transported-label confidence
/// max_c (gamma^T Y)_jc / sum_c (gamma^T Y)_jc is below c_min.
TransportPlan confidence_cutoff(const TransportPlan& plan, const LabelMatrix& source_labels,
                                double c_min);

/// Applies a configured cutoff. The default top_k resolves k to m + n.
TransportPlan apply_cutoff(const TransportPlan& plan, const Cutoff& cutoff,
                           const LabelMatrix* source_labels);

/// Solves per config (exact or entropic) and applies the configured cutoff.
TransportPlan solve(const WeightedDataset& source, const WeightedDataset& target,
                    const OtConfig& config, const LabelMatrix* source_labels = nullptr);

/// (exact OT objective under cost ||.||^p)^(1/p).
double wasserstein_p(const WeightedDataset& a, const WeightedDataset& b, double p = 2.0);

/// nnz distinct cells sampled uniformly without replacement, masses uniform(0,1)
/// then normalized. Marginals are not constrained.
TransportPlan make_random_plan(std::size_t m, std::size_t n, std::size_t nnz,
                               std::uint64_t seed);
/// Same cell sampling as make_random_plan with equal masses 1/nnz.
TransportPlan make_uniform_plan(std::size_t m, std::size_t n, std::size_t nnz,
                                std::uint64_t seed);
/// Mass 1/|mapping| on each listed pair. Sizes default to 1 + the largest index.
TransportPlan make_oracle_plan(const std::vector<std::pair<int, int>>& mapping,
                               std::size_t m = 0, std::size_t n = 0);

}  // namespace goat
