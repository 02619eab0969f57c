#include "goat/diagnostics.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include "goat/ot.hpp"

namespace goat {

PathLength path_length(std::span<const WeightedDataset> domains, double p) {
  if (domains.size() < 2) throw ValidationError("path length needs at least 2 domains");
  const std::size_t pairs = domains.size() - 1;
  PathLength out;
  out.distances.assign(pairs, 0.0);
  std::vector<std::exception_ptr> errors(pairs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < pairs; ++t) {
    try {
      out.distances[t] = wasserstein_p(domains[t], domains[t + 1], p);
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (double d : out.distances) out.total += d;
  return out;
}

PathLength path_length(const DomainSequence& seq, double p) {
  return path_length(std::span<const WeightedDataset>(seq.domains()), p);
}

double empirical_discrepancy(const DomainSequence& seq, std::span<const Classifier> candidates,
                             std::span<const double> q) {
  if (candidates.empty()) throw ValidationError("candidate set is empty");
  const std::size_t t = q.size();
  if (t == 0 || t > seq.size()) {
    throw ValidationError("q must have between 1 and " + std::to_string(seq.size()) + " entries");
  }
  double qsum = 0.0;
  for (double v : q) {
    if (!(v >= 0.0)) throw ValidationError("q entries must be nonnegative");
    qsum += v;
  }
  if (std::abs(qsum - 1.0) > kMassTolerance) throw ValidationError("q must sum to 1");
  for (std::size_t tau = 0; tau < t; ++tau) {
    if (!seq[tau].has_labels()) {
      throw ValidationError("domain " + std::to_string(tau) + " has no evaluation labels");
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& h : candidates) {
    std::vector<double> err(t);
    for (std::size_t tau = 0; tau < t; ++tau) err[tau] = 1.0 - accuracy(h, seq[tau]);
    double mixed = 0.0;
    for (std::size_t tau = 0; tau < t; ++tau) mixed += q[tau] * err[tau];
    best = std::max(best, err[t - 1] - mixed);
  }
  return best;
}

std::vector<Classifier> linear_candidate_grid(int input_dim, int directions,
                                              std::span<const double> offsets) {
  if (input_dim < 1 || directions < 1 || offsets.empty()) {
    throw ValidationError("candidate grid needs input_dim, directions and offsets");
  }
  const ModelSpec spec{Architecture::linear, 0};
  std::vector<Classifier> out;
  for (int k = 0; k < directions; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / directions;
    for (double offset : offsets) {
      // Class 1 column carries the normal; class 0 stays zero.
      std::vector<double> params(Classifier::parameter_count(spec, input_dim, 2), 0.0);
      params[1] = std::cos(angle);
      if (input_dim > 1) params[3] = std::sin(angle);
      params[static_cast<std::size_t>(2 * input_dim) + 1] = -offset;
      out.emplace_back(spec, input_dim, 2, std::move(params));
    }
  }
  return out;
}

double optimal_T(double L, double delta_max, long n) {
  if (!(delta_max > 0.0)) throw ValidationError("Δmax must be positive");
  if (!(L >= 0.0)) throw ValidationError("L must be nonnegative");
  if (n < 1) throw ValidationError("n must be positive");
  const double order =
      std::pow(1.0 / (2.0 * (1.0 + delta_max * std::sqrt(static_cast<double>(n)))), 2.0 / 3.0);
  return std::max(L / delta_max, order);
}

long rounded_T(double t_star) { return std::max(1L, std::lround(t_star)); }

void BoundInputs::validate() const {
  if (T < 1) throw ValidationError("T must be positive");
  if (n < 1) throw ValidationError("n must be positive");
  if (!(Delta >= 0.0)) throw ValidationError("Delta must be nonnegative");
  if (!(rho > 0.0)) throw ValidationError("rho must be positive");
  if (!(R >= 0.0)) throw ValidationError("R must be nonnegative");
  if (!(epsilon0 >= 0.0)) throw ValidationError("epsilon0 must be nonnegative");
}

std::vector<BoundTerm> bound_terms(const BoundInputs& in) {
  in.validate();
  const double T = static_cast<double>(in.T);
  const double n = static_cast<double>(in.n);
  const std::string order = "order-level, constants not specified";
  return {
      {"epsilon0", in.epsilon0, true, "source error of h0"},
      {"disc", in.rho * std::sqrt(in.R * in.R + 1.0) * (T + 1.0) * in.Delta / 2.0, true,
       "rho sqrt(R^2 + 1) (T + 1) Delta / 2"},
      {"T*Delta", T * in.Delta, false, order},
      {"T/sqrt(n)", T / std::sqrt(n), false, order},
      {"1/sqrt(n*T)", 1.0 / std::sqrt(n * T), false, order},
  };
}

double LinearScorer::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return x.dot(w.transpose()) + b;
}

LinearScorer scorer_of(const Classifier& h) {
  if (h.architecture() != Architecture::linear || h.class_count() != 2) {
    throw ValidationError("scalar scorer needs a linear binary classifier");
  }
  const auto w = h.weight(0);
  const auto b = h.bias(0);
  return {w.col(1) - w.col(0), b[1] - b[0]};
}

namespace {

std::vector<double> signed_labels(const WeightedDataset& data) {
  if (!data.has_labels()) throw ValidationError("lemma check needs labeled datasets");
  std::vector<double> y;
  for (int label : data.evaluation_labels()) {
    if (label != 0 && label != 1) {
      throw ValidationError("lemma check needs binary labels, found class " +
                            std::to_string(label));
    }
    y.push_back(label == 1 ? 1.0 : -1.0);
  }
  return y;
}

double expected_loss(const WeightedDataset& data, const std::vector<double>& y,
                     const LinearScorer& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    s += data.weights()[r] * std::abs(h(data.points().row(r)) - y[i]);
  }
  return s;
}

}  // namespace

Lemma1Result lemma1_check(const WeightedDataset& mu, const WeightedDataset& nu,
                          const LinearScorer& h) {
  if (mu.dim() != nu.dim() || static_cast<std::size_t>(h.w.size()) != mu.dim()) {
    throw ValidationError("feature dimension mismatch");
  }
  const auto ymu = signed_labels(mu);
  const auto ynu = signed_labels(nu);
  const double lhs = std::abs(expected_loss(mu, ymu, h) - expected_loss(nu, ynu, h));

  Matrix joint(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(nu.size()));
  for (Eigen::Index i = 0; i < joint.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint.cols(); ++j) {
      joint(i, j) = (mu.points().row(i) - nu.points().row(j)).norm() +
                    std::abs(ymu[static_cast<std::size_t>(i)] - ynu[static_cast<std::size_t>(j)]);
    }
  }
  const CostMatrix cost(std::move(joint), 1.0);
  const double w1 = transport_cost(solve_exact(mu.weights(), nu.weights(), cost), cost);
  const double R = h.lipschitz();
  const double rhs = std::sqrt(R * R + 1.0) * w1;
  return {lhs, rhs, w1, R, lhs <= rhs + 1e-9};
}

}  // namespace goat
