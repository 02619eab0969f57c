#include <cmath>
#include <sstream>
#include <vector>

#include "goat/kernels.hpp"
#include "goat/ot.hpp"

namespace goat {
namespace {

struct Support {
  std::vector<int> index;  // compressed -> original
  Vector weights;
};

Support positive_support(const Vector& w) {
  Support s;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) s.index.push_back(static_cast<int>(i));
  }
  s.weights.resize(static_cast<Eigen::Index>(s.index.size()));
  for (std::size_t k = 0; k < s.index.size(); ++k) {
    s.weights[static_cast<Eigen::Index>(k)] = w[s.index[k]];
  }
  return s;
}

struct Underflow {};

struct ScalingOutcome {
  Matrix plan;
  int iterations;
  double residual;
};

double row_residual(const Vector& row_sums, const Vector& a) {
  return (row_sums - a).cwiseAbs().maxCoeff();
}

ScalingOutcome linear_scaling(const Vector& a, const Vector& b, const Matrix& cost,
                              const EntropicOptions& opt) {
  const Matrix kernel = (-cost.array() / opt.lambda).exp().matrix();
  const Matrix kernel_t = kernel.transpose();
  if ((kernel.rowwise().sum().array() <= 0.0).any() ||
      (kernel.colwise().sum().array() <= 0.0).any()) {
    throw Underflow{};
  }
  Vector u = Vector::Ones(a.size());
  Vector v = Vector::Ones(b.size());
  Vector kv;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < opt.max_iterations) {
    ++it;
    kernels::parallel::scaling_update(kernel, a, v, u);
    kernels::parallel::scaling_update(kernel_t, b, u, v);
    if (!u.allFinite() || !v.allFinite() || (u.array() <= 0.0).any() ||
        (v.array() <= 0.0).any()) {
      throw Underflow{};
    }
    kv = kernel * v;
    residual = row_residual(u.cwiseProduct(kv), a);
    if (residual <= opt.tol) break;
  }
  Matrix plan = u.asDiagonal() * kernel * v.asDiagonal();
  return {std::move(plan), it, residual};
}

ScalingOutcome log_scaling(const Vector& a, const Vector& b, const Matrix& cost,
                          const EntropicOptions& opt) {
  const Matrix cost_t = cost.transpose();
  const Vector log_a = a.array().log().matrix();
  const Vector log_b = b.array().log().matrix();
  Vector f = Vector::Zero(a.size());
  Vector g = Vector::Zero(b.size());
  Vector rows;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < opt.max_iterations) {
    ++it;
    kernels::parallel::softmin_update(cost, g, log_a, opt.lambda, f);
    kernels::parallel::softmin_update(cost_t, f, log_b, opt.lambda, g);
    kernels::parallel::log_plan_row_sums(cost, f, g, opt.lambda, rows);
    residual = row_residual(rows, a);
    if (!std::isfinite(residual)) {
      throw SolverError("log-domain scaling produced a non-finite residual", residual);
    }
    if (residual <= opt.tol) break;
  }
  Matrix plan(cost.rows(), cost.cols());
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / opt.lambda);
    }
  }
  return {std::move(plan), it, residual};
}

}  // namespace

EntropicResult solve_entropic_detailed(const Vector& source_weights,
                                       const Vector& target_weights, const CostMatrix& cost,
                                       const EntropicOptions& options) {
  if (!(options.lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (options.max_iterations < 1) throw ValidationError("max_iterations must be positive");
  if (!(options.tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (cost.rows() != static_cast<std::size_t>(source_weights.size()) ||
      cost.cols() != static_cast<std::size_t>(target_weights.size())) {
    throw ValidationError("cost matrix shape does not match weights");
  }
  const Support rs = positive_support(source_weights);
  const Support cs = positive_support(target_weights);
  if (rs.index.empty() || cs.index.empty()) throw ValidationError("zero total mass");
  Matrix sub(static_cast<Eigen::Index>(rs.index.size()),
             static_cast<Eigen::Index>(cs.index.size()));
  for (std::size_t i = 0; i < rs.index.size(); ++i) {
    for (std::size_t j = 0; j < cs.index.size(); ++j) {
      sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cost(static_cast<std::size_t>(rs.index[i]), static_cast<std::size_t>(cs.index[j]));
    }
  }

  bool use_log = options.stabilization == Stabilization::log;
  if (options.stabilization == Stabilization::automatic) {
    use_log = options.lambda < 1e-2 * median_cost(cost);
  }
  ScalingOutcome out;
  if (use_log) {
    out = log_scaling(rs.weights, cs.weights, sub, options);
  } else {
    try {
      out = linear_scaling(rs.weights, cs.weights, sub, options);
    } catch (const Underflow&) {
      if (options.stabilization == Stabilization::linear) {
        throw SolverError(
            "linear-domain scaling underflowed at this lambda; retry with log-domain "
            "stabilization",
            std::numeric_limits<double>::infinity());
      }
      use_log = true;
      out = log_scaling(rs.weights, cs.weights, sub, options);
    }
  }
  if (!(out.residual <= options.tol)) {
    std::ostringstream os;
    os << "entropic solver did not converge in " << options.max_iterations
       << " iterations; marginal residual " << out.residual;
    throw SolverError(os.str(), out.residual);
  }

  std::vector<PlanEntry> entries;
  entries.reserve(static_cast<std::size_t>(out.plan.size()));
  for (Eigen::Index i = 0; i < out.plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.plan.cols(); ++j) {
      const double mass = out.plan(i, j);
      if (mass > 0.0) {
        entries.push_back({rs.index[static_cast<std::size_t>(i)],
                           cs.index[static_cast<std::size_t>(j)], mass});
      }
    }
  }
  TransportPlan plan(cost.rows(), cost.cols(), std::move(entries));
  return {std::move(plan), out.iterations, out.residual, use_log};
}

TransportPlan solve_entropic(const Vector& source_weights, const Vector& target_weights,
                             const CostMatrix& cost, double lambda, int max_iterations,
                             double tol) {
  EntropicOptions opt;
  opt.lambda = lambda;
  opt.max_iterations = max_iterations;
  opt.tol = tol;
  return solve_entropic_detailed(source_weights, target_weights, cost, opt).plan;
}

}  // namespace goat
