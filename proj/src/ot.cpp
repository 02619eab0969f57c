#include "goat/ot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "goat/kernels.hpp"
#include "network_simplex.hpp"

namespace goat {

CostMatrix::CostMatrix(Matrix values, double p) : values_(std::move(values)), p_(p) {
  if (!(p_ >= 1.0)) throw ValidationError("exponent p must be >= 1");
  if (!values_.allFinite() || (values_.array() < 0.0).any()) {
    throw ValidationError("cost entries must be finite and nonnegative");
  }
}

CostMatrix cost_matrix(const WeightedDataset& source, const WeightedDataset& target,
                       double p) {
  if (source.dim() != target.dim()) {
    throw ValidationError("feature dimension mismatch: " + std::to_string(source.dim()) +
                          " vs " + std::to_string(target.dim()));
  }
  if (!(p >= 1.0)) throw ValidationError("exponent p must be >= 1");
  Matrix values;
  kernels::parallel::pairwise_cost(source.points(), target.points(), p, values);
  return CostMatrix(std::move(values), p);
}

double median_cost(const CostMatrix& cost) {
  std::vector<double> v(cost.values().data(), cost.values().data() + cost.values().size());
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double med = *mid;
  if (v.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(v.begin(), mid));
  }
  return med > 0.0 ? med : cost.values().maxCoeff();
}

double transport_cost(const TransportPlan& plan, const CostMatrix& cost) {
  double s = 0.0;
  for (const auto& e : plan.entries()) {
    s += e.mass * cost(static_cast<std::size_t>(e.source), static_cast<std::size_t>(e.target));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Configuration

Cutoff Cutoff::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto number = [&]() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (arg.empty() || used != arg.size()) {
      throw ValidationError("cutoff '" + text + "' needs a numeric argument");
    }
    return v;
  };
  if (kind == "none" && arg.empty()) return none();
  if (kind == "top_k") {
    if (arg.empty()) return top_k();
    const double k = number();
    if (k < 1 || k != std::floor(k)) throw ValidationError("top_k needs a positive integer");
    return top_k(static_cast<std::size_t>(k));
  }
  if (kind == "threshold") return threshold(number());
  if (kind == "confidence") return confidence(number());
  throw ValidationError("unknown cutoff '" + text + "'");
}

std::string Cutoff::to_string() const {
  // Shortest text that parses back to the same double.
  const auto real = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  switch (kind) {
    case Kind::none: return "none";
    case Kind::top_k: return k ? "top_k:" + std::to_string(*k) : "top_k";
    case Kind::threshold: return "threshold:" + real(value);
    case Kind::confidence: return "confidence:" + real(value);
  }
  return "none";
}

void OtConfig::validate() const {
  if (!(p >= 1.0)) throw ValidationError("ot.p must be >= 1");
  if (mode == OtMode::entropic && !(lambda > 0.0)) {
    throw ValidationError("ot.lambda must be positive in entropic mode");
  }
  if (max_iterations < 1) throw ValidationError("ot.max_iterations must be positive");
  if (!(convergence_tol > 0.0)) throw ValidationError("ot.convergence_tol must be positive");
  if (cutoff.kind == Cutoff::Kind::confidence && !(cutoff.value > 0.0 && cutoff.value < 1.0)) {
    throw ValidationError("confidence cutoff c_min must lie in (0, 1)");
  }
  if (cutoff.kind == Cutoff::Kind::threshold && !(cutoff.value >= 0.0)) {
    throw ValidationError("threshold cutoff must be nonnegative");
  }
  if (cutoff.kind == Cutoff::Kind::top_k && cutoff.k && *cutoff.k == 0) {
    throw ValidationError("cutoff removes all mass");
  }
}

// ---------------------------------------------------------------------------
// Solvers

TransportPlan solve_exact(const Vector& source_weights, const Vector& target_weights,
                          const CostMatrix& cost) {
  if (cost.rows() != static_cast<std::size_t>(source_weights.size()) ||
      cost.cols() != static_cast<std::size_t>(target_weights.size())) {
    throw ValidationError("cost matrix shape does not match weights");
  }
  if (std::abs(source_weights.sum() - 1.0) > kMassTolerance ||
      std::abs(target_weights.sum() - 1.0) > kMassTolerance) {
    throw ValidationError("weights must be normalized");
  }
  std::vector<int> rows, cols;
  std::vector<double> supply, demand;
  for (Eigen::Index i = 0; i < source_weights.size(); ++i) {
    if (source_weights[i] < 0.0) throw ValidationError("negative source weight");
    if (source_weights[i] > 0.0) {
      rows.push_back(static_cast<int>(i));
      supply.push_back(source_weights[i]);
    }
  }
  for (Eigen::Index j = 0; j < target_weights.size(); ++j) {
    if (target_weights[j] < 0.0) throw ValidationError("negative target weight");
    if (target_weights[j] > 0.0) {
      cols.push_back(static_cast<int>(j));
      demand.push_back(target_weights[j]);
    }
  }
  Matrix sub(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cost(static_cast<std::size_t>(rows[i]), static_cast<std::size_t>(cols[j]));
    }
  }
  const auto solved = detail::network_simplex(supply, demand, sub);
  std::vector<PlanEntry> entries;
  entries.reserve(solved.arcs.size());
  for (const auto& a : solved.arcs) {
    entries.push_back({rows[static_cast<std::size_t>(a.source)],
                       cols[static_cast<std::size_t>(a.target)], a.flow});
  }
  return TransportPlan(cost.rows(), cost.cols(), std::move(entries));
}

// ---------------------------------------------------------------------------
// Cutoffs

TransportPlan small_value_cutoff(const TransportPlan& plan, const Cutoff& keep) {
  std::vector<PlanEntry> kept;
  if (keep.kind == Cutoff::Kind::top_k) {
    const std::size_t k = keep.k.value_or(plan.source_size() + plan.target_size());
    if (k == 0) throw ValidationError("cutoff removes all mass");
    kept = plan.entries();
    // Entries arrive sorted by (i, j); a stable sort on mass keeps that order on ties.
    std::stable_sort(kept.begin(), kept.end(),
                     [](const PlanEntry& a, const PlanEntry& b) { return a.mass > b.mass; });
    if (kept.size() > k) kept.resize(k);
  } else if (keep.kind == Cutoff::Kind::threshold) {
    double max_mass = 0.0;
    for (const auto& e : plan.entries()) max_mass = std::max(max_mass, e.mass);
    if (keep.value >= max_mass) throw ValidationError("cutoff removes all mass");
    for (const auto& e : plan.entries()) {
      if (e.mass > keep.value) kept.push_back(e);
    }
  } else if (keep.kind == Cutoff::Kind::none) {
    return plan;
  } else {
    throw ValidationError("small_value_cutoff accepts top_k or threshold");
  }
  return renormalized(plan.source_size(), plan.target_size(), std::move(kept));
}

TransportPlan confidence_cutoff(const TransportPlan& plan, const LabelMatrix& source_labels,
                                double c_min) {
  if (source_labels.rows() != plan.source_size()) {
    throw ValidationError("label matrix rows must equal plan source size");
  }
  if (!(c_min >= 0.0 && c_min <= 1.0)) throw ValidationError("c_min must lie in [0, 1]");
  const int classes = source_labels.class_count();
  Matrix transported = Matrix::Zero(static_cast<Eigen::Index>(plan.target_size()), classes);
  for (const auto& e : plan.entries()) {
    transported.row(e.target) += e.mass * source_labels.values().row(e.source);
  }
  std::vector<char> keep_column(plan.target_size(), 1);
  for (Eigen::Index j = 0; j < transported.rows(); ++j) {
    const double total = transported.row(j).sum();
    if (total <= 0.0) continue;
    const double confidence = transported.row(j).maxCoeff() / total;
    if (confidence < c_min) keep_column[static_cast<std::size_t>(j)] = 0;
  }
  std::vector<PlanEntry> kept;
  for (const auto& e : plan.entries()) {
    if (keep_column[static_cast<std::size_t>(e.target)]) kept.push_back(e);
  }
  if (kept.empty()) throw ValidationError("no confident targets");
  return renormalized(plan.source_size(), plan.target_size(), std::move(kept));
}

TransportPlan apply_cutoff(const TransportPlan& plan, const Cutoff& cutoff,
                           const LabelMatrix* source_labels) {
  switch (cutoff.kind) {
    case Cutoff::Kind::none: return plan;
    case Cutoff::Kind::top_k:
    case Cutoff::Kind::threshold: return small_value_cutoff(plan, cutoff);
    case Cutoff::Kind::confidence:
      if (source_labels == nullptr) {
        throw ValidationError("confidence cutoff requires labels on the transport source");
      }
      return confidence_cutoff(plan, *source_labels, cutoff.value);
  }
  return plan;
}

TransportPlan solve(const WeightedDataset& source, const WeightedDataset& target,
                    const OtConfig& config, const LabelMatrix* source_labels) {
  config.validate();
  const CostMatrix cost = cost_matrix(source, target, config.p);
  if (config.mode == OtMode::exact) {
    return apply_cutoff(solve_exact(source.weights(), target.weights(), cost), config.cutoff,
                        source_labels);
  }
  EntropicOptions opt;
  opt.lambda = config.lambda;
  opt.max_iterations = config.max_iterations;
  opt.tol = config.convergence_tol;
  opt.stabilization = config.stabilization;
  const auto dense = solve_entropic_detailed(source.weights(), target.weights(), cost, opt);
  return apply_cutoff(dense.plan, config.cutoff, source_labels);
}

double wasserstein_p(const WeightedDataset& a, const WeightedDataset& b, double p) {
  const CostMatrix cost = cost_matrix(a, b, p);
  const double objective = transport_cost(solve_exact(a.weights(), b.weights(), cost), cost);
  return std::pow(std::max(0.0, objective), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Ablation plans

namespace {

std::vector<std::size_t> sample_cells(std::size_t m, std::size_t n, std::size_t nnz,
                                      std::uint64_t seed) {
  if (m == 0 || n == 0) throw ValidationError("plan dimensions must be positive");
  if (nnz == 0) throw ValidationError("nnz must be positive");
  const std::size_t cells = m * n;
  if (nnz > cells) throw ValidationError("nnz exceeds m * n");
  // Floyd's sampling without replacement.
  Rng rng(seed);
  std::set<std::size_t> chosen;
  for (std::size_t j = cells - nnz; j < cells; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

TransportPlan make_random_plan(std::size_t m, std::size_t n, std::size_t nnz,
                               std::uint64_t seed) {
  const auto cells = sample_cells(m, n, nnz, seed);
  Rng rng(mix_seed(seed, 1));
  std::vector<PlanEntry> entries;
  entries.reserve(cells.size());
  for (const auto c : cells) {
    entries.push_back({static_cast<int>(c / n), static_cast<int>(c % n), 1.0 - rng.uniform()});
  }
  return renormalized(m, n, std::move(entries));
}

TransportPlan make_uniform_plan(std::size_t m, std::size_t n, std::size_t nnz,
                                std::uint64_t seed) {
  const auto cells = sample_cells(m, n, nnz, seed);
  std::vector<PlanEntry> entries;
  entries.reserve(cells.size());
  const double mass = 1.0 / static_cast<double>(cells.size());
  for (const auto c : cells) {
    entries.push_back({static_cast<int>(c / n), static_cast<int>(c % n), mass});
  }
  return renormalized(m, n, std::move(entries));
}

TransportPlan make_oracle_plan(const std::vector<std::pair<int, int>>& mapping, std::size_t m,
                               std::size_t n) {
  if (mapping.empty()) throw ValidationError("oracle mapping is empty");
  std::set<int> sources, targets;
  int max_i = 0, max_j = 0;
  for (const auto& [i, j] : mapping) {
    if (i < 0 || j < 0) throw ValidationError("oracle mapping has negative index");
    if (!sources.insert(i).second || !targets.insert(j).second) {
      throw ValidationError("oracle mapping is not injective");
    }
    max_i = std::max(max_i, i);
    max_j = std::max(max_j, j);
  }
  if (m == 0) m = static_cast<std::size_t>(max_i) + 1;
  if (n == 0) n = static_cast<std::size_t>(max_j) + 1;
  const double mass = 1.0 / static_cast<double>(mapping.size());
  std::vector<PlanEntry> entries;
  entries.reserve(mapping.size());
  for (const auto& [i, j] : mapping) entries.push_back({i, j, mass});
  return renormalized(m, n, std::move(entries));
}

}  // namespace goat
