#include "goat/geodesic.hpp"

#include <exception>
#include <optional>

namespace goat {

namespace {

WeightedDataset push_forward(const TransportPlan& plan, const WeightedDataset& source,
                             const WeightedDataset& target, double keep, double s) {
  if (plan.size() == 0) throw ValidationError("empty plan");
  if (plan.source_size() != source.size() || plan.target_size() != target.size()) {
    throw ValidationError("plan indices do not match the dataset sizes");
  }
  if (source.dim() != target.dim()) throw ValidationError("feature dimension mismatch");
  if (plan.size() > kMaxGeneratedSupport) {
    throw ValidationError("plan has " + std::to_string(plan.size()) +
                          " entries; apply a cutoff before generating domains");
  }
  const auto d = static_cast<Eigen::Index>(source.dim());
  Matrix points(static_cast<Eigen::Index>(plan.size()), d);
  Vector weights(static_cast<Eigen::Index>(plan.size()));
  Eigen::Index r = 0;
  for (const auto& e : plan.entries()) {
    points.row(r) = keep * source.points().row(e.source) + s * target.points().row(e.target);
    weights[r] = e.mass;
    ++r;
  }
  return WeightedDataset(std::move(points), std::move(weights));
}

}  // namespace

WeightedDataset interpolate_at(const TransportPlan& plan, const WeightedDataset& source,
                               const WeightedDataset& target, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("interpolation parameter outside [0, 1]");
  return push_forward(plan, source, target, 1.0 - s, s);
}

WeightedDataset interpolate(const TransportPlan& plan, const WeightedDataset& source,
                            const WeightedDataset& target, int t, int T) {
  if (T < 1 || t < 0 || t > T) throw ValidationError("need 0 <= t <= T and T >= 1");
  if (plan.size() == 0) throw ValidationError("empty plan");
  const double total = static_cast<double>(T);
  return push_forward(plan, source, target, static_cast<double>(T - t) / total,
                      static_cast<double>(t) / total);
}

std::vector<WeightedDataset> generate_from_plan(const TransportPlan& plan,
                                                const WeightedDataset& source,
                                                const WeightedDataset& target,
                                                std::size_t k) {
  std::vector<WeightedDataset> out;
  out.reserve(k);
  const int T = static_cast<int>(k) + 1;
  for (int t = 1; t < T; ++t) out.push_back(interpolate(plan, source, target, t, T));
  return out;
}

std::vector<WeightedDataset> generate_sequence(const WeightedDataset& source,
                                               const WeightedDataset& target, std::size_t k,
                                               const OtConfig& config,
                                               const LabelMatrix* source_labels) {
  if (k == 0) return {};
  config.validate();
  if (config.mode == OtMode::entropic && config.cutoff.kind == Cutoff::Kind::none) {
    throw ValidationError("entropic plans are dense; configure a cutoff before generation");
  }
  const TransportPlan plan = solve(source, target, config, source_labels);
  return generate_from_plan(plan, source, target, k);
}

DomainSequence pairwise_generate(const DomainSequence& seq, std::size_t k_per_pair,
                                 const PlanBuilder& build_plan) {
  if (k_per_pair == 0) return seq;
  const std::size_t pairs = seq.size() - 1;
  std::vector<std::vector<WeightedDataset>> generated(pairs);
  std::vector<std::exception_ptr> errors(pairs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t p = 0; p < pairs; ++p) {
    try {
      const TransportPlan plan = build_plan(seq[p], seq[p + 1], p);
      generated[p] = generate_from_plan(plan, seq[p], seq[p + 1], k_per_pair);
    } catch (...) {
      errors[p] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<WeightedDataset> domains;
  std::vector<Provenance> provenance;
  for (std::size_t p = 0; p < pairs; ++p) {
    domains.push_back(seq[p]);
    provenance.push_back(seq.provenance(p));
    for (auto& g : generated[p]) {
      domains.push_back(std::move(g));
      provenance.push_back(Provenance::generated);
    }
  }
  domains.push_back(seq.target());
  provenance.push_back(seq.provenance(seq.last()));
  return DomainSequence(std::move(domains), std::move(provenance), false);
}

DomainSequence pairwise_generate(const DomainSequence& seq, std::size_t k_per_pair,
                                 const OtConfig& config) {
  if (k_per_pair == 0) return seq;
  config.validate();
  if (config.mode == OtMode::entropic && config.cutoff.kind == Cutoff::Kind::none) {
    throw ValidationError("entropic plans are dense; configure a cutoff before generation");
  }
  std::optional<LabelMatrix> source_labels;
  if (config.cutoff.kind == Cutoff::Kind::confidence) {
    const auto& src = seq.source();
    source_labels.emplace(src.labels(), src.class_count());
  }
  return pairwise_generate(
      seq, k_per_pair,
      [&](const WeightedDataset& a, const WeightedDataset& b, std::size_t pair) {
        const LabelMatrix* labels =
            (pair == 0 && source_labels) ? &*source_labels : nullptr;
        return solve(a, b, config, labels);
      });
}

}  // namespace goat
