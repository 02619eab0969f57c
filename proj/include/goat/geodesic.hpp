// Intermediate domains along the displacement interpolation of a coupling.
#pragma once

#include <functional>
#include <vector>

#include "goat/core.hpp"
#include "goat/ot.hpp"

namespace goat {

/// Largest plan the generator will expand into a domain.
inline constexpr std::size_t kMaxGeneratedSupport = 1'000'000;

/// Push-forward of the plan under (x, y) -> ((T - t) / T) x + (t / T) y: one
/// point per plan entry, weighted by its mass, unlabeled.
WeightedDataset interpolate(const TransportPlan& plan, const WeightedDataset& source,
                            const WeightedDataset& target, int t, int T);

/// Real-parameter variant, s in [0, 1].
WeightedDataset interpolate_at(const TransportPlan& plan, const WeightedDataset& source,
                               const WeightedDataset& target, double s);

/// Interpolations at t = 1..k with T = k + 1 from an already computed plan.
std::vector<WeightedDataset> generate_from_plan(const TransportPlan& plan,
                                                const WeightedDataset& source,
                                                const WeightedDataset& target,
                                                std::size_t k);

/// Solves OT per config (with its cutoff), then returns the k interior
/// interpolations. Entropic mode requires a cutoff. source_labels feeds the
/// confidence cutoff and may be null otherwise.
std::vector<WeightedDataset> generate_sequence(const WeightedDataset& source,
                                               const WeightedDataset& target, std::size_t k,
                                               const OtConfig& config,
                                               const LabelMatrix* source_labels = nullptr);

/// Builds the plan for the consecutive pair (source, target) at position pair.
using PlanBuilder = std::function<TransportPlan(
    const WeightedDataset& source, const WeightedDataset& target, std::size_t pair)>;

/// Inserts k generated domains between every consecutive pair, keeping the
/// given domains and their order. Pairs are solved concurrently; results are
/// merged in pair order.
DomainSequence pairwise_generate(const DomainSequence& seq, std::size_t k_per_pair,
                                 const PlanBuilder& build_plan);

/// OT plans per config. The confidence cutoff is only available on the first
/// pair, whose source carries training labels.
DomainSequence pairwise_generate(const DomainSequence& seq, std::size_t k_per_pair,
                                 const OtConfig& config);

}  // namespace goat
