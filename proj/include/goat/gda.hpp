// Self-training along a domain sequence, and the generate-then-adapt pipeline.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goat/core.hpp"
#include "goat/encoder.hpp"
#include "goat/model.hpp"
#include "goat/ot.hpp"

namespace goat {

/// Which coupling feeds the generator.
enum class PlanKind { optimal, random, uniform, oracle };

const char* to_string(PlanKind kind);
PlanKind parse_plan_kind(std::string_view text);

struct GoatConfig {
  std::size_t generated_per_pair = 0;
  OtConfig ot_config{};
  PlanKind plan = PlanKind::optimal;
  EncoderMode encoder_mode = EncoderMode::identity;
  EncoderOptions encoder{};
  ModelSpec model{};
  double drop_fraction = 0.1;
  /// Fit of h0 on the labeled source.
  TrainConfig source_train{.epochs = 50};
  /// Each self-training step.
  TrainConfig train_config{};
  /// Overrides train_config.use_plan_weights during adaptation.
  bool use_plan_weights = true;
  /// Path length and T* in the report; costs one exact solve per pair.
  bool report_path_length = true;

  void validate() const;
};

struct StageReport {
  std::size_t stage = 0;
  Provenance provenance = Provenance::given;
  std::size_t size = 0;
  std::size_t retained = 0;
  double training_loss = 0.0;
  /// Against evaluation-only labels, when the domain has them.
  std::optional<double> accuracy;
  /// Pseudo-labels collapsed to one class; the previous model was kept.
  bool collapsed = false;
};

/// Drops the floor(drop_fraction * n) least-confident samples (on equal
/// confidence the higher index goes first), labels the rest with predict(h),
/// and renormalizes their weights. The result carries no audit tag.
WeightedDataset pseudo_label_filtered(const Classifier& h, const WeightedDataset& data,
                                      double drop_fraction);

struct SelfTrainResult {
  Classifier model;
  StageReport report;
  std::vector<std::string> warnings;
};

/// One warm-started ERM step on filtered pseudo-labels. Never reads labels
/// attached to data.
SelfTrainResult self_train_detailed(const Classifier& h, const WeightedDataset& data,
                                    const GoatConfig& config, std::uint64_t seed);
Classifier self_train(const Classifier& h, const WeightedDataset& data, const GoatConfig& config);

struct GradualResult {
  Classifier model;
  std::vector<StageReport> stages;
  std::vector<std::string> warnings;
};

/// h_t = self_train(h_{t-1}, S_t) for t = 1..T.
GradualResult gradual_self_train(const Classifier& h0, const DomainSequence& seq,
                                 const GoatConfig& config);

/// Generated sequence for the configured plan kind. Oracle plans need a
/// sequence with point correspondence.
DomainSequence expand_sequence(const DomainSequence& given, const GoatConfig& config,
                               std::uint64_t seed);

struct ExperimentReport {
  std::size_t given_intermediates = 0;
  std::size_t generated_per_pair = 0;
  std::size_t domain_count = 0;
  double source_accuracy = 0.0;
  double target_accuracy = 0.0;
  /// Over the trained (expanded, encoded) sequence.
  double path_length = 0.0;
  std::vector<double> pair_distances;
  double optimal_T = 0.0;
  long label_reads = 0;
  std::vector<StageReport> stages;
  std::vector<std::string> warnings;
};

struct PipelineResult {
  Classifier model;
  ExperimentReport report;
  Encoder encoder;
};

/// Encode, fit h0 on the source, generate between consecutive given domains,
/// then gradually self-train over the expanded sequence. intermediates and
/// target may carry labels; they are used for scoring only.
PipelineResult goat_pipeline(const WeightedDataset& source,
                             std::span<const WeightedDataset> intermediates,
                             const WeightedDataset& target, const GoatConfig& config,
                             std::uint64_t seed = 0, bool has_correspondence = false);
PipelineResult goat_pipeline(const DomainSequence& given, const GoatConfig& config,
                             std::uint64_t seed = 0);

struct SelectKResult {
  std::size_t k = 0;
  std::vector<double> validation_accuracy;  // one per candidate
  PipelineResult best;
};

/// Picks k by agreement with pseudo-labels on a held-out validation subset:
/// the 20% of target points on which the candidates' averaged prediction is
/// most confident, labeled by that average. Ties keep the earlier candidate.
SelectKResult select_k(const DomainSequence& given, const GoatConfig& config,
                       std::span<const std::size_t> candidates, std::uint64_t seed = 0);

}  // namespace goat
