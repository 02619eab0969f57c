// Feature maps applied to every domain before transport and training.
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goat/core.hpp"
#include "goat/model.hpp"

namespace goat {

enum class EncoderMode { identity, standardize, hidden };

const char* to_string(EncoderMode mode);
EncoderMode parse_encoder_mode(std::string_view text);

struct EncoderOptions {
  int hidden_width = 32;
  /// h0 training for the hidden encoder.
  TrainConfig source_train{.epochs = 50};
  /// Per-domain self-training for the hidden encoder.
  TrainConfig adapt_train{};
  double drop_fraction = 0.1;
};

class Encoder {
 public:
  static Encoder identity();
  static Encoder standardize(Vector mean, Vector scale, std::vector<std::string> warnings = {});
  static Encoder hidden(Classifier network);

  EncoderMode mode() const { return mode_; }
  /// -1 for identity (dimension preserving).
  int output_dim() const;
  const Vector& mean() const { return mean_; }
  const Vector& scale() const { return scale_; }
  /// The trained network behind a hidden encoder.
  const Classifier& network() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

  Matrix encode_points(const Matrix& points) const;
  /// Same weights and labels (audit tag included), encoded locations.
  WeightedDataset encode(const WeightedDataset& data) const;

 private:
  EncoderMode mode_ = EncoderMode::identity;
  Vector mean_;
  Vector scale_;
  std::vector<Classifier> network_;  // zero or one
  std::vector<std::string> warnings_;
};

/// identity: nothing. standardize: pooled z-scores (population std). hidden:
/// an mlp adapted by gradual self-training over domains (domains[0] labeled),
/// exposing its hidden activations.
Encoder fit_encoder(std::span<const WeightedDataset> domains, EncoderMode mode,
                    const EncoderOptions& options = {});

std::string serialize(const Encoder& e);
Encoder deserialize_encoder(std::string_view text);

}  // namespace goat
