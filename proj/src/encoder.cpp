#include "goat/encoder.hpp"

#include <cmath>

#include "goat/gda.hpp"

namespace goat {

const char* to_string(EncoderMode mode) {
  switch (mode) {
    case EncoderMode::identity: return "identity";
    case EncoderMode::standardize: return "standardize";
    case EncoderMode::hidden: return "hidden";
  }
  return "?";
}

EncoderMode parse_encoder_mode(std::string_view text) {
  if (text == "identity") return EncoderMode::identity;
  if (text == "standardize") return EncoderMode::standardize;
  if (text == "hidden") return EncoderMode::hidden;
  throw ValidationError("unknown encoder mode '" + std::string(text) +
                        "' (expected identity, standardize or hidden)");
}

Encoder Encoder::identity() { return Encoder{}; }

Encoder Encoder::standardize(Vector mean, Vector scale, std::vector<std::string> warnings) {
  if (mean.size() == 0 || mean.size() != scale.size()) {
    throw ValidationError("mean and scale must be nonempty and of equal length");
  }
  if (!((scale.array() > 0.0).all()) || !scale.allFinite() || !mean.allFinite()) {
    throw ValidationError("scales must be positive and finite");
  }
  Encoder e;
  e.mode_ = EncoderMode::standardize;
  e.mean_ = std::move(mean);
  e.scale_ = std::move(scale);
  e.warnings_ = std::move(warnings);
  return e;
}

Encoder Encoder::hidden(Classifier network) {
  if (network.architecture() != Architecture::mlp) {
    throw ValidationError("hidden encoder needs an mlp");
  }
  Encoder e;
  e.mode_ = EncoderMode::hidden;
  e.network_.push_back(std::move(network));
  return e;
}

int Encoder::output_dim() const {
  switch (mode_) {
    case EncoderMode::identity: return -1;
    case EncoderMode::standardize: return static_cast<int>(mean_.size());
    case EncoderMode::hidden: return network_.front().spec().hidden_width;
  }
  return -1;
}

const Classifier& Encoder::network() const {
  if (network_.empty()) throw ValidationError("encoder has no network");
  return network_.front();
}

Matrix Encoder::encode_points(const Matrix& points) const {
  switch (mode_) {
    case EncoderMode::identity:
      return points;
    case EncoderMode::standardize: {
      if (points.cols() != mean_.size()) {
        throw ValidationError("encoder expects " + std::to_string(mean_.size()) +
                              " features, got " + std::to_string(points.cols()));
      }
      Matrix out = points.rowwise() - mean_.transpose();
      out.array().rowwise() /= scale_.transpose().array();
      return out;
    }
    case EncoderMode::hidden:
      return network_.front().hidden_activations(points);
  }
  return points;
}

WeightedDataset Encoder::encode(const WeightedDataset& data) const {
  if (mode_ == EncoderMode::identity) return data;
  return data.with_points(encode_points(data.points()));
}

Encoder fit_encoder(std::span<const WeightedDataset> domains, EncoderMode mode,
                    const EncoderOptions& options) {
  if (mode == EncoderMode::identity) return Encoder::identity();
  if (domains.empty()) throw ValidationError("fit_encoder needs at least one domain");
  const auto d = static_cast<Eigen::Index>(domains.front().dim());
  for (const auto& dom : domains) {
    if (static_cast<Eigen::Index>(dom.dim()) != d) {
      throw ValidationError("feature dimension mismatch across encoder domains");
    }
  }

  if (mode == EncoderMode::standardize) {
    Eigen::Index total = 0;
    Vector sum = Vector::Zero(d);
    for (const auto& dom : domains) {
      total += dom.points().rows();
      sum += dom.points().colwise().sum().transpose();
    }
    if (total < 2) throw ValidationError("standardize needs at least 2 pooled samples");
    const Vector mean = sum / static_cast<double>(total);
    Vector sq = Vector::Zero(d);
    for (const auto& dom : domains) {
      sq += (dom.points().rowwise() - mean.transpose()).array().square().matrix().colwise().sum()
                .transpose();
    }
    Vector scale = (sq / static_cast<double>(total)).cwiseSqrt();
    std::vector<std::string> warnings;
    for (Eigen::Index k = 0; k < d; ++k) {
      if (!(scale[k] > 0.0)) {
        scale[k] = 1.0;
        warnings.push_back("feature " + std::to_string(k) + " has zero variance; scale set to 1");
      }
    }
    return Encoder::standardize(mean, std::move(scale), std::move(warnings));
  }

  const WeightedDataset& source = domains.front();
  if (!source.has_labels()) throw ValidationError("hidden encoder needs a labeled source");
  const ModelSpec spec{Architecture::mlp, options.hidden_width};
  Classifier h = fit(source, spec, options.source_train);
  if (domains.size() > 1) {
    GoatConfig gc;
    gc.model = spec;
    gc.drop_fraction = options.drop_fraction;
    gc.train_config = options.adapt_train;
    gc.use_plan_weights = options.adapt_train.use_plan_weights;
    const DomainSequence seq(std::vector<WeightedDataset>(domains.begin(), domains.end()));
    h = gradual_self_train(h, seq, gc).model;
  }
  return Encoder::hidden(std::move(h));
}

}  // namespace goat
