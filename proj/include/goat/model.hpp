// Classifiers fitted by weighted empirical risk minimization.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "goat/core.hpp"

namespace goat {

enum class Architecture { linear, mlp };

struct ModelSpec {
  Architecture architecture = Architecture::mlp;
  /// Hidden width for mlp; ignored for linear.
  int hidden_width = 32;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 64;
  double learning_rate = 0.1;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;
  /// Use dataset weights as per-sample loss weights; otherwise uniform over
  /// the support.
  bool use_plan_weights = true;

  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear (x W + b) or one-hidden-layer ReLU network scoring C classes.
/// Parameters are stored flat: per layer, the row-major (in x out) weight
/// block followed by the bias.
class Classifier {
 public:
  Classifier(ModelSpec spec, int input_dim, int class_count, std::vector<double> parameters);

  static Classifier zeros(ModelSpec spec, int input_dim, int class_count);
  /// Scaled-normal weights (He scale), zero biases.
  static Classifier initialized(ModelSpec spec, int input_dim, int class_count,
                                std::uint64_t seed);
  static std::size_t parameter_count(ModelSpec spec, int input_dim, int class_count);

  const ModelSpec& spec() const { return spec_; }
  Architecture architecture() const { return spec_.architecture; }
  int input_dim() const { return input_dim_; }
  int class_count() const { return class_count_; }
  int layer_count() const { return spec_.architecture == Architecture::linear ? 1 : 2; }
  std::span<const double> parameters() const { return parameters_; }

  Eigen::Map<const Matrix> weight(int layer) const;
  Eigen::Map<const Vector> bias(int layer) const;

  /// n x C scores.
  Matrix logits(const Matrix& points) const;
  /// ReLU hidden-layer activations; mlp only.
  Matrix hidden_activations(const Matrix& points) const;

  friend bool operator==(const Classifier& a, const Classifier& b) {
    return a.spec_.architecture == b.spec_.architecture &&
           a.layer_width(0) == b.layer_width(0) && a.input_dim_ == b.input_dim_ &&
           a.class_count_ == b.class_count_ && a.parameters_ == b.parameters_;
  }

 private:
  int layer_width(int layer) const;
  int layer_inputs(int layer) const;
  std::size_t offset(int layer) const;

  ModelSpec spec_;
  int input_dim_;
  int class_count_;
  std::vector<double> parameters_;
};

struct LossGradient {
  double loss;
  /// Same layout as Classifier::parameters().
  std::vector<double> gradient;
};

/// sum_i w_i * CE(h(x_i), y_i) + l2 * ||params||^2, with w used as given.
LossGradient weighted_cross_entropy(const Classifier& h, const Matrix& points,
                                    std::span<const int> labels, std::span<const double> weights,
                                    double l2_penalty);

/// Seeded mini-batch gradient descent from a fresh initialization.
Classifier fit(const WeightedDataset& data, const ModelSpec& spec, const TrainConfig& config,
               int class_count = 0);

/// Same, warm-started from init's parameters.
Classifier fit_from(const Classifier& init, const WeightedDataset& data,
                    const TrainConfig& config);

/// Full-data objective of fit at h (weights normalized over positive-weight samples).
double training_loss(const Classifier& h, const WeightedDataset& data,
                     std::span<const int> labels, const TrainConfig& config);

/// Rows sum to 1.
Matrix predict_proba(const Classifier& h, const Matrix& points);
/// Argmax per row, lowest index on ties.
std::vector<int> predict(const Classifier& h, const Matrix& points);
/// Weighted fraction correct against evaluation labels.
double accuracy(const Classifier& h, const WeightedDataset& data);
double accuracy(const Classifier& h, const Matrix& points, std::span<const int> labels,
                const Vector& weights);

/// Spectral norm for linear; product of per-layer spectral norms for mlp.
double lipschitz_estimate(const Classifier& h);

/// Versioned flat text, 17 significant digits.
std::string serialize(const Classifier& h);
Classifier deserialize_classifier(std::string_view text);

}  // namespace goat
