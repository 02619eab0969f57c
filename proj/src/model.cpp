#include "goat/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numeric>
#include <sstream>

#include "goat/kernels.hpp"

namespace goat {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (!(l2_penalty >= 0.0)) throw ValidationError("l2_penalty must be nonnegative");
}

// ---------------------------------------------------------------------------
// Classifier

namespace {

void check_shape(ModelSpec spec, int input_dim, int class_count) {
  if (input_dim < 1) throw ValidationError("input_dim must be positive");
  if (class_count < 2) throw ValidationError("class_count must be at least 2");
  if (spec.architecture == Architecture::mlp && spec.hidden_width < 1) {
    throw ValidationError("hidden_width must be positive");
  }
}

}  // namespace

std::size_t Classifier::parameter_count(ModelSpec spec, int input_dim, int class_count) {
  const auto d = static_cast<std::size_t>(input_dim);
  const auto c = static_cast<std::size_t>(class_count);
  if (spec.architecture == Architecture::linear) return d * c + c;
  const auto h = static_cast<std::size_t>(spec.hidden_width);
  return d * h + h + h * c + c;
}

Classifier::Classifier(ModelSpec spec, int input_dim, int class_count,
                       std::vector<double> parameters)
    : spec_(spec), input_dim_(input_dim), class_count_(class_count),
      parameters_(std::move(parameters)) {
  check_shape(spec, input_dim, class_count);
  if (spec_.architecture == Architecture::linear) spec_.hidden_width = 0;
  const std::size_t expected = parameter_count(spec_, input_dim, class_count);
  if (parameters_.size() != expected) {
    throw ValidationError("expected " + std::to_string(expected) + " parameters, got " +
                          std::to_string(parameters_.size()));
  }
}

Classifier Classifier::zeros(ModelSpec spec, int input_dim, int class_count) {
  check_shape(spec, input_dim, class_count);
  return Classifier(spec, input_dim, class_count,
                    std::vector<double>(parameter_count(spec, input_dim, class_count), 0.0));
}

Classifier Classifier::initialized(ModelSpec spec, int input_dim, int class_count,
                                   std::uint64_t seed) {
  Classifier h = zeros(spec, input_dim, class_count);
  Rng rng(seed);
  for (int l = 0; l < h.layer_count(); ++l) {
    const double scale = std::sqrt(2.0 / h.layer_inputs(l));
    const std::size_t begin = h.offset(l);
    const std::size_t end =
        begin + static_cast<std::size_t>(h.layer_inputs(l) * h.layer_width(l));
    for (std::size_t k = begin; k < end; ++k) h.parameters_[k] = scale * rng.normal();
  }
  return h;
}

int Classifier::layer_inputs(int layer) const {
  return layer == 0 ? input_dim_ : spec_.hidden_width;
}

int Classifier::layer_width(int layer) const {
  if (spec_.architecture == Architecture::linear || layer == 1) return class_count_;
  return spec_.hidden_width;
}

std::size_t Classifier::offset(int layer) const {
  if (layer == 0) return 0;
  return static_cast<std::size_t>(input_dim_ * spec_.hidden_width + spec_.hidden_width);
}

Eigen::Map<const Matrix> Classifier::weight(int layer) const {
  if (layer < 0 || layer >= layer_count()) throw ValidationError("no such layer");
  return {parameters_.data() + offset(layer), layer_inputs(layer), layer_width(layer)};
}

Eigen::Map<const Vector> Classifier::bias(int layer) const {
  if (layer < 0 || layer >= layer_count()) throw ValidationError("no such layer");
  return {parameters_.data() + offset(layer) + layer_inputs(layer) * layer_width(layer),
          layer_width(layer)};
}

namespace {

void check_input(const Classifier& h, const Matrix& points) {
  if (points.cols() != h.input_dim()) {
    throw ValidationError("input has " + std::to_string(points.cols()) +
                          " features, classifier expects " + std::to_string(h.input_dim()));
  }
}

}  // namespace

Matrix Classifier::hidden_activations(const Matrix& points) const {
  if (spec_.architecture != Architecture::mlp) {
    throw ValidationError("hidden activations require an mlp");
  }
  check_input(*this, points);
  Matrix hidden;
  kernels::parallel::affine_rows(points, weight(0), bias(0), hidden);
  hidden = hidden.cwiseMax(0.0);
  return hidden;
}

Matrix Classifier::logits(const Matrix& points) const {
  check_input(*this, points);
  Matrix out;
  if (spec_.architecture == Architecture::linear) {
    kernels::parallel::affine_rows(points, weight(0), bias(0), out);
  } else {
    kernels::parallel::affine_rows(hidden_activations(points), weight(1), bias(1), out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loss and gradient

namespace {

// Loss and gradient on rows of x; weights applied as given, no penalty.
double accumulate_gradient(const Classifier& h, const Matrix& x, std::span<const int> labels,
                           std::span<const double> weights, std::vector<double>& grad) {
  const Eigen::Index n = x.rows();
  const int c = h.class_count();
  const bool mlp = h.architecture() == Architecture::mlp;

  Matrix input = x;
  Matrix pre;
  if (mlp) {
    pre = (x * h.weight(0)).rowwise() + h.bias(0).transpose();
    input = pre.cwiseMax(0.0);
  }
  const int out_layer = mlp ? 1 : 0;
  Matrix z = (input * h.weight(out_layer)).rowwise() + h.bias(out_layer).transpose();

  double loss = 0.0;
  Matrix dz(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = z.row(i).maxCoeff();
    const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
    const int y = labels[static_cast<std::size_t>(i)];
    const double w = weights[static_cast<std::size_t>(i)];
    loss += w * (lse - z(i, y));
    for (int k = 0; k < c; ++k) dz(i, k) = w * std::exp(z(i, k) - lse);
    dz(i, y) -= w;
  }

  auto layer_grad = [&](int layer, const Matrix& in, const Matrix& delta) {
    const Eigen::Index rows = in.cols(), cols = delta.cols();
    const std::size_t base = layer == 0 ? 0 : h.parameters().size() -
                                                  static_cast<std::size_t>(rows * cols + cols);
    Eigen::Map<Matrix> gw(grad.data() + base, rows, cols);
    Eigen::Map<Vector> gb(grad.data() + base + rows * cols, cols);
    gw.noalias() += in.transpose() * delta;
    gb += delta.colwise().sum().transpose();
  };

  layer_grad(out_layer, input, dz);
  if (mlp) {
    Matrix dh = dz * h.weight(1).transpose();
    dh.array() *= (pre.array() > 0.0).cast<double>();
    layer_grad(0, x, dh);
  }
  return loss;
}

double penalty(std::span<const double> params) {
  double s = 0.0;
  for (double v : params) s += v * v;
  return s;
}

void check_labels(std::span<const int> labels, int class_count) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw ValidationError("label " + std::to_string(labels[i]) + " at sample " +
                            std::to_string(i) + " outside the classifier's " +
                            std::to_string(class_count) + " classes");
    }
  }
}

}  // namespace

LossGradient weighted_cross_entropy(const Classifier& h, const Matrix& points,
                                    std::span<const int> labels, std::span<const double> weights,
                                    double l2_penalty) {
  check_input(h, points);
  const auto n = static_cast<std::size_t>(points.rows());
  if (labels.size() != n || weights.size() != n) {
    throw ValidationError("labels and weights must match the point count");
  }
  check_labels(labels, h.class_count());
  LossGradient out{0.0, std::vector<double>(h.parameters().size(), 0.0)};
  out.loss = accumulate_gradient(h, points, labels, weights, out.gradient);
  const auto params = h.parameters();
  out.loss += l2_penalty * penalty(params);
  for (std::size_t k = 0; k < params.size(); ++k) out.gradient[k] += 2.0 * l2_penalty * params[k];
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct TrainingSet {
  Matrix points;
  std::vector<int> labels;
  std::vector<double> weights;  // normalized over the retained samples
};

TrainingSet training_set(const WeightedDataset& data, std::span<const int> labels,
                         bool use_weights) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.weights()[static_cast<Eigen::Index>(i)] > 0.0) keep.push_back(i);
  }
  TrainingSet set;
  set.points.resize(static_cast<Eigen::Index>(keep.size()), data.points().cols());
  std::vector<double> raw;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    set.points.row(static_cast<Eigen::Index>(r)) =
        data.points().row(static_cast<Eigen::Index>(keep[r]));
    set.labels.push_back(labels[keep[r]]);
    raw.push_back(use_weights ? data.weights()[static_cast<Eigen::Index>(keep[r])] : 1.0);
  }
  set.weights = normalize_weights(raw);
  return set;
}

std::span<const int> resolve_labels(const WeightedDataset& data, std::span<const int> labels) {
  if (!labels.empty()) {
    if (labels.size() != data.size()) {
      throw ValidationError("label count does not match the dataset size");
    }
    return labels;
  }
  return data.labels();
}

Classifier descend(const Classifier& init, const WeightedDataset& data,
                   std::span<const int> labels, const TrainConfig& config) {
  config.validate();
  if (data.dim() != static_cast<std::size_t>(init.input_dim())) {
    throw ValidationError("dataset has " + std::to_string(data.dim()) +
                          " features, classifier expects " + std::to_string(init.input_dim()));
  }
  const TrainingSet set = training_set(data, labels, config.use_plan_weights);
  check_labels(set.labels, init.class_count());
  {
    const int first = set.labels.front();
    bool single = true;
    for (int y : set.labels) single = single && y == first;
    if (single) throw ValidationError("training data contains a single class");
  }

  const std::size_t n = set.labels.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  std::vector<double> params(init.parameters().begin(), init.parameters().end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);

  Matrix xb;
  std::vector<int> yb;
  std::vector<double> wb;
  std::vector<double> grad(params.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const auto size = static_cast<Eigen::Index>(stop - start);
      const double scale = static_cast<double>(n) / static_cast<double>(stop - start);
      xb.resize(size, set.points.cols());
      yb.resize(stop - start);
      wb.resize(stop - start);
      for (std::size_t r = start; r < stop; ++r) {
        xb.row(static_cast<Eigen::Index>(r - start)) =
            set.points.row(static_cast<Eigen::Index>(order[r]));
        yb[r - start] = set.labels[order[r]];
        wb[r - start] = set.weights[order[r]] * scale;
      }
      const Classifier current(init.spec(), init.input_dim(), init.class_count(), params);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double loss = accumulate_gradient(current, xb, yb, wb, grad);
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "training loss became " << loss << " at epoch " << epoch << ", batch starting "
           << start << " (learning_rate " << config.learning_rate << "); lower the learning rate";
        throw TrainingError(os.str());
      }
      for (std::size_t p = 0; p < params.size(); ++p) {
        params[p] -= config.learning_rate * (grad[p] + 2.0 * config.l2_penalty * params[p]);
      }
    }
  }
  for (double v : params) {
    if (!std::isfinite(v)) throw TrainingError("training produced non-finite parameters");
  }
  return Classifier(init.spec(), init.input_dim(), init.class_count(), std::move(params));
}

}  // namespace

Classifier fit(const WeightedDataset& data, const ModelSpec& spec, const TrainConfig& config,
               int class_count) {
  const std::span<const int> labels = data.labels();
  int c = class_count;
  if (c == 0) c = std::max(2, data.class_count());
  const Classifier init =
      Classifier::initialized(spec, static_cast<int>(data.dim()), c, mix_seed(config.seed, 0));
  return descend(init, data, labels, config);
}

Classifier fit_from(const Classifier& init, const WeightedDataset& data,
                    const TrainConfig& config) {
  return descend(init, data, data.labels(), config);
}

double training_loss(const Classifier& h, const WeightedDataset& data,
                     std::span<const int> labels, const TrainConfig& config) {
  const TrainingSet set = training_set(data, resolve_labels(data, labels), config.use_plan_weights);
  return weighted_cross_entropy(h, set.points, set.labels, set.weights, config.l2_penalty).loss;
}

// ---------------------------------------------------------------------------
// Prediction

Matrix predict_proba(const Classifier& h, const Matrix& points) {
  Matrix p = h.logits(points);
  kernels::parallel::softmax_rows(p);
  return p;
}

std::vector<int> predict(const Classifier& h, const Matrix& points) {
  const Matrix z = h.logits(points);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < z.cols(); ++k) {
      if (z(i, k) > z(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const Classifier& h, const Matrix& points, std::span<const int> labels,
                const Vector& weights) {
  if (labels.size() != static_cast<std::size_t>(points.rows()) ||
      weights.size() != points.rows()) {
    throw ValidationError("labels and weights must match the point count");
  }
  const std::vector<int> pred = predict(h, points);
  double correct = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == labels[i]) correct += weights[static_cast<Eigen::Index>(i)];
  }
  // Summation rounding can push a perfect score just past 1.
  return std::min(correct, 1.0);
}

double accuracy(const Classifier& h, const WeightedDataset& data) {
  return accuracy(h, data.points(), data.evaluation_labels(), data.weights());
}

double lipschitz_estimate(const Classifier& h) {
  double product = 1.0;
  for (int l = 0; l < h.layer_count(); ++l) {
    const Matrix w = h.weight(l);
    Eigen::JacobiSVD<Matrix> svd(w);
    product *= svd.singularValues()(0);
  }
  return product;
}

}  // namespace goat
