#include "goat/gda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "goat/diagnostics.hpp"
#include "goat/geodesic.hpp"

namespace goat {

const char* to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::optimal: return "ot";
    case PlanKind::random: return "random";
    case PlanKind::uniform: return "uniform";
    case PlanKind::oracle: return "oracle";
  }
  return "?";
}

PlanKind parse_plan_kind(std::string_view text) {
  if (text == "ot" || text == "optimal") return PlanKind::optimal;
  if (text == "random") return PlanKind::random;
  if (text == "uniform") return PlanKind::uniform;
  if (text == "oracle") return PlanKind::oracle;
  throw ValidationError("unknown plan kind '" + std::string(text) +
                        "' (expected ot, random, uniform or oracle)");
}

void GoatConfig::validate() const {
  ot_config.validate();
  source_train.validate();
  train_config.validate();
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw ValidationError("drop_fraction must lie in [0, 1)");
  }
  if (model.architecture == Architecture::mlp && model.hidden_width < 1) {
    throw ValidationError("hidden_width must be positive");
  }
}

// ---------------------------------------------------------------------------

WeightedDataset pseudo_label_filtered(const Classifier& h, const WeightedDataset& data,
                                      double drop_fraction) {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw ValidationError("drop_fraction must lie in [0, 1)");
  }
  const std::size_t n = data.size();
  const Matrix proba = predict_proba(h, data.points());
  const std::vector<int> pred = predict(h, data.points());
  std::vector<double> confidence(n);
  for (std::size_t i = 0; i < n; ++i) {
    confidence[i] = proba.row(static_cast<Eigen::Index>(i)).maxCoeff();
  }

  const auto drop = static_cast<std::size_t>(
      std::floor(drop_fraction * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Removal order: least confident first, higher index first among equals.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (confidence[a] != confidence[b]) return confidence[a] < confidence[b];
    return a > b;
  });
  std::vector<char> keep(n, 1);
  for (std::size_t r = 0; r < drop; ++r) keep[order[r]] = 0;

  const std::size_t retained = n - drop;
  Matrix points(static_cast<Eigen::Index>(retained), data.points().cols());
  std::vector<double> raw;
  std::vector<int> labels;
  raw.reserve(retained);
  labels.reserve(retained);
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    points.row(static_cast<Eigen::Index>(labels.size())) =
        data.points().row(static_cast<Eigen::Index>(i));
    raw.push_back(data.weights()[static_cast<Eigen::Index>(i)]);
    labels.push_back(pred[i]);
  }
  double total = 0.0;
  for (double w : raw) total += w;
  // Every surviving weight may be zero when mass sits on dropped points.
  if (!(total > 0.0)) std::fill(raw.begin(), raw.end(), 1.0);
  const std::vector<double> w = normalize_weights(raw);
  return WeightedDataset(std::move(points), Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())),
                         std::move(labels));
}

SelfTrainResult self_train_detailed(const Classifier& h, const WeightedDataset& data,
                                    const GoatConfig& config, std::uint64_t seed) {
  const WeightedDataset pseudo = pseudo_label_filtered(h, data, config.drop_fraction);
  TrainConfig tc = config.train_config;
  tc.use_plan_weights = config.use_plan_weights;
  tc.seed = seed;

  SelfTrainResult out{h, {}, {}};
  out.report.size = data.size();
  out.report.retained = pseudo.size();

  const auto& labels = pseudo.labels();
  const bool single =
      std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels.front(); });
  if (single) {
    out.report.collapsed = true;
    out.warnings.push_back("pseudo-labels collapsed to class " + std::to_string(labels.front()) +
                           "; previous model kept");
  } else {
    out.model = fit_from(h, pseudo, tc);
  }
  out.report.training_loss = training_loss(out.model, pseudo, {}, tc);
  if (data.has_labels()) out.report.accuracy = accuracy(out.model, data);
  return out;
}

Classifier self_train(const Classifier& h, const WeightedDataset& data, const GoatConfig& config) {
  return self_train_detailed(h, data, config, config.train_config.seed).model;
}

GradualResult gradual_self_train(const Classifier& h0, const DomainSequence& seq,
                                 const GoatConfig& config) {
  config.validate();
  GradualResult out{h0, {}, {}};
  for (std::size_t t = 1; t < seq.size(); ++t) {
    auto step = self_train_detailed(out.model, seq[t], config,
                                    mix_seed(config.train_config.seed, t));
    step.report.stage = t;
    step.report.provenance = seq.provenance(t);
    for (auto& w : step.warnings) out.warnings.push_back("stage " + std::to_string(t) + ": " + w);
    out.stages.push_back(step.report);
    out.model = std::move(step.model);
  }
  return out;
}

DomainSequence expand_sequence(const DomainSequence& given, const GoatConfig& config,
                               std::uint64_t seed) {
  const std::size_t k = config.generated_per_pair;
  if (k == 0) return given;
  switch (config.plan) {
    case PlanKind::optimal:
      return pairwise_generate(given, k, config.ot_config);
    case PlanKind::random:
    case PlanKind::uniform: {
      const bool random = config.plan == PlanKind::random;
      return pairwise_generate(
          given, k, [&](const WeightedDataset& a, const WeightedDataset& b, std::size_t pair) {
            const std::size_t nnz = std::min(a.size() * b.size(), std::max(a.size(), b.size()));
            const std::uint64_t s = mix_seed(seed, 1000 + pair);
            return random ? make_random_plan(a.size(), b.size(), nnz, s)
                          : make_uniform_plan(a.size(), b.size(), nnz, s);
          });
    }
    case PlanKind::oracle: {
      if (!given.has_correspondence()) {
        throw ValidationError("oracle plan needs a task with known point correspondence");
      }
      return pairwise_generate(
          given, k, [](const WeightedDataset& a, const WeightedDataset& b, std::size_t) {
            std::vector<std::pair<int, int>> mapping;
            for (std::size_t i = 0; i < a.size(); ++i) {
              mapping.emplace_back(static_cast<int>(i), static_cast<int>(i));
            }
            return make_oracle_plan(mapping, a.size(), b.size());
          });
    }
  }
  return given;
}

// ---------------------------------------------------------------------------

namespace {

struct Prepared {
  Encoder encoder;
  DomainSequence encoded;
};

Prepared prepare(const DomainSequence& given, const GoatConfig& config, std::uint64_t seed) {
  EncoderOptions options = config.encoder;
  options.source_train.seed = mix_seed(seed, 11);
  options.adapt_train.seed = mix_seed(seed, 12);
  Encoder encoder = fit_encoder(given.domains(), config.encoder_mode, options);
  std::vector<WeightedDataset> encoded;
  encoded.reserve(given.size());
  for (const auto& d : given.domains()) encoded.push_back(encoder.encode(d));
  return {std::move(encoder),
          DomainSequence(std::move(encoded), given.provenances(), given.has_correspondence())};
}

}  // namespace

PipelineResult goat_pipeline(const DomainSequence& given, const GoatConfig& config,
                             std::uint64_t seed) {
  config.validate();
  Prepared prep = prepare(given, config, seed);
  const DomainSequence& encoded = prep.encoded;

  TrainConfig source_train = config.source_train;
  source_train.seed = mix_seed(seed, 21);
  const Classifier h0 = fit(encoded.source(), config.model, source_train);

  const DomainSequence expanded = expand_sequence(encoded, config, mix_seed(seed, 31));
  GoatConfig adapt = config;
  adapt.train_config.seed = mix_seed(seed, 41);
  GradualResult gradual = gradual_self_train(h0, expanded, adapt);

  ExperimentReport report;
  report.given_intermediates = given.size() - 2;
  report.generated_per_pair = config.generated_per_pair;
  report.domain_count = expanded.size();
  report.source_accuracy = accuracy(h0, encoded.source());
  const WeightedDataset& target = encoded.target();
  if (target.has_labels()) {
    report.target_accuracy =
        accuracy(gradual.model, target.points(), target.evaluation_labels(),
                 Vector::Constant(static_cast<Eigen::Index>(target.size()),
                                  1.0 / static_cast<double>(target.size())));
  }
  if (config.report_path_length) {
    const PathLength path = path_length(expanded, config.ot_config.p);
    report.path_length = path.total;
    report.pair_distances = path.distances;
    const double endpoint = wasserstein_p(encoded.source(), encoded.target(), config.ot_config.p);
    const double mean_step = path.total / static_cast<double>(path.distances.size());
    if (mean_step > 0.0) {
      report.optimal_T = optimal_T(endpoint, mean_step, static_cast<long>(target.size()));
    }
  }
  report.stages = std::move(gradual.stages);
  report.warnings = prep.encoder.warnings();
  report.warnings.insert(report.warnings.end(), gradual.warnings.begin(), gradual.warnings.end());
  // Encoded and generated domains keep the given domains' audit tags.
  report.label_reads = expanded.label_reads();
  return {std::move(gradual.model), std::move(report), std::move(prep.encoder)};
}

PipelineResult goat_pipeline(const WeightedDataset& source,
                             std::span<const WeightedDataset> intermediates,
                             const WeightedDataset& target, const GoatConfig& config,
                             std::uint64_t seed, bool has_correspondence) {
  std::vector<WeightedDataset> domains;
  domains.push_back(source);
  domains.insert(domains.end(), intermediates.begin(), intermediates.end());
  domains.push_back(target);
  return goat_pipeline(DomainSequence(std::move(domains), {}, has_correspondence), config, seed);
}

SelectKResult select_k(const DomainSequence& given, const GoatConfig& config,
                       std::span<const std::size_t> candidates, std::uint64_t seed) {
  if (candidates.empty()) throw ValidationError("select_k needs candidate values");
  std::vector<PipelineResult> runs;
  for (std::size_t k : candidates) {
    GoatConfig c = config;
    c.generated_per_pair = k;
    runs.push_back(goat_pipeline(given, c, seed));
  }
  // Validation labels: the candidates' averaged prediction on their most
  // confident 20% of target points. Never touches target labels.
  const Matrix target = given.target().points();
  Matrix mean_proba;
  for (const auto& r : runs) {
    const Matrix p = predict_proba(r.model, r.encoder.encode_points(target));
    if (mean_proba.size() == 0) {
      mean_proba = p;
    } else {
      mean_proba += p;
    }
  }
  mean_proba /= static_cast<double>(runs.size());
  const std::size_t n = static_cast<std::size_t>(target.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> conf(n);
  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    conf[i] = mean_proba.row(static_cast<Eigen::Index>(i)).maxCoeff(&arg);
    label[i] = static_cast<int>(arg);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return conf[a] > conf[b]; });
  const std::size_t held = std::max<std::size_t>(1, n / 5);

  SelectKResult out{candidates.front(), {}, runs.front()};
  double best = -1.0;
  for (std::size_t c = 0; c < runs.size(); ++c) {
    const Matrix encoded = runs[c].encoder.encode_points(target);
    const std::vector<int> pred = predict(runs[c].model, encoded);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < held; ++r) hits += pred[order[r]] == label[order[r]] ? 1 : 0;
    const double acc = static_cast<double>(hits) / static_cast<double>(held);
    out.validation_accuracy.push_back(acc);
    if (acc > best) {
      best = acc;
      out.k = candidates[c];
      out.best = runs[c];
    }
  }
  return out;
}

}  // namespace goat
