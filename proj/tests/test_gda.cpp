#include <gtest/gtest.h>

#include "goat/data.hpp"
#include "goat/gda.hpp"
#include "helpers.hpp"

using namespace goat;

namespace {

const ModelSpec kLinear{Architecture::linear, 0};

/// p(class 1 | x) = sigmoid(x).
Classifier sigmoid_1d() { return Classifier(kLinear, 1, 2, {0, 1, 0, 0}); }

WeightedDataset line(std::size_t n, double start = 0.0) {
  Matrix x(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i), 0) = start + static_cast<double>(i);
  return WeightedDataset::uniform(x);
}

GoatConfig quick_config() {
  GoatConfig c;
  c.model = kLinear;
  c.source_train.epochs = 20;
  c.train_config.epochs = 5;
  c.report_path_length = false;
  return c;
}

DomainSequence shift_task(std::size_t given, std::uint64_t seed, std::size_t n = 60) {
  std::vector<std::vector<double>> offsets;
  for (std::size_t i = 0; i <= given + 1; ++i) {
    offsets.push_back({static_cast<double>(i) / static_cast<double>(given + 1), 0.0});
  }
  return make_shift_task(n, offsets, 0.3, seed);
}

}  // namespace

TEST(PseudoLabel, DropsLeastConfident) {
  const auto out = pseudo_label_filtered(sigmoid_1d(), line(10), 0.1);
  ASSERT_EQ(out.size(), 9u);
  EXPECT_EQ(out.points()(0, 0), 1.0);  // x = 0 had confidence 0.5
  for (int y : out.labels()) EXPECT_EQ(y, 1);
  EXPECT_NEAR(out.weights().sum(), 1.0, 1e-12);
}

TEST(PseudoLabel, NoDropKeepsAllWithPredictions) {
  const auto data = line(6, -3.0);
  const auto out = pseudo_label_filtered(sigmoid_1d(), data, 0.0);
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(out.labels(), predict(sigmoid_1d(), data.points()));
}

TEST(PseudoLabel, TiesDropHighestIndices) {
  const auto out = pseudo_label_filtered(Classifier::zeros(kLinear, 1, 2), line(10), 0.2);
  ASSERT_EQ(out.size(), 8u);
  EXPECT_EQ(out.points()(7, 0), 7.0);
}

TEST(PseudoLabel, RetainedCountProperty) {
  for (std::size_t n : {1u, 7u, 10u, 33u}) {
    for (double d : {0.0, 0.1, 0.25, 0.5, 0.9}) {
      const auto out = pseudo_label_filtered(sigmoid_1d(), line(n, -5.0), d);
      EXPECT_EQ(out.size(), static_cast<std::size_t>(std::ceil((1.0 - d) * n - 1e-9)));
    }
  }
}

TEST(PseudoLabel, NeverReadsLabels) {
  const LabelAudit audit;
  const Matrix x = line(8).points();
  const auto data = WeightedDataset::uniform(x, std::vector<int>(8, 0)).evaluation_only(audit);
  (void)pseudo_label_filtered(sigmoid_1d(), data, 0.1);
  EXPECT_EQ(audit.reads(), 0);
}

TEST(SelfTrain, AgreesWithSeparablePseudoLabels) {
  const auto seq = make_shift_task(200, std::vector<std::vector<double>>{{0, 0}, {0.2, 0}}, 0.2, 3);
  GoatConfig c = quick_config();
  c.train_config.epochs = 100;
  const auto h0 = fit(seq.source(), c.model, c.source_train);
  const auto res = self_train_detailed(h0, seq[1], c, 1);
  const auto pseudo = pseudo_label_filtered(h0, seq[1], c.drop_fraction);
  const auto after = predict(res.model, pseudo.points());
  std::size_t agree = 0;
  for (std::size_t i = 0; i < after.size(); ++i) agree += after[i] == pseudo.labels()[i];
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(after.size()), 0.99);
  EXPECT_EQ(seq.label_reads(), 0);
}

TEST(SelfTrain, CollapseKeepsPreviousModel) {
  const auto h = sigmoid_1d();
  const auto res = self_train_detailed(h, line(10, 5.0), quick_config(), 0);
  EXPECT_TRUE(res.report.collapsed);
  EXPECT_EQ(res.model, h);
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("collapsed"), std::string::npos);
}

TEST(GradualSelfTrain, CopiesOfSourceKeepAccuracy) {
  const auto base = two_gaussians(200, 0.3, 4);
  const DomainSequence seq({base, base, base, base});
  GoatConfig c = quick_config();
  const auto h0 = fit(base, c.model, c.source_train);
  const auto out = gradual_self_train(h0, seq, c);
  EXPECT_EQ(out.stages.size(), 3u);
  EXPECT_NEAR(accuracy(out.model, seq.target()), accuracy(h0, base), 0.02);
  EXPECT_EQ(seq.label_reads(), 0);
  for (const auto& s : out.stages) {
    EXPECT_EQ(s.retained, 180u);
    ASSERT_TRUE(s.accuracy.has_value());
  }
}

TEST(Pipeline, DomainCountAndNoLeakage) {
  for (std::size_t g = 0; g < 3; ++g) {
    for (std::size_t k = 0; k < 3; ++k) {
      GoatConfig c = quick_config();
      c.generated_per_pair = k;
      c.report_path_length = true;
      const auto seq = shift_task(g, 10 + g);
      const auto r = goat_pipeline(seq, c, 5).report;
      EXPECT_EQ(r.domain_count, g + (g + 1) * k + 2);
      EXPECT_EQ(r.stages.size(), r.domain_count - 1);
      EXPECT_EQ(r.label_reads, 0);
      EXPECT_EQ(seq.label_reads(), 0);
      EXPECT_EQ(r.pair_distances.size(), r.domain_count - 1);
      EXPECT_GT(r.optimal_T, 0.0);
    }
  }
}

TEST(Pipeline, KZeroEqualsGradualSelfTrain) {
  const auto seq = shift_task(2, 21);
  GoatConfig c = quick_config();
  const std::uint64_t seed = 8;
  const auto run = goat_pipeline(seq, c, seed);

  TrainConfig st = c.source_train;
  st.seed = mix_seed(seed, 21);
  const auto h0 = fit(seq.source(), c.model, st);
  GoatConfig adapt = c;
  adapt.train_config.seed = mix_seed(seed, 41);
  EXPECT_EQ(run.model, gradual_self_train(h0, seq, adapt).model);
}

TEST(Pipeline, DeterministicAcrossRuns) {
  const auto seq = shift_task(1, 22);
  GoatConfig c = quick_config();
  c.generated_per_pair = 2;
  EXPECT_EQ(goat_pipeline(seq, c, 3).model, goat_pipeline(seq, c, 3).model);
}

TEST(Pipeline, SpanOverloadMatchesSequence) {
  const auto seq = shift_task(1, 23);
  GoatConfig c = quick_config();
  c.generated_per_pair = 1;
  const std::vector<WeightedDataset> mids{seq[1]};
  EXPECT_EQ(goat_pipeline(seq.source(), mids, seq.target(), c, 4, true).model,
            goat_pipeline(seq, c, 4).model);
}

TEST(Pipeline, PlanKinds) {
  const auto seq = shift_task(0, 24);
  for (PlanKind p : {PlanKind::random, PlanKind::uniform, PlanKind::optimal, PlanKind::oracle}) {
    GoatConfig c = quick_config();
    c.generated_per_pair = 2;
    c.plan = p;
    const auto r = goat_pipeline(seq, c, 1).report;
    EXPECT_EQ(r.domain_count, 4u);
    EXPECT_EQ(r.label_reads, 0);
  }
  const auto resampled =
      make_shift_task(40, std::vector<std::vector<double>>{{0, 0}, {1, 0}}, 0.3, 2, true);
  EXPECT_FALSE(resampled.has_correspondence());
  GoatConfig c = quick_config();
  c.generated_per_pair = 1;
  c.plan = PlanKind::oracle;
  EXPECT_THROW(goat_pipeline(resampled, c, 0), ValidationError);
}

TEST(Pipeline, EncoderModesRun) {
  const auto seq = shift_task(1, 25);
  for (EncoderMode m : {EncoderMode::identity, EncoderMode::standardize, EncoderMode::hidden}) {
    GoatConfig c = quick_config();
    c.encoder_mode = m;
    c.encoder.source_train.epochs = 5;
    c.encoder.hidden_width = 4;
    c.generated_per_pair = 1;
    const auto r = goat_pipeline(seq, c, 2);
    EXPECT_EQ(r.report.label_reads, 0);
    EXPECT_EQ(r.encoder.mode(), m);
  }
}

TEST(Pipeline, PlanWeightsFlagOverridesTrainConfig) {
  const auto seq = shift_task(0, 26);
  GoatConfig a = quick_config();
  a.generated_per_pair = 2;
  a.ot_config.mode = OtMode::entropic;
  a.ot_config.lambda = 0.5;
  GoatConfig b = a;
  b.use_plan_weights = false;
  b.train_config.use_plan_weights = true;
  EXPECT_NE(goat_pipeline(seq, a, 1).model, goat_pipeline(seq, b, 1).model);
}

TEST(SelectK, PicksACandidate) {
  const auto seq = shift_task(0, 27);
  const std::vector<std::size_t> cands{0, 1, 3};
  const auto r = select_k(seq, quick_config(), cands, 3);
  EXPECT_EQ(r.validation_accuracy.size(), 3u);
  EXPECT_NE(std::find(cands.begin(), cands.end(), r.k), cands.end());
  EXPECT_EQ(r.best.report.generated_per_pair, r.k);
  EXPECT_EQ(r.best.report.label_reads, 0);
}

TEST(GoatConfig, Validation) {
  GoatConfig c;
  c.drop_fraction = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_EQ(parse_plan_kind("optimal"), PlanKind::optimal);
  EXPECT_STREQ(to_string(PlanKind::optimal), "ot");
  EXPECT_THROW(parse_plan_kind("best"), ValidationError);
}
