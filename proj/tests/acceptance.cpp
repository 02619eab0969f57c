// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "goat/data.hpp"
#include "goat/diagnostics.hpp"
#include "goat/experiment.hpp"
#include "goat/geodesic.hpp"
#include "goat/ot.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace goat;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Instance {
  Vector a, b;
  CostMatrix cost;
  double oracle_value;
  bool uniform;
};

// Suite 1: 200 uniform m = n <= 6 against permutations, 100 weighted m, n <= 4
// against basic feasible solutions.
std::vector<Instance> exact_suite() {
  std::vector<Instance> out;
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const Matrix x = ts::gaussian_points(n, 2, rng);
    const Matrix y = ts::gaussian_points(n, 2, rng, 1.0, 0.5);
    const auto c = cost_matrix(WeightedDataset::uniform(x), WeightedDataset::uniform(y));
    out.push_back({ts::uniform_weights(n), ts::uniform_weights(n), c,
                   oracle::permutation_min(ts::oracle_cost(x, y, 2.0)),
                   true});
  }
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.below(4);
    const std::size_t n = 1 + rng.below(4);
    const Matrix x = ts::gaussian_points(m, 2, rng);
    const Matrix y = ts::gaussian_points(n, 2, rng);
    const Vector a = ts::random_weights(m, rng);
    const Vector b = ts::random_weights(n, rng);
    const auto c = cost_matrix(WeightedDataset(x, a), WeightedDataset(y, b));
    out.push_back({a, b, c, oracle::lp_vertex_min(ts::to_vec(a), ts::to_vec(b), ts::oracle_cost(x, y, 2.0)),
                   false});
  }
  return out;
}

Outcome ot_exactness() {
  double worst = 0.0;
  for (const auto& inst : exact_suite()) {
    const double v = transport_cost(solve_exact(inst.a, inst.b, inst.cost), inst.cost);
    worst = std::max(worst, std::abs(v - inst.oracle_value));
  }
  return {worst <= 1e-9, fmt("300 instances, max |solver - oracle| = %.2e", worst)};
}

Outcome sparsity() {
  std::size_t violations = 0, checked = 0;
  for (const auto& inst : exact_suite()) {
    if (!inst.uniform) continue;
    ++checked;
    const auto plan = solve_exact(inst.a, inst.b, inst.cost);
    if (plan.size() > inst.cost.rows() + inst.cost.cols() - 1) ++violations;
  }
  return {violations == 0, fmt("%zu uniform plans, %zu exceed m+n-1 entries", checked, violations)};
}

Outcome entropic() {
  Rng rng(3);
  double worst_residual = 0.0, worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = ts::random_weights(5, rng);
    const Vector b = ts::random_weights(7, rng);
    const auto c = cost_matrix(WeightedDataset(ts::gaussian_points(5, 2, rng), a),
                               WeightedDataset(ts::gaussian_points(7, 2, rng), b));
    const auto r =
        solve_entropic_detailed(a, b, c, {.lambda = 0.01 * median_cost(c), .tol = 1e-9});
    worst_residual = std::max(worst_residual, marginal_residual(r.plan, a, b));
    const double exact = transport_cost(solve_exact(a, b, c), c);
    const double approx = transport_cost(r.plan, c);
    worst_gap = std::max(worst_gap, std::abs(approx - exact) / exact);
  }
  return {worst_residual <= 1e-6 && worst_gap <= 0.02,
          fmt("100 5x7 instances, max residual %.2e, max relative gap %.4f", worst_residual,
              worst_gap)};
}

std::pair<WeightedDataset, WeightedDataset> gaussian_pair(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  const auto a = WeightedDataset::uniform(ts::gaussian_points(n, 2, rng));
  Matrix y = ts::gaussian_points(n, 2, rng, 0.5 + rng.uniform(), 0.0);
  y.col(0).array() += 1.0 + 3.0 * rng.uniform();
  y.col(1).array() += 2.0 * rng.uniform() - 1.0;
  return {a, WeightedDataset::uniform(std::move(y))};
}

Outcome constant_speed() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [a, b] = gaussian_pair(seed, 40 + 8 * seed);
    const auto mids = generate_sequence(a, b, 3, OtConfig{});
    const double total = wasserstein_p(a, b);
    for (std::size_t t = 1; t <= 3; ++t) {
      const double expect = static_cast<double>(t) / 4.0;
      worst = std::max(worst, std::abs(wasserstein_p(a, mids[t - 1]) / total - expect) / expect);
    }
  }
  return {worst <= 0.02, fmt("20 pairs, max relative error %.2e", worst)};
}

Outcome path_optimality() {
  double worst_ratio = 0.0, worst_slack = 1e300;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto [a, b] = gaussian_pair(100 + seed, 50);
    std::vector<WeightedDataset> geo{a};
    for (auto& d : generate_sequence(a, b, 1 + seed % 5, OtConfig{})) geo.push_back(std::move(d));
    geo.push_back(b);
    worst_ratio = std::max(worst_ratio, path_length(geo).total / wasserstein_p(a, b));
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(200 + seed);
    std::vector<WeightedDataset> any;
    const std::size_t domains = 3 + rng.below(4);
    for (std::size_t t = 0; t < domains; ++t) {
      const std::size_t n = 5 + rng.below(20);
      const Vector w = ts::random_weights(n, rng);
      any.emplace_back(ts::gaussian_points(n, 2, rng, 1.0, 2.0 * rng.normal()), w);
    }
    worst_slack = std::min(worst_slack, path_length(any).total - wasserstein_p(any.front(), any.back()));
  }
  return {worst_ratio <= 1.02 && worst_slack >= -1e-9,
          fmt("geodesic max path/W2 = %.6f; arbitrary min path - W2 = %.3e", worst_ratio,
              worst_slack)};
}

Outcome error_difference() {
  std::size_t holds = 0;
  double tightest = 1e300;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(mix_seed(6, seed));
    const std::size_t m = 1 + rng.below(20);
    const std::size_t n = 1 + rng.below(20);
    const std::size_t d = 1 + rng.below(3);
    const auto make = [&](std::size_t size, double shift) {
      const Vector w = ts::random_weights(size, rng);
      return WeightedDataset(ts::gaussian_points(size, d, rng, 1.0, shift), w,
                             ts::binary_labels(size, rng));
    };
    const auto mu = make(m, 0.0);
    const auto nu = make(n, rng.normal());
    Vector w(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = rng.normal();
    w *= 3.0 * rng.uniform() / w.norm();
    const auto r = lemma1_check(mu, nu, {w, rng.normal()});
    holds += r.holds;
    tightest = std::min(tightest, r.rhs - r.lhs);
  }
  return {holds == 500, fmt("%zu/500 hold, min rhs - lhs = %.3e", holds, tightest)};
}

ExperimentConfig rotation_config(std::vector<std::size_t> given, std::vector<std::size_t> generated) {
  ExperimentConfig c;
  c.task.kind = TaskSpec::Kind::rotation;
  c.task.n = 500;
  c.task.start_angle = 0.0;
  c.task.end_angle = 120.0;
  c.given = std::move(given);
  c.generated = std::move(generated);
  c.seeds = 10;
  c.goat.model = {Architecture::mlp, 32};
  // Weakly regularized, fully fit source model; strongly regularized short
  // adaptation stages so each stage re-centers the boundary in the new gap.
  // With the library defaults the adapted boundary barely moves.
  c.goat.source_train = {.epochs = 300, .l2_penalty = 1e-3};
  c.goat.train_config = {.epochs = 20, .l2_penalty = 5e-2};
  return c;
}

ExperimentConfig shift_config() {
  ExperimentConfig c;
  c.task.kind = TaskSpec::Kind::shift;
  c.given = {0};
  c.generated = {0, 4};
  c.seeds = 10;
  return c;
}

// Collected across criteria 7-10 for criterion 12.
long total_label_reads = 0;
std::size_t audited_runs = 0;

void audit(const std::vector<CellSummary>& cells) {
  for (const auto& cell : cells) {
    for (const auto& r : cell.runs) {
      total_label_reads += r.report.label_reads;
      ++audited_runs;
    }
  }
}

const CellSummary& cell_at(const GridResult& g, std::size_t given, std::size_t generated) {
  for (const auto& c : g.cells) {
    if (c.given == given && c.generated == generated) return c;
  }
  throw std::logic_error("no such cell");
}

Outcome gradual_beats_direct() {
  const auto c = rotation_config({0, 8}, {0});
  const auto g = run_grid(c);
  audit(g.cells);
  const double direct = cell_at(g, 0, 0).mean;
  const double gradual = cell_at(g, 8, 0).mean;
  return {!g.any_failed() && gradual >= 0.90 && gradual >= direct + 0.15,
          fmt("gradual %.3f (need >= 0.90), direct %.3f (need gradual - direct >= 0.15)", gradual,
              direct)};
}

Outcome generation_rescues() {
  const auto g = run_grid(shift_config());
  audit(g.cells);
  const double gst = cell_at(g, 0, 0).mean;
  const double goat = cell_at(g, 0, 4).mean;
  return {!g.any_failed() && goat - gst >= 0.25,
          fmt("k=4 %.3f, k=0 %.3f, improvement %.3f (need >= 0.25)", goat, gst, goat - gst)};
}

Outcome goat_with_given() {
  const auto g = run_grid(rotation_config({2}, {0, 3}));
  audit(g.cells);
  const double gst = cell_at(g, 2, 0).mean;
  const double goat = cell_at(g, 2, 3).mean;
  return {!g.any_failed() && goat >= gst - 0.02,
          fmt("k=3 %.3f, k=0 %.3f (need k=3 >= k=0 - 0.02)", goat, gst)};
}

Outcome plan_ablation() {
  auto c = shift_config();
  c.focus_generated = 4;
  const auto rows = run_ablation(c, AblationKind::plan);
  audit(rows);
  double random = 0, uniform = 0, ot = 0, oracle = 0;
  for (const auto& r : rows) {
    if (r.name == "random") random = r.mean;
    if (r.name == "uniform") uniform = r.mean;
    if (r.name == "ot") ot = r.mean;
    if (r.name == "oracle") oracle = r.mean;
  }
  const bool failed = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.failed; });
  return {!failed && ot >= uniform && ot >= random && std::abs(ot - oracle) <= 0.03,
          fmt("random %.3f, uniform %.3f, ot %.3f, oracle %.3f", random, uniform, ot, oracle)};
}

Outcome optimal_T_exact() {
  const double a = optimal_T(1.0, 0.1, 100);
  const double order = std::pow(1.0 / (2.0 * (1.0 + 0.3 * std::sqrt(50.0))), 2.0 / 3.0);
  const double b = optimal_T(0.0, 0.3, 50);
  const double c = optimal_T(1.5, 0.25, 1'000'000'000'000L);
  const double err = std::max({std::abs(a - 10.0), std::abs(b - order), std::abs(c - 6.0)});
  return {err <= 1e-12, fmt("T* = %.15g, %.15g, %.15g; max error %.1e", a, b, c, err)};
}

std::string experiment_text(const ExperimentConfig& c) {
  const auto g = run_grid(c);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : g.cells) cells.push_back(to_json(cell));
  return dump(report_document("experiment", c, cells)) + grid_csv(c, g);
}

std::string ablation_text(const ExperimentConfig& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : run_ablation(c, AblationKind::plan)) rows.push_back(to_json(r));
  return dump(report_document("ablation", c, rows));
}

Outcome determinism() {
  const auto c = shift_config();
  const bool grid_same = experiment_text(c) == experiment_text(c);
  auto ab = shift_config();
  ab.seeds = 3;
  ab.focus_generated = 4;
  const bool ablation_same = ablation_text(ab) == ablation_text(ab);
  auto single = rotation_config({2}, {0, 3});
  single.seeds = 2;
  const bool rotation_same = experiment_text(single) == experiment_text(single);
  return {grid_same && ablation_same && rotation_same && total_label_reads == 0,
          fmt("reruns identical: grid %s, ablation %s, rotation %s; label reads %ld over %zu runs",
              grid_same ? "yes" : "no", ablation_same ? "yes" : "no",
              rotation_same ? "yes" : "no", total_label_reads, audited_runs)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;  // 0 means no runtime bound
  };
  const std::vector<Criterion> criteria{
      {"ot-exactness", ot_exactness, 10},
      {"plan-sparsity", sparsity, 0},
      {"entropic-residual-and-gap", entropic, 30},
      {"geodesic-constant-speed", constant_speed, 0},
      {"path-length-optimality", path_optimality, 0},
      {"error-difference-check", error_difference, 60},
      {"gradual-beats-direct", gradual_beats_direct, 300},
      {"generation-rescues-sparse-shift", generation_rescues, 180},
      {"generation-with-given-domains", goat_with_given, 0},
      {"plan-ablation-ordering", plan_ablation, 300},
      {"optimal-T-exact", optimal_T_exact, 0},
      {"determinism-and-no-leakage", determinism, 0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failures += !o.pass;
    std::printf("%s %2zu %-32s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
