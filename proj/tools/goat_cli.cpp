// goat: transport, generation and gradual-adaptation experiments from the
// command line. Exit status 0 on success, 1 when an experiment cell fails,
// 2 on input or config errors.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "goat/data.hpp"
#include "goat/experiment.hpp"
#include "goat/ot.hpp"

namespace fs = std::filesystem;
using namespace goat;

namespace {

constexpr int kOk = 0;
constexpr int kCellFailure = 1;
constexpr int kInputError = 2;

struct OtArgs {
  std::string source;
  std::string target;
  double p = 2.0;
  std::string mode = "exact";
  double lambda = 0.0;
  std::string cutoff = "top_k";
  std::uint64_t seed = 0;
  std::string out = "plan.csv";
};

int cmd_ot(const OtArgs& a) {
  const WeightedDataset source = load_csv(a.source);
  const WeightedDataset target = load_csv(a.target);
  OtConfig config;
  if (a.mode == "exact") {
    config.mode = OtMode::exact;
  } else if (a.mode == "entropic") {
    config.mode = OtMode::entropic;
  } else {
    throw ValidationError("--mode must be exact or entropic");
  }
  config.p = a.p;
  config.lambda = a.lambda;
  config.cutoff = Cutoff::parse(a.cutoff);
  config.validate();
  // Both solvers are deterministic; the seed is accepted for symmetry with
  // the other commands.
  (void)a.seed;
  const LabelMatrix* labels = nullptr;
  std::optional<LabelMatrix> source_labels;
  if (config.cutoff.kind == Cutoff::Kind::confidence) {
    if (!source.has_labels()) throw ValidationError("confidence cutoff needs a labeled source");
    source_labels.emplace(source.labels(), source.class_count());
    labels = &*source_labels;
  }
  const TransportPlan plan = solve(source, target, config, labels);
  const double cost = transport_cost(plan, cost_matrix(source, target, a.p));
  save_plan_csv(plan, a.out);
  std::printf("distance %.6f\n", std::pow(cost, 1.0 / a.p));
  return kOk;
}

void write_out(const fs::path& dir, const std::string& name, const std::string& text) {
  fs::create_directories(dir);
  write_file_atomic(dir / name, text);
  std::printf("wrote %s\n", (dir / name).string().c_str());
}

int cmd_generate(const std::string& config_path, const fs::path& out) {
  const ExperimentConfig config = load_config(config_path);
  const DomainSequence seq = generate_domains(config);
  fs::create_directories(out);
  const fs::path manifest = save_sequence(seq, out);
  std::printf("wrote %zu domains, manifest %s\n", seq.size(), manifest.string().c_str());
  return kOk;
}

int cmd_experiment(const std::string& config_path, const fs::path& out, int jobs) {
  const ExperimentConfig config = load_config(config_path);
  const GridResult grid = run_grid(config, jobs);
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : grid.cells) cells.push_back(to_json(c));
  write_out(out, "report.json", dump(report_document("experiment", config, {{"cells", cells}})));
  const std::string csv = grid_csv(config, grid);
  write_out(out, "grid.csv", csv);
  std::fputs(csv.c_str(), stdout);
  return grid.any_failed() ? kCellFailure : kOk;
}

int cmd_ablation(const std::string& which, const std::string& config_path, const fs::path& out,
                 int jobs) {
  const AblationKind kind = parse_ablation_kind(which);
  const ExperimentConfig config = load_config(config_path);
  const auto rows = run_ablation(config, kind, jobs);
  nlohmann::json body = {{"ablation", to_string(kind)}, {"rows", nlohmann::json::array()}};
  std::string csv = "name,mean,half_width\n";
  bool failed = false;
  for (const auto& r : rows) {
    body["rows"].push_back(to_json(r));
    char buf[128];
    if (r.failed) {
      std::snprintf(buf, sizeof buf, "%s,failed,failed\n", r.name.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f\n", r.name.c_str(), r.mean, r.half_width);
    }
    csv += buf;
    failed = failed || r.failed;
  }
  const std::string stem = std::string("ablation_") + to_string(kind);
  write_out(out, stem + ".json", dump(report_document("ablation", config, body)));
  write_out(out, stem + ".csv", csv);
  std::fputs(csv.c_str(), stdout);
  return failed ? kCellFailure : kOk;
}

int cmd_diagnose(const std::string& config_path, const fs::path& out) {
  const ExperimentConfig config = load_config(config_path);
  const nlohmann::json body = diagnose(config);
  write_out(out, "diagnose.json", dump(report_document("diagnose", config, body)));
  std::printf("path length %.6f over %zu pairs (endpoint W_p %.6f)\n",
              body["path_length"].get<double>(), body["pair_distances"].size(),
              body["endpoint_distance"].get<double>());
  std::printf("T* %.6f, rounded %ld\n", body["optimal_T"]["value"].get<double>(),
              body["optimal_T"]["rounded"].get<long>());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradual domain adaptation with generated intermediate domains"};
  app.require_subcommand(1);

  OtArgs ot;
  auto* ot_cmd = app.add_subcommand("ot", "Solve OT between two CSV point sets");
  ot_cmd->add_option("source", ot.source, "source CSV")->required();
  ot_cmd->add_option("target", ot.target, "target CSV")->required();
  ot_cmd->add_option("--p", ot.p, "ground cost exponent")->capture_default_str();
  ot_cmd->add_option("--mode", ot.mode, "exact or entropic")->capture_default_str();
  ot_cmd->add_option("--lambda", ot.lambda, "entropic regularization");
  ot_cmd->add_option("--cutoff", ot.cutoff, "none, top_k[:K], threshold:T or confidence:C")
      ->capture_default_str();
  ot_cmd->add_option("--seed", ot.seed, "seed");
  ot_cmd->add_option("--out", ot.out, "plan CSV path")->capture_default_str();

  std::string config_path;
  std::string out_dir = "goat_out";
  std::string which;
  int jobs = 1;
  auto add_config = [&](CLI::App* cmd, bool parallel) {
    cmd->add_option("config", config_path, "JSON config")->required();
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    if (parallel) {
      cmd->add_option("--jobs", jobs, "concurrent pipeline runs")
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
    }
  };
  auto* gen_cmd = app.add_subcommand("generate", "Write the expanded domain sequence");
  add_config(gen_cmd, false);
  auto* exp_cmd = app.add_subcommand("experiment", "Run the given x generated grid");
  add_config(exp_cmd, true);
  auto* abl_cmd = app.add_subcommand("ablation", "Compare plans or encoders");
  abl_cmd->add_option("which", which, "plan or encoder")
      ->required()
      ->check(CLI::IsMember({"plan", "encoder"}));
  add_config(abl_cmd, true);
  auto* diag_cmd = app.add_subcommand("diagnose", "Path length, T* and bound terms");
  add_config(diag_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*ot_cmd) return cmd_ot(ot);
    if (*gen_cmd) return cmd_generate(config_path, out_dir);
    if (*exp_cmd) return cmd_experiment(config_path, out_dir, jobs);
    if (*abl_cmd) return cmd_ablation(which, config_path, out_dir, jobs);
    if (*diag_cmd) return cmd_diagnose(config_path, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "goat: " << e.what() << "\n";
    return kInputError;
  } catch (const IoError& e) {
    std::cerr << "goat: " << e.what() << "\n";
    return kInputError;
  } catch (const ValidationError& e) {
    std::cerr << "goat: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "goat: " << e.what() << "\n";
    return kCellFailure;
  }
  return kOk;
}
