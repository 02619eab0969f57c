#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "goat/data.hpp"
#include "goat/experiment.hpp"

using namespace goat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return json::parse(R"({
    "task": {"kind": "shift", "n": 40, "sigma": 0.3, "end_offset": [2, 0]},
    "given": [0, 1],
    "generated": [0, 2],
    "seeds": 2,
    "seed": 3,
    "model": {"architecture": "linear"},
    "source_train": {"epochs": 20},
    "train": {"epochs": 5}
  })");
}

std::vector<std::string> problems_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("goat_exp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GOAT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture_cli(const std::string& args) {
  const std::string cmd = std::string(GOAT_CLI_PATH) + " " + args + " 2>&1";
  std::string out;
  if (FILE* pipe = popen(cmd.c_str(), "r")) {
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    pclose(pipe);
  }
  return out;
}

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  const auto c = parse_config(small_config());
  EXPECT_EQ(c.task.n, 40u);
  EXPECT_EQ(c.given, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(c.goat.model.architecture, Architecture::linear);
  EXPECT_EQ(c.goat.train_config.epochs, 5);
  EXPECT_EQ(c.cell_given(), 0u);
  EXPECT_EQ(c.cell_generated(), 2u);
  const json once = to_json(c);
  EXPECT_EQ(to_json(parse_config(once)), once);
  EXPECT_EQ(to_json(parse_config(json{{"task", json::object()}})), to_json(ExperimentConfig{}));
  EXPECT_FALSE(problems_of(json::object()).empty());
}

TEST(Config, ProblemsCarryFieldPaths) {
  json doc = small_config();
  doc["seeds"] = 0;
  doc["train"]["learning_rate"] = -1;
  doc["ot"] = {{"mode", "magic"}};
  doc["colour"] = "red";
  doc["task"]["n"] = "many";
  const auto p = problems_of(doc);
  ASSERT_EQ(p.size(), 5u);
  const auto has = [&](const std::string& prefix) {
    return std::any_of(p.begin(), p.end(), [&](const std::string& s) { return s.rfind(prefix, 0) == 0; });
  };
  EXPECT_TRUE(has("seeds:"));
  EXPECT_TRUE(has("train.learning_rate:"));
  EXPECT_TRUE(has("ot.mode:"));
  EXPECT_TRUE(has("colour: unknown field"));
  EXPECT_TRUE(has("task.n:"));
}

TEST(Config, VersionAndRootType) {
  EXPECT_FALSE(problems_of(json{{"version", 99}, {"task", json::object()}}).empty());
  EXPECT_FALSE(problems_of(json::array()).empty());
  EXPECT_TRUE(problems_of(json{{"version", kReportVersion}, {"task", json::object()}}).empty());
}

TEST(Config, ManifestPathResolvesAgainstConfig) {
  const auto dir = scratch_dir("manifest");
  const auto seq = make_shift_task(20, std::vector<std::vector<double>>{{0, 0}, {1, 0}, {2, 0}}, 0.3, 1);
  save_sequence(seq, dir / "data");
  std::ofstream(dir / "c.json") << R"({"task": {"kind": "manifest", "manifest": "data/manifest.txt"}})";
  const auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.task.manifest, dir / "data" / "manifest.txt");
  const auto built = build_task(c, 1, 0);
  EXPECT_EQ(built.size(), 3u);
  EXPECT_EQ(built[1].points(), seq[1].points());
  EXPECT_EQ(build_task(c, 0, 0).size(), 2u);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/c.json"), IoError);
}

TEST(Summary, HalfWidth) {
  CellSummary cell;
  for (double a : {0.5, 0.7}) {
    RunRecord r;
    r.report.target_accuracy = a;
    cell.runs.push_back(r);
  }
  summarize(cell);
  EXPECT_DOUBLE_EQ(cell.mean, 0.6);
  EXPECT_NEAR(cell.half_width, 1.96 * std::sqrt(0.02) / std::sqrt(2.0), 1e-12);
  EXPECT_FALSE(cell.failed);
}

TEST(Grid, DegenerateCellIsDirectSelfTraining) {
  json doc = small_config();
  doc["given"] = {0};
  doc["generated"] = {0};
  doc["seeds"] = 1;
  const auto c = parse_config(doc);
  const auto grid = run_grid(c);
  ASSERT_EQ(grid.cells.size(), 1u);

  const auto seq = build_task(c, 0, replicate_seed(c, 0));
  const auto direct = goat_pipeline(seq, c.goat, replicate_seed(c, 0));
  EXPECT_EQ(grid.cells[0].mean, direct.report.target_accuracy);
  EXPECT_EQ(grid_csv(c, grid).substr(0, 18), "given\\generated,0\n");
}

TEST(Grid, ShapeDeterminismAndJobs) {
  const auto c = parse_config(small_config());
  const auto a = run_grid(c, 1);
  const auto b = run_grid(c, 2);
  ASSERT_EQ(a.cells.size(), 4u);
  EXPECT_FALSE(a.any_failed());
  const std::string csv = grid_csv(c, a);
  EXPECT_EQ(csv, grid_csv(c, b));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "given\\generated,0,2");
  json ra = json::array(), rb = json::array();
  for (const auto& cell : a.cells) ra.push_back(to_json(cell));
  for (const auto& cell : b.cells) rb.push_back(to_json(cell));
  EXPECT_EQ(dump(report_document("experiment", c, ra)), dump(report_document("experiment", c, rb)));
  for (const auto& cell : a.cells) {
    for (const auto& r : cell.runs) EXPECT_EQ(r.report.label_reads, 0);
  }
}

TEST(Grid, SelectKMode) {
  json doc = small_config();
  doc["given"] = {0};
  doc["select_k"] = true;
  doc["seeds"] = 1;
  const auto grid = run_grid(parse_config(doc));
  ASSERT_EQ(grid.cells.size(), 1u);
  EXPECT_EQ(grid.cells[0].name, "select_k");
  ASSERT_TRUE(grid.cells[0].runs[0].selected_k.has_value());
}

TEST(Ablation, RowNames) {
  json doc = small_config();
  doc["seeds"] = 1;
  const auto c = parse_config(doc);
  std::vector<std::string> names;
  for (const auto& row : run_ablation(c, AblationKind::plan)) names.push_back(row.name);
  EXPECT_EQ(names, (std::vector<std::string>{"random", "uniform", "ot", "oracle"}));
  names.clear();
  doc["encoder"] = {{"source_train", {{"epochs", 3}}}, {"hidden_width", 4}};
  for (const auto& row : run_ablation(parse_config(doc), AblationKind::encoder)) {
    names.push_back(row.name);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"identity", "standardize", "hidden"}));
  doc["task"]["resample"] = true;
  EXPECT_THROW(run_ablation(parse_config(doc), AblationKind::plan), ValidationError);
  EXPECT_THROW(parse_ablation_kind("loss"), ValidationError);
}

TEST(Generate, CountsFiles) {
  json doc = small_config();
  doc["focus_given"] = 2;
  doc["focus_generated"] = 3;
  const auto seq = generate_domains(parse_config(doc));
  EXPECT_EQ(seq.size(), 13u);
  std::size_t generated = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) generated += seq.provenance(t) == Provenance::generated;
  EXPECT_EQ(generated, 9u);

  doc["focus_generated"] = 0;
  const auto c0 = parse_config(doc);
  const auto plain = generate_domains(c0);
  const auto task = build_task(c0, 2, replicate_seed(c0, 0));
  ASSERT_EQ(plain.size(), task.size());
  for (std::size_t t = 0; t < task.size(); ++t) EXPECT_EQ(plain[t].points(), task[t].points());
}

TEST(Diagnose, OverridesGiveTStar) {
  json doc = small_config();
  doc["diagnose"] = {{"L", 1.0}, {"delta_max", 0.1}, {"n", 100}};
  const auto d = diagnose(parse_config(doc));
  EXPECT_NEAR(d["optimal_T"]["value"].get<double>(), 10.0, 1e-12);
  EXPECT_EQ(d["optimal_T"]["rounded"].get<long>(), 10);
  EXPECT_EQ(d["label_reads"].get<long>(), 0);
  EXPECT_EQ(d["bound_terms"].size(), 5u);
  EXPECT_EQ(d["pair_distances"].size(), d["domain_count"].get<std::size_t>() - 1);
}

TEST(Diagnose, GeodesicPathMatchesEndpoint) {
  json doc = small_config();
  doc["focus_generated"] = 4;
  const auto d = diagnose(parse_config(doc));
  const double total = d["path_length"].get<double>();
  const double direct = d["endpoint_distance"].get<double>();
  EXPECT_LE(total, 1.02 * direct);
  EXPECT_GE(total, direct - 1e-9);
}

TEST(Cli, OtCommand) {
  const auto dir = scratch_dir("cli_ot");
  save_csv(two_moons(10, 0.1, 1), dir / "a.csv");
  EXPECT_NE(capture_cli("ot " + (dir / "a.csv").string() + " " + (dir / "a.csv").string() +
                        " --out " + (dir / "p.csv").string())
                .find("distance 0.000000"),
            std::string::npos);

  std::ofstream(dir / "s.csv") << "x0\n0\n1\n";
  std::ofstream(dir / "t.csv") << "x0\n0\n2\n";
  EXPECT_EQ(run_cli("ot " + (dir / "s.csv").string() + " " + (dir / "t.csv").string() + " --out " +
                    (dir / "st.csv").string()),
            0);
  const auto plan = load_plan_csv(dir / "st.csv", 2, 2);
  EXPECT_EQ(plan.entries(), (std::vector<PlanEntry>{{0, 0, 0.5}, {1, 1, 0.5}}));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli_codes");
  const std::string missing = (dir / "nope.csv").string();
  const std::string msg = capture_cli("ot " + missing + " " + missing);
  EXPECT_NE(msg.find(missing), std::string::npos);
  EXPECT_EQ(run_cli("ot " + missing + " " + missing), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  std::ofstream(dir / "bad.json") << R"({"seeds": -1})";
  EXPECT_EQ(run_cli("experiment " + (dir / "bad.json").string() + " --out " + dir.string()), 2);
}

TEST(Cli, ExperimentRerunIsBitwiseIdentical) {
  const auto dir = scratch_dir("cli_exp");
  json doc = small_config();
  doc["given"] = {0};
  std::ofstream(dir / "c.json") << doc.dump();
  const std::string cfg = (dir / "c.json").string();
  ASSERT_EQ(run_cli("experiment " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli("experiment " + cfg + " --jobs 2 --out " + (dir / "b").string()), 0);
  for (const char* f : {"report.json", "grid.csv"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
  ASSERT_EQ(run_cli("generate " + cfg + " --out " + (dir / "g1").string()), 0);
  ASSERT_EQ(run_cli("generate " + cfg + " --out " + (dir / "g2").string()), 0);
  for (const auto& e : fs::directory_iterator(dir / "g1")) {
    EXPECT_EQ(read_file(e.path()), read_file(dir / "g2" / e.path().filename()));
  }
  const json report = json::parse(read_file(dir / "a" / "report.json"));
  EXPECT_EQ(report["format"], "goat-report");
  EXPECT_EQ(report["version"], kReportVersion);
  EXPECT_EQ(report["config"], to_json(parse_config(doc)));
}
