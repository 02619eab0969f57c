#include "goat/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include "goat/data.hpp"
#include "goat/geodesic.hpp"

namespace goat {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid config:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

/// Reads typed fields of one JSON object, collecting problems instead of
/// throwing so that a config reports all of its errors at once.
class Fields {
 public:
  Fields(const json& obj, std::string path, std::vector<std::string>& problems)
      : obj_(obj), path_(std::move(path)), problems_(problems) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.push_back(key);
    return obj_.is_object() && obj_.contains(key) && !obj_.at(key).is_null();
  }

  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void fail(const std::string& where, const std::string& what) {
    problems_.push_back(where + ": " + what);
  }

  void real(const std::string& key, double& out, bool (*ok)(double) = nullptr,
            const char* need = "") {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) return fail(where(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || (ok && !ok(x))) return fail(where(key), std::string("must be ") + need);
    out = x;
  }

  void real(const std::string& key, std::optional<double>& out, bool (*ok)(double),
            const char* need) {
    double x = 0.0;
    const std::size_t before = problems_.size();
    if (!has(key)) return;
    real(key, x, ok, need);
    if (problems_.size() == before) out = x;
  }

  template <class Int>
  void integer(const std::string& key, Int& out, long long min_value) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) return fail(where(key), "expected an integer");
    const long long x = v.get<long long>();
    if (x < min_value) return fail(where(key), "must be at least " + std::to_string(min_value));
    out = static_cast<Int>(x);
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) return fail(where(key), "expected true or false");
    out = v.get<bool>();
  }

  std::optional<std::string> text(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = obj_.at(key);
    if (!v.is_string()) {
      fail(where(key), "expected a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  void reals(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    std::vector<double> xs;
    if (!v.is_array() || v.empty()) return fail(where(key), "expected a nonempty list of numbers");
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        return fail(where(key), "expected a nonempty list of numbers");
      }
      xs.push_back(e.get<double>());
    }
    out = std::move(xs);
  }

  void counts(const std::string& key, std::vector<std::size_t>& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    std::vector<std::size_t> xs;
    if (!v.is_array() || v.empty()) {
      return fail(where(key), "expected a nonempty list of nonnegative integers");
    }
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0) {
        return fail(where(key), "expected a nonempty list of nonnegative integers");
      }
      xs.push_back(e.get<std::size_t>());
    }
    out = std::move(xs);
  }

  const json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    return &obj_.at(key);
  }

  /// Reports keys that no getter asked for.
  void finish() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        fail(where(key), "unknown field");
      }
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::vector<std::string> seen_;
};

bool positive(double x) { return x > 0.0; }
bool nonnegative(double x) { return x >= 0.0; }
bool unit_open(double x) { return x >= 0.0 && x < 1.0; }
bool at_least_one(double x) { return x >= 1.0; }

void read_train(const json* node, const std::string& path, TrainConfig& tc,
                std::vector<std::string>& problems) {
  if (!node) return;
  Fields f(*node, path, problems);
  f.integer("epochs", tc.epochs, 1);
  f.integer("batch_size", tc.batch_size, 1);
  f.real("learning_rate", tc.learning_rate, positive, "positive");
  f.real("l2_penalty", tc.l2_penalty, nonnegative, "nonnegative");
  f.finish();
}

json train_json(const TrainConfig& tc) {
  return {{"epochs", tc.epochs},
          {"batch_size", tc.batch_size},
          {"learning_rate", tc.learning_rate},
          {"l2_penalty", tc.l2_penalty}};
}

const char* to_string(TaskSpec::Kind kind) {
  switch (kind) {
    case TaskSpec::Kind::rotation: return "rotation";
    case TaskSpec::Kind::shift: return "shift";
    case TaskSpec::Kind::manifest: return "manifest";
  }
  return "?";
}

const char* to_string(OtMode mode) { return mode == OtMode::exact ? "exact" : "entropic"; }

const char* to_string(Stabilization s) {
  switch (s) {
    case Stabilization::automatic: return "automatic";
    case Stabilization::linear: return "linear";
    case Stabilization::log: return "log";
  }
  return "?";
}

template <class Enum>
void parse_enum(Fields& f, const std::string& key, Enum& out, Enum (*parse)(std::string_view)) {
  const auto text = f.text(key);
  if (!text) return;
  try {
    out = parse(*text);
  } catch (const std::exception& e) {
    f.fail(f.where(key), e.what());
  }
}

TaskSpec::Kind parse_task_kind(std::string_view text) {
  if (text == "rotation") return TaskSpec::Kind::rotation;
  if (text == "shift") return TaskSpec::Kind::shift;
  if (text == "manifest") return TaskSpec::Kind::manifest;
  throw ValidationError("unknown task '" + std::string(text) +
                        "' (expected rotation, shift or manifest)");
}

OtMode parse_ot_mode(std::string_view text) {
  if (text == "exact") return OtMode::exact;
  if (text == "entropic") return OtMode::entropic;
  throw ValidationError("unknown mode '" + std::string(text) + "' (expected exact or entropic)");
}

Stabilization parse_stabilization(std::string_view text) {
  if (text == "automatic") return Stabilization::automatic;
  if (text == "linear") return Stabilization::linear;
  if (text == "log") return Stabilization::log;
  throw ValidationError("unknown stabilization '" + std::string(text) + "'");
}

Architecture parse_architecture(std::string_view text) {
  if (text == "linear") return Architecture::linear;
  if (text == "mlp") return Architecture::mlp;
  throw ValidationError("unknown architecture '" + std::string(text) + "' (expected linear or mlp)");
}

Cutoff parse_cutoff_text(std::string_view text) { return Cutoff::parse(std::string(text)); }

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  std::vector<std::string> problems;
  ExperimentConfig c;
  Fields root(doc, "", problems);

  if (root.has("version")) {
    const json& v = doc.at("version");
    if (!v.is_number_integer() || v.get<long long>() != kReportVersion) {
      root.fail("version", "unsupported config version (expected " +
                               std::to_string(kReportVersion) + ")");
    }
  }

  if (const json* t = root.child("task")) {
    Fields f(*t, "task", problems);
    parse_enum(f, "kind", c.task.kind, parse_task_kind);
    f.integer("n", c.task.n, 2);
    f.real("noise", c.task.noise, nonnegative, "nonnegative");
    f.real("start_angle", c.task.start_angle);
    f.real("end_angle", c.task.end_angle);
    f.real("sigma", c.task.sigma, nonnegative, "nonnegative");
    f.reals("start_offset", c.task.start_offset);
    f.reals("end_offset", c.task.end_offset);
    f.boolean("resample", c.task.resample);
    if (auto m = f.text("manifest")) {
      std::filesystem::path p(*m);
      c.task.manifest = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    f.finish();
    if (c.task.start_offset.size() != 2 || c.task.end_offset.size() != 2) {
      problems.push_back("task: start_offset and end_offset must have 2 entries");
    }
    if (c.task.kind != TaskSpec::Kind::manifest && c.task.n % 2 != 0) {
      problems.push_back("task.n: must be even");
    }
    if (c.task.kind == TaskSpec::Kind::manifest && c.task.manifest.empty()) {
      problems.push_back("task.manifest: required for manifest tasks");
    }
  } else {
    problems.push_back("task: required");
  }

  root.counts("given", c.given);
  root.counts("generated", c.generated);
  root.integer("seeds", c.seeds, 1);
  root.integer("seed", c.seed, 0);
  root.integer("focus_given", c.focus_given, 0);
  root.integer("focus_generated", c.focus_generated, 0);
  root.boolean("select_k", c.select_k);

  GoatConfig& g = c.goat;
  if (const json* m = root.child("model")) {
    Fields f(*m, "model", problems);
    parse_enum(f, "architecture", g.model.architecture, parse_architecture);
    f.integer("hidden_width", g.model.hidden_width, 1);
    f.finish();
  }
  read_train(root.child("source_train"), "source_train", g.source_train, problems);
  read_train(root.child("train"), "train", g.train_config, problems);
  if (const json* e = root.child("encoder")) {
    Fields f(*e, "encoder", problems);
    parse_enum(f, "mode", g.encoder_mode, parse_encoder_mode);
    f.integer("hidden_width", g.encoder.hidden_width, 1);
    read_train(f.child("source_train"), "encoder.source_train", g.encoder.source_train, problems);
    read_train(f.child("adapt_train"), "encoder.adapt_train", g.encoder.adapt_train, problems);
    f.real("drop_fraction", g.encoder.drop_fraction, unit_open, "in [0, 1)");
    f.finish();
  }
  if (const json* o = root.child("ot")) {
    Fields f(*o, "ot", problems);
    parse_enum(f, "mode", g.ot_config.mode, parse_ot_mode);
    f.real("p", g.ot_config.p, at_least_one, "at least 1");
    f.real("lambda", g.ot_config.lambda, nonnegative, "nonnegative");
    f.integer("max_iterations", g.ot_config.max_iterations, 1);
    f.real("tol", g.ot_config.convergence_tol, positive, "positive");
    parse_enum(f, "stabilization", g.ot_config.stabilization, parse_stabilization);
    parse_enum(f, "cutoff", g.ot_config.cutoff, parse_cutoff_text);
    f.finish();
    if (problems.empty()) {
      try {
        g.ot_config.validate();
      } catch (const std::exception& e) {
        problems.push_back(std::string("ot: ") + e.what());
      }
    }
  }
  parse_enum(root, "plan", g.plan, parse_plan_kind);
  root.real("drop_fraction", g.drop_fraction, unit_open, "in [0, 1)");
  root.boolean("use_plan_weights", g.use_plan_weights);
  root.boolean("report_path_length", g.report_path_length);

  if (const json* d = root.child("diagnose")) {
    Fields f(*d, "diagnose", problems);
    f.real("L", c.diagnose.L, nonnegative, "nonnegative");
    f.real("delta_max", c.diagnose.delta_max, positive, "positive");
    if (f.has("n")) {
      long n = 0;
      const std::size_t before = problems.size();
      f.integer("n", n, 1);
      if (problems.size() == before) c.diagnose.n = n;
    }
    f.real("rho", c.diagnose.rho, positive, "positive");
    f.real("R", c.diagnose.R, nonnegative, "nonnegative");
    f.finish();
  }
  root.finish();

  if (g.plan == PlanKind::oracle && c.task.resample) {
    problems.push_back("plan: oracle needs a task without resampling");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  const GoatConfig& g = c.goat;
  json task = {{"kind", to_string(c.task.kind)}, {"n", c.task.n}, {"resample", c.task.resample}};
  switch (c.task.kind) {
    case TaskSpec::Kind::rotation:
      task["noise"] = c.task.noise;
      task["start_angle"] = c.task.start_angle;
      task["end_angle"] = c.task.end_angle;
      break;
    case TaskSpec::Kind::shift:
      task["sigma"] = c.task.sigma;
      task["start_offset"] = c.task.start_offset;
      task["end_offset"] = c.task.end_offset;
      break;
    case TaskSpec::Kind::manifest:
      task["manifest"] = c.task.manifest.generic_string();
      break;
  }
  json diag = {{"rho", c.diagnose.rho}};
  if (c.diagnose.L) diag["L"] = *c.diagnose.L;
  if (c.diagnose.delta_max) diag["delta_max"] = *c.diagnose.delta_max;
  if (c.diagnose.n) diag["n"] = *c.diagnose.n;
  if (c.diagnose.R) diag["R"] = *c.diagnose.R;
  json out = {
      {"version", kReportVersion},
      {"task", task},
      {"given", c.given},
      {"generated", c.generated},
      {"seeds", c.seeds},
      {"seed", c.seed},
      {"select_k", c.select_k},
      {"model",
       {{"architecture", g.model.architecture == Architecture::mlp ? "mlp" : "linear"},
        {"hidden_width", g.model.hidden_width}}},
      {"source_train", train_json(g.source_train)},
      {"train", train_json(g.train_config)},
      {"encoder",
       {{"mode", to_string(g.encoder_mode)},
        {"hidden_width", g.encoder.hidden_width},
        {"source_train", train_json(g.encoder.source_train)},
        {"adapt_train", train_json(g.encoder.adapt_train)},
        {"drop_fraction", g.encoder.drop_fraction}}},
      {"ot",
       {{"mode", to_string(g.ot_config.mode)},
        {"p", g.ot_config.p},
        {"lambda", g.ot_config.lambda},
        {"max_iterations", g.ot_config.max_iterations},
        {"tol", g.ot_config.convergence_tol},
        {"stabilization", to_string(g.ot_config.stabilization)},
        {"cutoff", g.ot_config.cutoff.to_string()}}},
      {"plan", to_string(g.plan)},
      {"drop_fraction", g.drop_fraction},
      {"use_plan_weights", g.use_plan_weights},
      {"report_path_length", g.report_path_length},
      {"diagnose", diag},
  };
  if (c.focus_given) out["focus_given"] = *c.focus_given;
  if (c.focus_generated) out["focus_generated"] = *c.focus_generated;
  return out;
}

std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t r) {
  return mix_seed(config.seed, 100 + r);
}

DomainSequence build_task(const ExperimentConfig& config, std::size_t given, std::uint64_t seed) {
  const TaskSpec& t = config.task;
  const std::size_t steps = given + 1;
  switch (t.kind) {
    case TaskSpec::Kind::rotation: {
      std::vector<double> angles;
      for (std::size_t i = 0; i <= steps; ++i) {
        angles.push_back(t.start_angle + (t.end_angle - t.start_angle) * static_cast<double>(i) /
                                             static_cast<double>(steps));
      }
      return make_rotation_task(t.n, angles, t.noise, seed, t.resample);
    }
    case TaskSpec::Kind::shift: {
      std::vector<std::vector<double>> offsets;
      for (std::size_t i = 0; i <= steps; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(steps);
        std::vector<double> o(t.start_offset.size());
        for (std::size_t d = 0; d < o.size(); ++d) {
          o[d] = (1.0 - s) * t.start_offset[d] + s * t.end_offset[d];
        }
        offsets.push_back(std::move(o));
      }
      return make_shift_task(t.n, offsets, t.sigma, seed, t.resample);
    }
    case TaskSpec::Kind::manifest: {
      const DomainSequence stored = load_sequence(t.manifest);
      const std::size_t available = stored.size() - 2;
      if (given > available) {
        throw ValidationError("manifest has " + std::to_string(available) +
                              " intermediates, " + std::to_string(given) + " requested");
      }
      std::vector<WeightedDataset> domains{stored.source()};
      for (std::size_t i = 1; i <= given; ++i) {
        const auto pos = static_cast<std::size_t>(std::lround(
            static_cast<double>(i * (available + 1)) / static_cast<double>(steps)));
        domains.push_back(stored[std::clamp<std::size_t>(pos, 1, available)]);
      }
      domains.push_back(stored.target());
      return DomainSequence(std::move(domains), {}, stored.has_correspondence());
    }
  }
  throw ValidationError("unknown task kind");
}

// ---------------------------------------------------------------------------

void summarize(CellSummary& cell) {
  std::vector<double> acc;
  cell.failed = false;
  for (const auto& r : cell.runs) {
    if (r.failed) {
      cell.failed = true;
    } else {
      acc.push_back(r.report.target_accuracy);
    }
  }
  cell.mean = 0.0;
  cell.half_width = 0.0;
  if (acc.empty()) return;
  cell.mean = mean_of(acc);
  if (acc.size() > 1) {
    double ss = 0.0;
    for (double a : acc) ss += (a - cell.mean) * (a - cell.mean);
    const double sd = std::sqrt(ss / static_cast<double>(acc.size() - 1));
    cell.half_width = 1.96 * sd / std::sqrt(static_cast<double>(acc.size()));
  }
}

bool GridResult::any_failed() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellSummary& c) { return c.failed; });
}

namespace {

struct Job {
  std::size_t cell;
  std::size_t replicate;
  std::size_t given;
  GoatConfig goat;
  std::vector<std::size_t> select_candidates;
};

RunRecord run_one(const ExperimentConfig& config, const Job& job) {
  RunRecord rec;
  rec.seed = replicate_seed(config, job.replicate);
  try {
    const DomainSequence seq = build_task(config, job.given, rec.seed);
    if (!job.select_candidates.empty()) {
      SelectKResult sel = select_k(seq, job.goat, job.select_candidates, rec.seed);
      rec.selected_k = sel.k;
      rec.report = std::move(sel.best.report);
    } else {
      rec.report = goat_pipeline(seq, job.goat, rec.seed).report;
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

/// Runs every job, at most `jobs` at a time. Results land in job order, so
/// the outcome does not depend on scheduling.
std::vector<RunRecord> run_jobs(const ExperimentConfig& config, const std::vector<Job>& list,
                                int jobs) {
  std::vector<RunRecord> out(list.size());
  const int threads = std::max(1, jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::size_t i = 0; i < list.size(); ++i) out[i] = run_one(config, list[i]);
  return out;
}

void collect(std::vector<CellSummary>& cells, const std::vector<Job>& list,
             std::vector<RunRecord> records) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    cells[list[i].cell].runs.push_back(std::move(records[i]));
  }
  for (auto& c : cells) summarize(c);
}

}  // namespace

GridResult run_grid(const ExperimentConfig& config, int jobs) {
  GridResult grid;
  std::vector<Job> list;
  for (std::size_t g : config.given) {
    if (config.select_k) {
      CellSummary cell{"select_k", g, 0, {}, 0.0, 0.0, false};
      grid.cells.push_back(cell);
      for (std::size_t r = 0; r < config.seeds; ++r) {
        list.push_back({grid.cells.size() - 1, r, g, config.goat, config.generated});
      }
      continue;
    }
    for (std::size_t k : config.generated) {
      grid.cells.push_back({"", g, k, {}, 0.0, 0.0, false});
      GoatConfig gc = config.goat;
      gc.generated_per_pair = k;
      for (std::size_t r = 0; r < config.seeds; ++r) {
        list.push_back({grid.cells.size() - 1, r, g, gc, {}});
      }
    }
  }
  collect(grid.cells, list, run_jobs(config, list, jobs));
  return grid;
}

std::string grid_csv(const ExperimentConfig& config, const GridResult& grid) {
  std::string out = "given\\generated";
  if (config.select_k) {
    out += ",selected";
  } else {
    for (std::size_t k : config.generated) out += "," + std::to_string(k);
  }
  out += "\n";
  std::size_t i = 0;
  for (std::size_t g : config.given) {
    out += std::to_string(g);
    const std::size_t cols = config.select_k ? 1 : config.generated.size();
    for (std::size_t c = 0; c < cols; ++c, ++i) {
      const CellSummary& cell = grid.cells[i];
      if (cell.failed) {
        out += ",failed";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, ",%.4f+-%.4f", cell.mean, cell.half_width);
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

AblationKind parse_ablation_kind(std::string_view text) {
  if (text == "plan") return AblationKind::plan;
  if (text == "encoder") return AblationKind::encoder;
  throw ValidationError("unknown ablation '" + std::string(text) + "' (expected plan or encoder)");
}

const char* to_string(AblationKind kind) { return kind == AblationKind::plan ? "plan" : "encoder"; }

std::vector<CellSummary> run_ablation(const ExperimentConfig& config, AblationKind kind,
                                      int jobs) {
  const std::size_t g = config.cell_given();
  const std::size_t k = config.cell_generated();
  std::vector<GoatConfig> variants;
  std::vector<std::string> names;
  if (kind == AblationKind::plan) {
    if (config.task.kind == TaskSpec::Kind::manifest || config.task.resample) {
      // A manifest can still carry correspondence; check the real sequence.
      if (!build_task(config, g, replicate_seed(config, 0)).has_correspondence()) {
        throw ValidationError("plan ablation needs a task with known point correspondence");
      }
    }
    for (PlanKind p : {PlanKind::random, PlanKind::uniform, PlanKind::optimal, PlanKind::oracle}) {
      GoatConfig gc = config.goat;
      gc.plan = p;
      variants.push_back(gc);
      names.emplace_back(to_string(p));
    }
  } else {
    for (EncoderMode m : {EncoderMode::identity, EncoderMode::standardize, EncoderMode::hidden}) {
      GoatConfig gc = config.goat;
      gc.encoder_mode = m;
      variants.push_back(gc);
      names.emplace_back(to_string(m));
    }
  }
  std::vector<CellSummary> rows;
  std::vector<Job> list;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    rows.push_back({names[v], g, k, {}, 0.0, 0.0, false});
    variants[v].generated_per_pair = k;
    for (std::size_t r = 0; r < config.seeds; ++r) list.push_back({v, r, g, variants[v], {}});
  }
  collect(rows, list, run_jobs(config, list, jobs));
  return rows;
}

DomainSequence generate_domains(const ExperimentConfig& config) {
  const std::uint64_t seed = replicate_seed(config, 0);
  const DomainSequence given = build_task(config, config.cell_given(), seed);
  GoatConfig gc = config.goat;
  gc.generated_per_pair = config.cell_generated();
  return expand_sequence(given, gc, mix_seed(seed, 31));
}

json diagnose(const ExperimentConfig& config) {
  const std::uint64_t seed = replicate_seed(config, 0);
  const DomainSequence given = build_task(config, config.cell_given(), seed);
  GoatConfig gc = config.goat;
  gc.generated_per_pair = config.cell_generated();
  gc.report_path_length = true;
  const PipelineResult run = goat_pipeline(given, gc, seed);
  const ExperimentReport& rep = run.report;
  const double p = gc.ot_config.p;

  const double endpoint =
      wasserstein_p(run.encoder.encode(given.source()), run.encoder.encode(given.target()), p);
  const std::size_t steps = rep.pair_distances.size();
  const double mean_step = rep.path_length / static_cast<double>(steps);
  const double L = config.diagnose.L.value_or(endpoint);
  const double delta_max = config.diagnose.delta_max.value_or(mean_step);
  const long n = config.diagnose.n.value_or(static_cast<long>(given.target().size()));
  const double t_star = optimal_T(L, delta_max, n);

  BoundInputs in;
  in.epsilon0 = 1.0 - rep.source_accuracy;
  in.T = static_cast<long>(steps);
  in.Delta = mean_step;
  in.n = static_cast<long>(given.target().size());
  in.rho = config.diagnose.rho;
  in.R = config.diagnose.R.value_or(lipschitz_estimate(run.model));
  json terms = json::array();
  for (const auto& t : bound_terms(in)) {
    terms.push_back({{"name", t.name},
                     {"value", t.value},
                     {"exact_coefficient", t.exact_coefficient},
                     {"note", t.note}});
  }

  // Lower bound on the discrepancy over the given domains (they carry
  // evaluation labels; generated ones do not), q uniform.
  json disc = nullptr;
  const bool labeled = std::all_of(given.domains().begin(), given.domains().end(),
                                   [](const WeightedDataset& d) { return d.has_labels(); });
  if (labeled) {
    const std::vector<double> offsets{-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
    const auto candidates =
        linear_candidate_grid(static_cast<int>(given.source().dim()), 16, offsets);
    const std::vector<double> q(given.size(), 1.0 / static_cast<double>(given.size()));
    disc = {{"value", empirical_discrepancy(given, candidates, q)},
            {"candidates", candidates.size()},
            {"note", "lower bound over a grid of linear classifiers, q uniform"}};
  }
  json out = {
      {"given_intermediates", rep.given_intermediates},
      {"generated_per_pair", rep.generated_per_pair},
      {"domain_count", rep.domain_count},
      {"p", p},
      {"endpoint_distance", endpoint},
      {"path_length", rep.path_length},
      {"pair_distances", rep.pair_distances},
      {"optimal_T",
       {{"L", L},
        {"delta_max", delta_max},
        {"n", n},
        {"value", t_star},
        {"rounded", rounded_T(t_star)}}},
      {"bound_inputs",
       {{"epsilon0", in.epsilon0},
        {"T", in.T},
        {"Delta", in.Delta},
        {"n", in.n},
        {"rho", in.rho},
        {"R", in.R}}},
      {"bound_terms", terms},
      {"source_accuracy", rep.source_accuracy},
      {"target_accuracy", rep.target_accuracy},
      {"discrepancy", disc},
      {"label_reads", rep.label_reads},
  };
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const CellSummary& cell) {
  json runs = json::array();
  for (const auto& r : cell.runs) {
    json run = {{"seed", r.seed}, {"failed", r.failed}};
    if (r.failed) {
      run["error"] = r.error;
    } else {
      run["target_accuracy"] = r.report.target_accuracy;
      run["source_accuracy"] = r.report.source_accuracy;
      run["domain_count"] = r.report.domain_count;
      run["label_reads"] = r.report.label_reads;
      run["collapsed_stages"] =
          std::count_if(r.report.stages.begin(), r.report.stages.end(),
                        [](const StageReport& s) { return s.collapsed; });
      run["warnings"] = r.report.warnings;
      if (r.report.path_length > 0.0) {
        run["path_length"] = r.report.path_length;
        run["optimal_T"] = r.report.optimal_T;
      }
      if (r.selected_k) run["selected_k"] = *r.selected_k;
    }
    runs.push_back(run);
  }
  json out = {{"given", cell.given},
              {"generated", cell.generated},
              {"mean", cell.mean},
              {"half_width", cell.half_width},
              {"failed", cell.failed},
              {"runs", runs}};
  if (!cell.name.empty()) out["name"] = cell.name;
  return out;
}

json report_document(const std::string& command, const ExperimentConfig& config,
                     const json& body) {
  return {{"format", "goat-report"},
          {"version", kReportVersion},
          {"command", command},
          {"config", to_json(config)},
          {"result", body}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace goat
