// Config-driven experiment runner behind the command-line tool.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "goat/core.hpp"
#include "goat/diagnostics.hpp"
#include "goat/gda.hpp"

namespace goat {

inline constexpr int kReportVersion = 1;

/// Every schema violation in a config, one "field.path: problem" per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct TaskSpec {
  enum class Kind { rotation, shift, manifest };
  Kind kind = Kind::shift;
  std::size_t n = 500;
  // rotation
  double noise = 0.1;
  double start_angle = 0.0;
  double end_angle = 120.0;
  // shift
  double sigma = 0.3;
  std::vector<double> start_offset{0.0, 0.0};
  std::vector<double> end_offset{4.0, 0.0};
  /// Independent base samples per domain (no correspondence).
  bool resample = false;
  // manifest; relative paths resolve against the config file.
  std::filesystem::path manifest;
};

struct DiagnoseSpec {
  // Overrides for T*; unset means endpoint W_p, mean step and target size.
  std::optional<double> L;
  std::optional<double> delta_max;
  std::optional<long> n;
  double rho = 1.0;
  /// Classifier Lipschitz constant; unset means the estimate of the final model.
  std::optional<double> R;
};

struct ExperimentConfig {
  TaskSpec task;
  /// Rows of the grid: numbers of given intermediates.
  std::vector<std::size_t> given{0};
  /// Columns: generated domains per consecutive pair.
  std::vector<std::size_t> generated{0};
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  GoatConfig goat{.report_path_length = false};
  bool select_k = false;
  /// The (given, generated) cell used by ablations, generate and diagnose.
  std::optional<std::size_t> focus_given;
  std::optional<std::size_t> focus_generated;
  DiagnoseSpec diagnose;

  std::size_t cell_given() const { return focus_given.value_or(given.front()); }
  std::size_t cell_generated() const { return focus_generated.value_or(generated.back()); }
};

/// Throws ConfigError listing every problem found.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// All fields, defaults filled in; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

/// Seed of replicate r.
std::uint64_t replicate_seed(const ExperimentConfig& config, std::size_t r);

/// Source, `given` evenly spaced intermediates and target. Manifest tasks
/// pick the intermediates at evenly spaced positions among those stored.
DomainSequence build_task(const ExperimentConfig& config, std::size_t given,
                          std::uint64_t seed);

struct RunRecord {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  ExperimentReport report;
  /// k chosen when select_k is on.
  std::optional<std::size_t> selected_k;
};

struct CellSummary {
  std::string name;
  std::size_t given = 0;
  std::size_t generated = 0;
  std::vector<RunRecord> runs;
  double mean = 0.0;
  /// 1.96 * sample std / sqrt(runs); 0 with a single run.
  double half_width = 0.0;
  bool failed = false;
};

/// Mean and confidence half-width over successful runs.
void summarize(CellSummary& cell);

struct GridResult {
  std::vector<CellSummary> cells;  // row-major over given x generated
  bool any_failed() const;
};

/// jobs bounds the number of concurrent pipeline runs.
GridResult run_grid(const ExperimentConfig& config, int jobs = 1);
/// Header "given\generated,k0,k1,..."; cells "mean+-half_width" or "failed".
std::string grid_csv(const ExperimentConfig& config, const GridResult& grid);

enum class AblationKind { plan, encoder };
AblationKind parse_ablation_kind(std::string_view text);
const char* to_string(AblationKind kind);

/// Rows random, uniform, ot, oracle (plan) or identity, standardize, hidden
/// (encoder), all on the focus cell with shared seeds.
std::vector<CellSummary> run_ablation(const ExperimentConfig& config, AblationKind kind,
                                      int jobs = 1);

/// Expanded sequence of the focus cell, first replicate, raw features.
DomainSequence generate_domains(const ExperimentConfig& config);

nlohmann::json diagnose(const ExperimentConfig& config);

nlohmann::json report_document(const std::string& command, const ExperimentConfig& config,
                               const nlohmann::json& body);
nlohmann::json to_json(const CellSummary& cell);
/// Fixed formatting: two-space indent, trailing newline.
std::string dump(const nlohmann::json& doc);

}  // namespace goat
