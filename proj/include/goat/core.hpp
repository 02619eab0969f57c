// Discrete measures, domain sequences and transport plans.
//
// Every type here is immutable after construction. Constructors validate the
// type invariants and throw ValidationError, so any value that exists is valid.
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace goat {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kMassTolerance = 1e-9;

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative solver stops without meeting its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Returns raw / sum(raw). Throws ValidationError naming the first negative
/// index, or "zero total mass".
std::vector<double> normalize_weights(std::span<const double> raw);

/// Counts training-side reads of labels that are flagged evaluation-only.
/// Copies share the same counter.
class LabelAudit {
 public:
  LabelAudit() : count_(std::make_shared<std::atomic<long>>(0)) {}
  long reads() const { return count_->load(); }
  void record() const { count_->fetch_add(1); }
  bool same_as(const LabelAudit& other) const { return count_ == other.count_; }

 private:
  std::shared_ptr<std::atomic<long>> count_;
};

class WeightedDataset {
 public:
  WeightedDataset(Matrix points, Vector weights,
                  std::optional<std::vector<int>> labels = std::nullopt);

  static WeightedDataset uniform(Matrix points,
                                 std::optional<std::vector<int>> labels = std::nullopt);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  bool has_labels() const { return labels_ != nullptr; }

  /// Labels for training. Records an audit read when the labels are
  /// evaluation-only. Throws if unlabeled.
  const std::vector<int>& labels() const;
  /// Labels for scoring. Never audited.
  const std::vector<int>& evaluation_labels() const;
  bool labels_evaluation_only() const { return audit_.has_value(); }
  const std::optional<LabelAudit>& audit() const { return audit_; }

  /// 1 + largest label; 0 when unlabeled.
  int class_count() const;

  WeightedDataset without_labels() const;
  /// Same weights and labels (including the audit tag) at new locations.
  WeightedDataset with_points(Matrix points) const;
  WeightedDataset evaluation_only(const LabelAudit& audit) const;

 private:
  Matrix points_;
  Vector weights_;
  std::shared_ptr<const std::vector<int>> labels_;
  std::optional<LabelAudit> audit_;
};

enum class Provenance { given, generated };

const char* to_string(Provenance p);

/// Returns every violated invariant of a candidate domain list; empty when valid.
std::vector<std::string> validate_domains(std::span<const WeightedDataset> domains);

/// Ordered domains 0..T. Domain 0 is the labeled source; labels on 1..T are
/// tagged evaluation-only with this sequence's audit unless already tagged.
class DomainSequence {
 public:
  explicit DomainSequence(std::vector<WeightedDataset> domains,
                          std::vector<Provenance> provenance = {},
                          bool has_correspondence = false);

  std::size_t size() const { return domains_.size(); }
  /// T, the index of the target.
  std::size_t last() const { return domains_.size() - 1; }
  const WeightedDataset& operator[](std::size_t t) const { return domains_.at(t); }
  const WeightedDataset& source() const { return domains_.front(); }
  const WeightedDataset& target() const { return domains_.back(); }
  Provenance provenance(std::size_t t) const { return provenance_.at(t); }
  const std::vector<WeightedDataset>& domains() const { return domains_; }
  const std::vector<Provenance>& provenances() const { return provenance_; }
  /// Row i of every domain is the image of row i of the source.
  bool has_correspondence() const { return correspondence_; }

  /// Total audited label reads over domains 1..T.
  long label_reads() const;

 private:
  std::vector<WeightedDataset> domains_;
  std::vector<Provenance> provenance_;
  bool correspondence_;
  LabelAudit audit_;
};

std::vector<std::string> validate_sequence(const DomainSequence& seq);

struct PlanEntry {
  int source;
  int target;
  double mass;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

/// Sparse coupling. Entries are kept sorted by (source, target).
class TransportPlan {
 public:
  TransportPlan(std::size_t source_size, std::size_t target_size,
                std::vector<PlanEntry> entries);

  std::size_t source_size() const { return m_; }
  std::size_t target_size() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<PlanEntry>& entries() const { return entries_; }

  double total_mass() const;
  Vector row_marginals() const;
  Vector column_marginals() const;
  Matrix dense() const;

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<PlanEntry> entries_;
};

/// Largest absolute deviation of either marginal from the given weights.
double marginal_residual(const TransportPlan& plan, const Vector& source_weights,
                         const Vector& target_weights);

/// Rescales masses of an arbitrary positive entry list to total 1.
TransportPlan renormalized(std::size_t m, std::size_t n, std::vector<PlanEntry> entries);

/// One-hot m x C matrix of class labels.
class LabelMatrix {
 public:
  LabelMatrix(std::span<const int> labels, int class_count);
  const Matrix& values() const { return values_; }
  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  int class_count() const { return static_cast<int>(values_.cols()); }

 private:
  Matrix values_;
};

/// Seeded generator with platform-independent derived distributions
/// (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

/// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace goat
