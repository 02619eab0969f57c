#include "goat/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace goat {

std::vector<double> normalize_weights(std::span<const double> raw) {
  if (raw.empty()) throw ValidationError("empty weight vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0) || !std::isfinite(raw[i])) {
      throw ValidationError("weight " + std::to_string(i) + " is negative or not finite");
    }
    sum += raw[i];
  }
  if (sum <= 0.0) throw ValidationError("zero total mass");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / sum;
  return out;
}

// ---------------------------------------------------------------------------
// WeightedDataset

WeightedDataset::WeightedDataset(Matrix points, Vector weights,
                                 std::optional<std::vector<int>> labels)
    : points_(std::move(points)), weights_(std::move(weights)) {
  const auto n = static_cast<std::size_t>(points_.rows());
  if (n == 0) throw ValidationError("dataset must contain at least one point");
  if (static_cast<std::size_t>(weights_.size()) != n) {
    throw ValidationError("weights length " + std::to_string(weights_.size()) +
                          " does not match point count " + std::to_string(n));
  }
  if (!points_.allFinite()) throw ValidationError("points must be finite");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0)) {
      throw ValidationError("weight " + std::to_string(i) + " is negative");
    }
    sum += weights_[i];
  }
  if (std::abs(sum - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << sum << ", expected 1";
    throw ValidationError(os.str());
  }
  if (labels) {
    if (labels->size() != n) {
      throw ValidationError("labels length " + std::to_string(labels->size()) +
                            " does not match point count " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if ((*labels)[i] < 0) {
        throw ValidationError("label " + std::to_string(i) + " is negative");
      }
    }
    labels_ = std::make_shared<const std::vector<int>>(std::move(*labels));
  }
}

WeightedDataset WeightedDataset::uniform(Matrix points, std::optional<std::vector<int>> labels) {
  const auto n = points.rows();
  if (n == 0) throw ValidationError("dataset must contain at least one point");
  Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return WeightedDataset(std::move(points), std::move(w), std::move(labels));
}

const std::vector<int>& WeightedDataset::labels() const {
  if (!labels_) throw ValidationError("dataset is unlabeled");
  if (audit_) audit_->record();
  return *labels_;
}

const std::vector<int>& WeightedDataset::evaluation_labels() const {
  if (!labels_) throw ValidationError("dataset is unlabeled");
  return *labels_;
}

int WeightedDataset::class_count() const {
  if (!labels_ || labels_->empty()) return 0;
  return *std::max_element(labels_->begin(), labels_->end()) + 1;
}

WeightedDataset WeightedDataset::without_labels() const {
  WeightedDataset out = *this;
  out.labels_.reset();
  out.audit_.reset();
  return out;
}

WeightedDataset WeightedDataset::with_points(Matrix points) const {
  if (points.rows() != points_.rows()) {
    throw ValidationError("replacement points must keep the row count");
  }
  if (!points.allFinite()) throw ValidationError("points must be finite");
  WeightedDataset out = *this;
  out.points_ = std::move(points);
  return out;
}

WeightedDataset WeightedDataset::evaluation_only(const LabelAudit& audit) const {
  WeightedDataset out = *this;
  if (out.labels_) out.audit_ = audit;
  return out;
}

// ---------------------------------------------------------------------------
// DomainSequence

const char* to_string(Provenance p) {
  return p == Provenance::given ? "given" : "generated";
}

std::vector<std::string> validate_domains(std::span<const WeightedDataset> domains) {
  std::vector<std::string> report;
  if (domains.size() < 2) {
    report.push_back("sequence must contain at least 2 domains, got " +
                     std::to_string(domains.size()));
  }
  if (domains.empty()) return report;
  if (!domains.front().has_labels()) report.push_back("source must be labeled");
  const std::size_t d = domains.front().dim();
  for (std::size_t t = 0; t < domains.size(); ++t) {
    const auto& dom = domains[t];
    if (dom.dim() != d) {
      report.push_back("domain " + std::to_string(t) + " has feature dimension " +
                       std::to_string(dom.dim()) + ", expected " + std::to_string(d));
    }
    if (std::abs(dom.weights().sum() - 1.0) > kMassTolerance) {
      report.push_back("domain " + std::to_string(t) + " weights are not normalized");
    }
  }
  return report;
}

DomainSequence::DomainSequence(std::vector<WeightedDataset> domains,
                               std::vector<Provenance> provenance, bool has_correspondence)
    : domains_(std::move(domains)),
      provenance_(std::move(provenance)),
      correspondence_(has_correspondence) {
  const auto report = validate_domains(domains_);
  if (!report.empty()) {
    std::string msg = "invalid domain sequence:";
    for (const auto& r : report) msg += " " + r + ";";
    throw ValidationError(msg);
  }
  if (provenance_.empty()) provenance_.assign(domains_.size(), Provenance::given);
  if (provenance_.size() != domains_.size()) {
    throw ValidationError("provenance length does not match domain count");
  }
  if (correspondence_) {
    for (const auto& d : domains_) {
      if (d.size() != domains_.front().size()) {
        throw ValidationError("correspondence requires equal domain sizes");
      }
    }
  }
  for (std::size_t t = 1; t < domains_.size(); ++t) {
    if (domains_[t].has_labels() && !domains_[t].labels_evaluation_only()) {
      domains_[t] = domains_[t].evaluation_only(audit_);
    }
  }
}

long DomainSequence::label_reads() const {
  std::vector<LabelAudit> seen;
  long total = 0;
  for (std::size_t t = 1; t < domains_.size(); ++t) {
    const auto& a = domains_[t].audit();
    if (!a) continue;
    const bool dup = std::any_of(seen.begin(), seen.end(),
                                 [&](const LabelAudit& s) { return s.same_as(*a); });
    if (dup) continue;
    seen.push_back(*a);
    total += a->reads();
  }
  return total;
}

std::vector<std::string> validate_sequence(const DomainSequence& seq) {
  return validate_domains(seq.domains());
}

// ---------------------------------------------------------------------------
// TransportPlan

TransportPlan::TransportPlan(std::size_t source_size, std::size_t target_size,
                             std::vector<PlanEntry> entries)
    : m_(source_size), n_(target_size), entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("transport plan has no entries");
  double total = 0.0;
  for (const auto& e : entries_) {
    if (e.source < 0 || static_cast<std::size_t>(e.source) >= m_ || e.target < 0 ||
        static_cast<std::size_t>(e.target) >= n_) {
      throw ValidationError("plan entry (" + std::to_string(e.source) + ", " +
                            std::to_string(e.target) + ") is out of range");
    }
    if (!(e.mass > 0.0) || !std::isfinite(e.mass)) {
      throw ValidationError("plan masses must be strictly positive");
    }
    total += e.mass;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "plan mass sums to " << total << ", expected 1";
    throw ValidationError(os.str());
  }
  std::sort(entries_.begin(), entries_.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  for (std::size_t k = 1; k < entries_.size(); ++k) {
    if (entries_[k].source == entries_[k - 1].source &&
        entries_[k].target == entries_[k - 1].target) {
      throw ValidationError("duplicate plan entry");
    }
  }
}

double TransportPlan::total_mass() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.mass;
  return s;
}

Vector TransportPlan::row_marginals() const {
  Vector r = Vector::Zero(static_cast<Eigen::Index>(m_));
  for (const auto& e : entries_) r[e.source] += e.mass;
  return r;
}

Vector TransportPlan::column_marginals() const {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n_));
  for (const auto& e : entries_) c[e.target] += e.mass;
  return c;
}

Matrix TransportPlan::dense() const {
  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
  for (const auto& e : entries_) g(e.source, e.target) = e.mass;
  return g;
}

double marginal_residual(const TransportPlan& plan, const Vector& source_weights,
                         const Vector& target_weights) {
  const double r = (plan.row_marginals() - source_weights).cwiseAbs().maxCoeff();
  const double c = (plan.column_marginals() - target_weights).cwiseAbs().maxCoeff();
  return std::max(r, c);
}

TransportPlan renormalized(std::size_t m, std::size_t n, std::vector<PlanEntry> entries) {
  double total = 0.0;
  for (const auto& e : entries) total += e.mass;
  if (!(total > 0.0)) throw ValidationError("cutoff removes all mass");
  for (auto& e : entries) e.mass /= total;
  return TransportPlan(m, n, std::move(entries));
}

// ---------------------------------------------------------------------------
// LabelMatrix

LabelMatrix::LabelMatrix(std::span<const int> labels, int class_count) {
  if (class_count < 1) throw ValidationError("class count must be positive");
  values_ = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      throw ValidationError("label " + std::to_string(i) + " outside 0.." +
                            std::to_string(class_count - 1));
    }
    values_(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
}

// ---------------------------------------------------------------------------
// Rng

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ValidationError("empty sampling range");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace goat
