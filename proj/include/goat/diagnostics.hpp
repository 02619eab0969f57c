// Computable quantities from the generalization analysis.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "goat/core.hpp"
#include "goat/model.hpp"

namespace goat {

struct PathLength {
  double total = 0.0;
  /// W_p between consecutive domains.
  std::vector<double> distances;
};

PathLength path_length(std::span<const WeightedDataset> domains, double p = 2.0);
PathLength path_length(const DomainSequence& seq, double p = 2.0);

/// max over candidates of eps_{t-1}(h) - sum_tau q_tau eps_tau(h), t = q.size(),
/// with 0-1 error on evaluation labels. A lower bound on the supremum over the
/// full hypothesis class.
double empirical_discrepancy(const DomainSequence& seq, std::span<const Classifier> candidates,
                             std::span<const double> q);

/// Binary linear classifiers with unit normals at `directions` evenly spaced
/// angles in the plane of the first two features, crossed with `offsets`.
std::vector<Classifier> linear_candidate_grid(int input_dim, int directions,
                                              std::span<const double> offsets);

/// max(L / delta_max, (1 / (2 (1 + delta_max sqrt(n))))^(2/3)).
double optimal_T(double L, double delta_max, long n);
/// Domain count used in practice: max(1, round(T*)).
long rounded_T(double t_star);

struct BoundInputs {
  double epsilon0 = 0.0;
  long T = 1;
  double Delta = 0.0;
  long n = 1;
  double rho = 1.0;
  double R = 1.0;

  void validate() const;
};

struct BoundTerm {
  std::string name;
  double value;
  /// False when only the order is known and the coefficient is set to 1.
  bool exact_coefficient;
  std::string note;
};

/// Term-by-term; never summed.
std::vector<BoundTerm> bound_terms(const BoundInputs& in);

/// Scalar scorer x -> w.x + b.
struct LinearScorer {
  Vector w;
  double b = 0.0;

  double lipschitz() const { return w.norm(); }
  double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

/// Score difference (class 1 minus class 0) of a linear binary classifier.
LinearScorer scorer_of(const Classifier& h);

struct Lemma1Result {
  double lhs;
  double rhs;
  double w1;
  double R;
  bool holds;
};

/// Labels {0, 1} are read as y in {-1, +1}. lhs = |E_mu l - E_nu l| with
/// l = |h(x) - y|; rhs = sqrt(R^2 + 1) W_1(mu, nu) under ||x - x'|| + |y - y'|.
Lemma1Result lemma1_check(const WeightedDataset& mu, const WeightedDataset& nu,
                          const LinearScorer& h);

}  // namespace goat
