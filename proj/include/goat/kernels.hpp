// Data-parallel inner loops.
//
// Each kernel has a serial reference in goat::kernels::serial and an OpenMP
// version in goat::kernels::parallel. The parallel versions split work by
// output row only and never reduce across threads, so they must agree with the
// serial reference bit for bit regardless of thread count.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "goat/core.hpp"

namespace goat::kernels {

namespace serial {

/// out(i, j) = ||a_i - b_j||_2^p.
void pairwise_cost(const Matrix& a, const Matrix& b, double p, Matrix& out);

/// Log-domain scaling step:
///   out_i = lambda * log_marginal_i - lambda * LSE_j((potential_j - cost(i, j)) / lambda).
/// Pass the transposed cost to update the other side.
void softmin_update(const Matrix& cost, const Vector& potential, const Vector& log_marginal,
                    double lambda, Vector& out);

/// Linear-domain scaling step: out_i = marginal_i / sum_j kernel(i, j) * other_j.
void scaling_update(const Matrix& kernel, const Vector& marginal, const Vector& other,
                    Vector& out);

/// Row sums of exp((f_i + g_j - cost(i, j)) / lambda).
void log_plan_row_sums(const Matrix& cost, const Vector& f, const Vector& g, double lambda,
                       Vector& out);

/// out = x * w + 1 b^T, accumulated left to right over the inner index.
void affine_rows(const Matrix& x, const Matrix& w, const Vector& b, Matrix& out);

/// In-place numerically stable softmax of every row.
void softmax_rows(Matrix& logits);

}  // namespace serial

namespace parallel {

void pairwise_cost(const Matrix& a, const Matrix& b, double p, Matrix& out);
void softmin_update(const Matrix& cost, const Vector& potential, const Vector& log_marginal,
                    double lambda, Vector& out);
void scaling_update(const Matrix& kernel, const Vector& marginal, const Vector& other,
                    Vector& out);
void log_plan_row_sums(const Matrix& cost, const Vector& f, const Vector& g, double lambda,
                       Vector& out);
void affine_rows(const Matrix& x, const Matrix& w, const Vector& b, Matrix& out);
void softmax_rows(Matrix& logits);

}  // namespace parallel

// Row-level building blocks shared by both variants.
namespace row {

inline double cost_entry(const double* a, const double* b, Eigen::Index d, double p) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  if (p == 2.0) return s;
  const double r = std::sqrt(s);
  return p == 1.0 ? r : std::pow(r, p);
}

inline double softmin(const double* cost, const double* potential, Eigen::Index n,
                      double lambda) {
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) mx = std::max(mx, (potential[j] - cost[j]) / lambda);
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) s += std::exp((potential[j] - cost[j]) / lambda - mx);
  return mx + std::log(s);
}

inline void softmax(double* z, Eigen::Index c) {
  double mx = z[0];
  for (Eigen::Index k = 1; k < c; ++k) mx = std::max(mx, z[k]);
  double s = 0.0;
  for (Eigen::Index k = 0; k < c; ++k) {
    z[k] = std::exp(z[k] - mx);
    s += z[k];
  }
  for (Eigen::Index k = 0; k < c; ++k) z[k] /= s;
}

}  // namespace row

}  // namespace goat::kernels
