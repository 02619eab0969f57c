#include <omp.h>

#include <cmath>
#include <limits>

#include "goat/kernels.hpp"

namespace goat::kernels::parallel {

void pairwise_cost(const Matrix& a, const Matrix& b, double p, Matrix& out) {
  const Eigen::Index m = a.rows(), n = b.rows(), d = a.cols();
  out.resize(m, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = row::cost_entry(a.row(i).data(), b.row(j).data(), d, p);
    }
  }
}

void softmin_update(const Matrix& cost, const Vector& potential, const Vector& log_marginal,
                    double lambda, Vector& out) {
  const Eigen::Index m = cost.rows(), n = cost.cols();
  out.resize(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    out[i] = lambda * log_marginal[i] -
             lambda * row::softmin(cost.row(i).data(), potential.data(), n, lambda);
  }
}

void scaling_update(const Matrix& kernel, const Vector& marginal, const Vector& other,
                    Vector& out) {
  const Eigen::Index m = kernel.rows(), n = kernel.cols();
  out.resize(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* k = kernel.row(i).data();
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += k[j] * other[j];
    out[i] = marginal[i] / s;
  }
}

void log_plan_row_sums(const Matrix& cost, const Vector& f, const Vector& g, double lambda,
                       Vector& out) {
  const Eigen::Index m = cost.rows(), n = cost.cols();
  out.resize(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    const double* c = cost.row(i).data();
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += std::exp((f[i] + g[j] - c[j]) / lambda);
    out[i] = s;
  }
}

void affine_rows(const Matrix& x, const Matrix& w, const Vector& b, Matrix& out) {
  const Eigen::Index n = x.rows(), d = x.cols(), c = w.cols();
  out.resize(n, c);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) {
      double s = b[k];
      for (Eigen::Index l = 0; l < d; ++l) s += x(i, l) * w(l, k);
      out(i, k) = s;
    }
  }
}

void softmax_rows(Matrix& logits) {
  const Eigen::Index n = logits.rows(), c = logits.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) row::softmax(logits.row(i).data(), c);
}

}  // namespace goat::kernels::parallel
