// Seeded random instances shared by the unit and acceptance tests.
#pragma once

#include <cstdint>
#include <vector>

#include "goat/core.hpp"
#include "goat/ot.hpp"
#include "oracles.hpp"

namespace testing_support {

using goat::Matrix;
using goat::Vector;

inline Matrix gaussian_points(std::size_t n, std::size_t d, goat::Rng& rng, double scale = 1.0,
                              double shift = 0.0) {
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(i, k) = shift + scale * rng.normal();
  }
  return m;
}

/// Weights uniform(0.05, 1) then normalized, so none is zero.
inline Vector random_weights(std::size_t n, goat::Rng& rng) {
  std::vector<double> raw(n);
  for (auto& w : raw) w = 0.05 + 0.95 * rng.uniform();
  const auto w = goat::normalize_weights(raw);
  return Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(n));
}

inline Vector uniform_weights(std::size_t n) {
  return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

inline oracle::Grid to_grid(const Matrix& m) {
  oracle::Grid g(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) g[static_cast<std::size_t>(i)].push_back(m(i, j));
  }
  return g;
}

inline std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// Cost recomputed from raw coordinates, independent of cost_matrix.
inline oracle::Grid oracle_cost(const Matrix& a, const Matrix& b, double p) {
  oracle::Grid g(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const std::vector<double> x(a.row(i).data(), a.row(i).data() + a.cols());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const std::vector<double> y(b.row(j).data(), b.row(j).data() + b.cols());
      g[static_cast<std::size_t>(i)].push_back(oracle::cost(x, y, p));
    }
  }
  return g;
}

/// Two random labels per dataset, both classes present.
inline std::vector<int> binary_labels(std::size_t n, goat::Rng& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(2));
  y[0] = 0;
  if (n > 1) y[1] = 1;
  return y;
}

}  // namespace testing_support
