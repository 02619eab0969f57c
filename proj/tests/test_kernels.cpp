#include <gtest/gtest.h>
#include <omp.h>

#include <cstring>

#include "goat/kernels.hpp"
#include "helpers.hpp"

using namespace goat;
namespace ts = testing_support;

namespace {

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

class ThreadCounts : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(GetParam());
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

}  // namespace

TEST_P(ThreadCounts, PairwiseCostMatchesSerial) {
  Rng rng(11);
  const Matrix a = ts::gaussian_points(137, 5, rng);
  const Matrix b = ts::gaussian_points(91, 5, rng);
  for (double p : {1.0, 2.0, 1.5}) {
    Matrix s, q;
    kernels::serial::pairwise_cost(a, b, p, s);
    kernels::parallel::pairwise_cost(a, b, p, q);
    EXPECT_TRUE(bitwise_equal(s, q)) << "p = " << p;
  }
}

TEST_P(ThreadCounts, ScalingStepsMatchSerial) {
  Rng rng(12);
  Matrix cost;
  kernels::serial::pairwise_cost(ts::gaussian_points(64, 2, rng), ts::gaussian_points(80, 2, rng),
                                 2.0, cost);
  const Vector pot = ts::gaussian_points(80, 1, rng).col(0);
  const Vector logm = ts::gaussian_points(64, 1, rng).col(0);
  Vector s, q;
  kernels::serial::softmin_update(cost, pot, logm, 0.05, s);
  kernels::parallel::softmin_update(cost, pot, logm, 0.05, q);
  EXPECT_TRUE(bitwise_equal(s, q));

  const Matrix kernel = (-cost.array() / 0.5).exp().matrix();
  const Vector other = Vector::Constant(80, 0.3);
  const Vector marg = Vector::Constant(64, 1.0 / 64);
  kernels::serial::scaling_update(kernel, marg, other, s);
  kernels::parallel::scaling_update(kernel, marg, other, q);
  EXPECT_TRUE(bitwise_equal(s, q));

  const Vector f = Vector::Zero(64);
  kernels::serial::log_plan_row_sums(cost, f, pot, 0.1, s);
  kernels::parallel::log_plan_row_sums(cost, f, pot, 0.1, q);
  EXPECT_TRUE(bitwise_equal(s, q));
}

TEST_P(ThreadCounts, AffineSoftmaxMatchesSerial) {
  Rng rng(13);
  const Matrix x = ts::gaussian_points(301, 7, rng);
  const Matrix w = ts::gaussian_points(7, 4, rng);
  const Vector b = ts::gaussian_points(4, 1, rng).col(0);
  Matrix s, q;
  kernels::serial::affine_rows(x, w, b, s);
  kernels::parallel::affine_rows(x, w, b, q);
  EXPECT_TRUE(bitwise_equal(s, q));
  kernels::serial::softmax_rows(s);
  kernels::parallel::softmax_rows(q);
  EXPECT_TRUE(bitwise_equal(s, q));
  for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_NEAR(s.row(i).sum(), 1.0, 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Kernels, ThreadCounts, ::testing::Values(1, 2, 3, 4));

TEST(Kernels, SerialCostAgreesWithOracle) {
  Rng rng(14);
  const Matrix a = ts::gaussian_points(9, 3, rng);
  const Matrix b = ts::gaussian_points(6, 3, rng);
  Matrix c;
  kernels::serial::pairwise_cost(a, b, 3.0, c);
  const auto ref = ts::oracle_cost(a, b, 3.0);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(c(i, j), ref[i][j], 1e-12 * (1.0 + ref[i][j]));
  }
}

TEST(Kernels, SoftmaxStableForLargeLogits) {
  Matrix z(1, 3);
  z << 1000.0, 1000.0, -1000.0;
  kernels::serial::softmax_rows(z);
  EXPECT_DOUBLE_EQ(z(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(z(0, 2), 0.0);
}
