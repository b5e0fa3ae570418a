/*
 Copyright 2026 The aasqp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "aasqp/linalg.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

namespace aasqp {
namespace {

Eigen::MatrixXd to_eigen(const Mat& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) e(i, j) = m(i, j);
  return e;
}

Mat random_mat(std::mt19937_64& rng, Index r, Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

Mat random_sym(std::mt19937_64& rng, Index n) { return symmetrize(random_mat(rng, n, n)); }

TEST(Cholesky, IdentityGivesIdentity) {
  EXPECT_EQ(cholesky(Mat::identity(3)), Mat::identity(3));
}

TEST(Cholesky, TwoByTwoHandExpansion) {
  const Mat l = cholesky(Mat::from_rows({{4, 2}, {2, 3}}));
  EXPECT_DOUBLE_EQ(l(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(l(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(l(1, 0), 1.0);
  EXPECT_NEAR(l(1, 1), std::sqrt(2.0), 1e-15);
}

TEST(Cholesky, IndefiniteFails) {
  try {
    cholesky(Mat::from_rows({{1, 2}, {2, 1}}));
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(Cholesky, ReconstructionProperty) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + trial % 9;
    const Mat a = random_mat(rng, n, n);
    Mat m = symmetrize(tmul(a, a));
    for (Index i = 0; i < n; ++i) m(i, i) += 0.1;
    const Mat l = cholesky(m);
    EXPECT_LE(norm_fro(l * l.transpose() - m), 1e-10 * (1.0 + norm_fro(m)));
  }
}

TEST(QrLeastSquares, Identity) {
  const Vec x = qr_least_squares(Mat::identity(2), Vec{1, 2});
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);
}

TEST(QrLeastSquares, MeanMinimizes) {
  const Vec x = qr_least_squares(Mat::from_rows({{1}, {1}}), Vec{0, 2});
  ASSERT_EQ(x.size(), 1);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
}

TEST(QrLeastSquares, DuplicatedColumnsMatchPseudoInverse) {
  const Mat a = Mat::from_rows({{1, 1, 2}, {2, 2, 0}, {3, 3, 1}, {0, 0, 1}});
  const Vec b{1, -1, 2, 0.5};
  const Vec x = qr_least_squares(a, b);
  const Eigen::VectorXd eb = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  const Eigen::VectorXd xp = to_eigen(a).completeOrthogonalDecomposition().pseudoInverse() * eb;
  const Vec res = b - a * x;
  const double res_oracle = (eb - to_eigen(a) * xp).norm();
  EXPECT_NEAR(norm2(res), res_oracle, 1e-12);
  for (Index i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], xp(i), 1e-10);
}

TEST(QrLeastSquares, RandomInstancesMatchPseudoInverse) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Index cols = 1 + trial % 4;
    const Index rows = cols + trial % 5;
    Mat a = random_mat(rng, rows, cols);
    if (trial % 3 == 0 && cols > 1) a.set_col(cols - 1, 2.0 * a.col(0));
    const Vec b = random_mat(rng, rows, 1).col(0);
    const Vec x = qr_least_squares(a, b);
    const Eigen::VectorXd eb = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    const Eigen::VectorXd xp = to_eigen(a).completeOrthogonalDecomposition().pseudoInverse() * eb;
    for (Index i = 0; i < cols; ++i) EXPECT_NEAR(x[i], xp(i), 1e-8);
    // never worse than x = 0
    EXPECT_LE(norm2(b - a * x), norm2(b) + 1e-14);
    // normal equations
    const Vec ne = tmul(a, b - a * x);
    EXPECT_LE(norm_inf(ne), 1e-8 * (norm_fro(a) * norm2(b) + 1.0));
  }
}

TEST(Nullspace, OrthogonalToColumns) {
  std::mt19937_64 rng(3);
  const Mat a = random_mat(rng, 7, 3);
  Index rank = 0;
  const Mat z = nullspace_of_transpose(a, &rank);
  EXPECT_EQ(rank, 3);
  ASSERT_EQ(z.cols(), 4);
  EXPECT_LE(max_abs(tmul(a, z)), 1e-12);
  EXPECT_LE(norm_fro(tmul(z, z) - Mat::identity(4)), 1e-12);
}

TEST(SymEig, Diagonal) {
  const SymEig e = sym_eig(Mat::diagonal(Vec{3, 1, 2}));
  EXPECT_DOUBLE_EQ(e.values[0], 1.0);
  EXPECT_DOUBLE_EQ(e.values[1], 2.0);
  EXPECT_DOUBLE_EQ(e.values[2], 3.0);
}

TEST(SymEig, SwapMatrix) {
  const SymEig e = sym_eig(Mat::from_rows({{0, 1}, {1, 0}}));
  EXPECT_NEAR(e.values[0], -1.0, 1e-15);
  EXPECT_NEAR(e.values[1], 1.0, 1e-15);
}

TEST(SymEig, RandomReconstructionAndOrthonormality) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + trial % 12;
    const Mat m = random_sym(rng, n);
    const SymEig e = sym_eig(m);
    const Mat rec = e.vectors * Mat::diagonal(e.values) * e.vectors.transpose();
    EXPECT_LE(norm_fro(rec - m), 1e-8 * (1.0 + norm_fro(m)));
    EXPECT_LE(norm_fro(tmul(e.vectors, e.vectors) - Mat::identity(n)), 1e-8);
    for (Index i = 1; i < n; ++i) EXPECT_LE(e.values[i - 1], e.values[i]);
  }
}

TEST(SymEig, RejectsNonSymmetric) {
  try {
    sym_eig(Mat::from_rows({{0, 1}, {0, 0}}));
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSymmetric);
  }
}

TEST(SpectralRadius, Diagonal) { EXPECT_NEAR(spectral_radius(Mat::diagonal(Vec{0.5, -0.9})), 0.9, 1e-14); }

TEST(SpectralRadius, ScaledRotation) {
  const Mat r = Mat::from_rows({{0, -0.7}, {0.7, 0}});
  EXPECT_NEAR(spectral_radius(r), 0.7, 1e-14);
}

TEST(SpectralRadius, Nilpotent) { EXPECT_EQ(spectral_radius(Mat::from_rows({{0, 1}, {0, 0}})), 0.0); }

TEST(SpectralRadius, RandomAgainstEigenAndBoundedByInfNorm) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + trial % 25;
    const Mat m = random_mat(rng, n, n);
    const double rho = spectral_radius(m);
    const double oracle = to_eigen(m).eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(rho, oracle, 1e-9 * (1.0 + oracle));
    EXPECT_LE(rho, norm_inf(m) * (1.0 + 1e-12));
  }
}

TEST(SpectralRadius, BadlyScaledMatrix) {
  // Similarity transform with wildly different scales; balancing must recover the spectrum.
  std::mt19937_64 rng(13);
  const Index n = 8;
  const Mat base = random_mat(rng, n, n);
  Mat d = Mat::identity(n);
  for (Index i = 0; i < n; ++i) d(i, i) = std::pow(10.0, static_cast<double>(i) - 4.0);
  Mat dinv = Mat::identity(n);
  for (Index i = 0; i < n; ++i) dinv(i, i) = 1.0 / d(i, i);
  const Mat m = d * base * dinv;
  EXPECT_NEAR(spectral_radius(m), spectral_radius(base), 1e-8);
}

TEST(LuSolve, RandomSystems) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + trial % 7;
    const Mat a = random_mat(rng, n, n);
    const Vec b = random_mat(rng, n, 1).col(0);
    const Vec x = lu_solve(a, b);
    EXPECT_LE(norm_inf(a * x - b), 1e-10);
  }
}

}  // namespace
}  // namespace aasqp
