#include <cmath>

#include <gtest/gtest.h>

#include "koopgen/error.hpp"
#include "koopgen/linalg.hpp"
#include "test_support.hpp"

namespace koopgen {
namespace {

using testing::max_abs;
using testing::random_diagonalizable;
using testing::random_matrix;

TEST(Pinv, MoorePenroseAxiomsOnRectangular) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix a = random_matrix(7, 4, seed);
    const Matrix p = linalg::pinv(a);
    EXPECT_LT(max_abs(a * p * a - a), 1e-10);
    EXPECT_LT(max_abs(p * a * p - p), 1e-10);
    EXPECT_LT(max_abs((a * p).transpose() - a * p), 1e-10);
    EXPECT_LT(max_abs((p * a).transpose() - p * a), 1e-10);
  }
}

TEST(Pinv, RankDeficientKeepsAxioms) {
  const Matrix u = random_matrix(6, 2, 11);
  const Matrix a = u * random_matrix(2, 5, 12);
  const Matrix p = linalg::pinv(a);
  EXPECT_EQ(p.rows(), 5);
  EXPECT_LT(max_abs(a * p * a - a), 1e-10);
  EXPECT_LT(max_abs(p * a * p - p), 1e-10);
}

TEST(Pinv, ZeroMatrixGivesZero) {
  const Matrix p = linalg::pinv(Matrix::Zero(3, 2));
  EXPECT_EQ(p.rows(), 2);
  EXPECT_EQ(max_abs(p), 0.0);
}

TEST(Pinv, RejectsBadRcondAndNan) {
  EXPECT_THROW(linalg::pinv(Matrix::Identity(2, 2), 0.0), InvalidArgument);
  Matrix a = Matrix::Identity(2, 2);
  a(0, 1) = std::nan("");
  EXPECT_THROW(linalg::pinv(a), NumericalFailure);
}

TEST(Lstsq, MatchesPinvProduct) {
  const Matrix a = random_matrix(9, 4, 3);
  const Matrix b = random_matrix(9, 2, 4);
  EXPECT_LT(max_abs(linalg::lstsq(a, b) - linalg::pinv(a) * b), 1e-12);
  EXPECT_THROW(linalg::lstsq(a, random_matrix(8, 2, 5)), ShapeMismatch);
}

TEST(Tikhonov, ZeroDeltaIsPinvAndShrinksOtherwise) {
  const Matrix a = random_matrix(5, 3, 21);
  EXPECT_LT(max_abs(linalg::tikhonov_pinv(a, 0.0) - linalg::pinv(a)), 1e-14);
  const Matrix r = linalg::tikhonov_pinv(a, 0.5);
  EXPECT_LT(linalg::singular_values(r)(0), linalg::singular_values(linalg::pinv(a))(0));
  EXPECT_THROW(linalg::tikhonov_pinv(a, -1.0), InvalidArgument);
}

TEST(Condition, DiagonalRatio) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 10.0, 2.0, 0.5;
  EXPECT_NEAR(linalg::condition_number(d), 20.0, 1e-12);
  d(2, 2) = 0.0;
  EXPECT_TRUE(std::isinf(linalg::condition_number(d)));
}

TEST(MatrixLog, ExpRoundTripOnDiagonalizable) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix g = random_diagonalizable(5, -2.0, 1.0, seed);
    const linalg::MatrixLog lg = linalg::matrix_log(linalg::matrix_exp(g));
    EXPECT_LT(max_abs(lg.real - g), 1e-8) << "seed " << seed;
    EXPECT_LT(max_abs(lg.imag), 1e-8);
  }
}

TEST(MatrixLog, ComplexPairStaysReal) {
  Matrix g(2, 2);
  g << -0.1, 1.0, -1.0, -0.1;
  const linalg::MatrixLog lg = linalg::matrix_log(linalg::matrix_exp(g));
  EXPECT_LT(max_abs(lg.real - g), 1e-10);
  EXPECT_LT(max_abs(lg.imag), 1e-10);
}

TEST(MatrixLog, NegativeRealEigenvalueIsBranchCut) {
  Matrix k = Matrix::Zero(2, 2);
  k.diagonal() << -0.5, 0.5;
  EXPECT_THROW(linalg::matrix_log(k), BranchCut);
}

TEST(MatrixLog, SingularIsBranchCut) {
  Matrix k = Matrix::Zero(2, 2);
  k(0, 0) = 1.0;
  EXPECT_THROW(linalg::matrix_log(k), BranchCut);
}

TEST(MatrixLog, JordanBlockIsDefective) {
  Matrix k(2, 2);
  k << 1.0, 1.0, 0.0, 1.0;
  EXPECT_THROW(linalg::matrix_log(k), DefectiveMatrix);
}

TEST(MatrixExp, ScalarAndNilpotent) {
  Matrix a(1, 1);
  a << -1.0;
  EXPECT_NEAR(linalg::matrix_exp(a)(0, 0), std::exp(-1.0), 1e-15);
  Matrix n(2, 2);
  n << 0.0, 2.0, 0.0, 0.0;
  const Matrix e = linalg::matrix_exp(n);
  EXPECT_NEAR(e(0, 1), 2.0, 1e-14);
  EXPECT_NEAR(e(0, 0), 1.0, 1e-14);
}

TEST(ComplexEig, UnitColumnsAndConditionOfNormal) {
  const Matrix s = random_matrix(4, 4, 8);
  const linalg::ComplexEig eig = linalg::complex_eig(s + s.transpose());
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(eig.eigenvectors.col(j).norm(), 1.0, 1e-12);
  EXPECT_NEAR(eig.condition_estimate, 1.0, 1e-8);
}

}  // namespace
}  // namespace koopgen
