#pragma once

// Dense linear-algebra kernels shared by every learner. All routines take
// values and return values; nothing here keeps state.

#include <complex>

#include <Eigen/Dense>

namespace koopgen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace linalg {

inline constexpr double kDefaultRcond = 1e-12;
/// cond(V) above which an eigenbasis is treated as defective.
inline constexpr double kDefectiveThreshold = 1e12;

struct ComplexEig {
  ComplexVector eigenvalues;
  ComplexMatrix eigenvectors;  // unit-norm columns
  double condition_estimate = 0.0;
};

struct MatrixLog {
  Matrix real;
  Matrix imag;
};

/// Throws NumericalFailure if any entry is NaN or infinite.
void require_finite(const Matrix& a, const char* what);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// rcond * sigma_max are treated as zero.
Matrix pinv(const Matrix& a, double rcond = kDefaultRcond);

/// Minimum-norm least-squares solution of a * x = b via SVD; equal to
/// pinv(a, rcond) * b without forming the pseudoinverse.
Matrix lstsq(const Matrix& a, const Matrix& b, double rcond = kDefaultRcond);

/// (a^T a + delta I)^{-1} a^T, evaluated per singular value as
/// sigma / (sigma^2 + delta). delta == 0 falls back to pinv.
Matrix tikhonov_pinv(const Matrix& a, double delta);

Vector singular_values(const Matrix& a);

/// sigma_max / sigma_min; infinity for a numerically singular matrix.
double condition_number(const Matrix& a);

ComplexEig complex_eig(const Matrix& a);

/// Principal logarithm V diag(Log lambda) V^{-1}, split into real and
/// imaginary parts.
MatrixLog matrix_log(const Matrix& a);

/// Scaling-and-squaring Pade exponential.
Matrix matrix_exp(const Matrix& a);

}  // namespace linalg
}  // namespace koopgen
