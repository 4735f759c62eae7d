#include "koopgen/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "koopgen/error.hpp"

namespace koopgen::linalg {

namespace {

using Svd = Eigen::JacobiSVD<Matrix>;

bool is_tall(const Matrix& a) { return a.rows() > 4 * a.cols() && a.rows() > 256; }

Svd thin_svd(const Matrix& a) {
  require_finite(a, "SVD input");
  Svd svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw NumericalFailure("SVD did not converge");
  }
  return svd;
}

// Reciprocal singular values with the rcond cut applied.
Vector inverted_spectrum(const Vector& sigma, double rcond) {
  Vector inv = Vector::Zero(sigma.size());
  if (sigma.size() == 0) return inv;
  const double cutoff = rcond * sigma(0);
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff && sigma(i) > 0.0) inv(i) = 1.0 / sigma(i);
  }
  return inv;
}

}  // namespace

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw NumericalFailure(std::string(what) + " contains non-finite entries");
  }
}

Matrix pinv(const Matrix& a, double rcond) {
  if (!(rcond > 0.0 && rcond < 1.0)) throw InvalidArgument("pinv: rcond must lie in (0,1)");
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  const Svd svd = thin_svd(a);
  const Vector inv = inverted_spectrum(svd.singularValues(), rcond);
  Matrix out = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  require_finite(out, "pinv result");
  return out;
}

Matrix lstsq(const Matrix& a, const Matrix& b, double rcond) {
  if (a.rows() != b.rows()) {
    throw ShapeMismatch("lstsq: lhs has " + std::to_string(a.rows()) + " rows, rhs has " +
                        std::to_string(b.rows()));
  }
  if (a.size() == 0) return Matrix::Zero(a.cols(), b.cols());
  if (is_tall(a)) {
    // A = QR keeps the singular values, so the rcond cut is unchanged.
    require_finite(a, "SVD input");
    const Eigen::HouseholderQR<Matrix> qr(a);
    const Eigen::Index n = a.cols();
    const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const Matrix qtb = (qr.householderQ().adjoint() * b).topRows(n);
    return lstsq(r, qtb, rcond);
  }
  const Svd svd = thin_svd(a);
  const Vector inv = inverted_spectrum(svd.singularValues(), rcond);
  Matrix out = svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * b));
  require_finite(out, "lstsq result");
  return out;
}

Matrix tikhonov_pinv(const Matrix& a, double delta) {
  if (delta < 0.0) throw InvalidArgument("tikhonov_pinv: delta must be nonnegative");
  if (delta == 0.0) return pinv(a);
  const Svd svd = thin_svd(a);
  const Vector& s = svd.singularValues();
  Vector filt(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) filt(i) = s(i) / (s(i) * s(i) + delta);
  Matrix out = svd.matrixV() * filt.asDiagonal() * svd.matrixU().transpose();
  require_finite(out, "tikhonov_pinv result");
  return out;
}

Vector singular_values(const Matrix& a) {
  require_finite(a, "singular_values input");
  if (is_tall(a)) {
    const Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    return Eigen::JacobiSVD<Matrix>(r).singularValues();
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

double condition_number(const Matrix& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  const Vector s = singular_values(a);
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

ComplexEig complex_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("complex_eig: matrix must be square");
  require_finite(a, "complex_eig input");
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigendecomposition did not converge");

  ComplexEig out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  for (Eigen::Index j = 0; j < out.eigenvectors.cols(); ++j) {
    const double n = out.eigenvectors.col(j).norm();
    if (n > 0.0) out.eigenvectors.col(j) /= n;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(out.eigenvectors);
  const auto& s = svd.singularValues();
  const double smin = s.size() ? s(s.size() - 1) : 0.0;
  out.condition_estimate =
      smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  return out;
}

MatrixLog matrix_log(const Matrix& a) {
  const ComplexEig eig = complex_eig(a);
  if (!(eig.condition_estimate <= kDefectiveThreshold)) {
    throw DefectiveMatrix("matrix_log: eigenvector basis condition " +
                          std::to_string(eig.condition_estimate) + " exceeds 1e12");
  }
  const Eigen::Index n = a.rows();
  ComplexVector logs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lam = eig.eigenvalues(i);
    const double mag = std::abs(lam);
    if (mag < 1e-14) throw BranchCut("matrix_log: eigenvalue at the origin");
    if (lam.real() < 0.0 && std::abs(lam.imag()) <= 1e-12 * mag) {
      throw BranchCut("matrix_log: eigenvalue " + std::to_string(lam.real()) +
                      " on the negative real axis");
    }
    logs(i) = std::log(lam);
  }
  const ComplexMatrix& v = eig.eigenvectors;
  const ComplexMatrix scaled = v * logs.asDiagonal();
  // scaled * V^{-1} == (V^{-T} scaled^T)^T
  const ComplexMatrix out =
      v.transpose().partialPivLu().solve(scaled.transpose()).transpose();
  MatrixLog result{out.real(), out.imag()};
  require_finite(result.real, "matrix_log result");
  require_finite(result.imag, "matrix_log result");
  return result;
}

Matrix matrix_exp(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("matrix_exp: matrix must be square");
  require_finite(a, "matrix_exp input");
  Matrix out = a.exp();
  if (!out.allFinite()) throw NumericalFailure("matrix_exp: overflow");
  return out;
}

}  // namespace koopgen::linalg
