#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "koopgen/baselines.hpp"
#include "koopgen/error.hpp"
#include "koopgen/linalg.hpp"
#include "koopgen/systems.hpp"
#include "test_support.hpp"

namespace koopgen {
namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

KoopmanMatrix scalar_k(double k, double tau) {
  KoopmanMatrix km;
  km.K = Matrix::Constant(1, 1, k);
  km.tau = tau;
  return km;
}

// EDMD of f(x) = a x on monomials 1..n from exact one-step data.
KoopmanMatrix linear_edmd(double a, double tau, int degree) {
  const SystemSpec s = builtin_system("linear", {{"a", a}});
  const Matrix x0 = sample_initial_conditions(s.domain, 40, 3);
  auto dict = std::make_shared<const Dictionary>(Dictionary::monomial_total_degree(1, degree));
  const Matrix step = x0 * std::exp(a * tau);
  return edmd_learn(dict->evaluate_batch(x0), dict->evaluate_batch(step), tau, dict);
}

TEST(Edmd, ScalarFlow) {
  const Matrix x = column({0.3, -0.5, 0.9});
  const KoopmanMatrix km = edmd_learn(x, x * std::exp(-0.1), 0.1);
  EXPECT_NEAR(km.K(0, 0), 0.904837, 1e-6);
}

TEST(Edmd, ConstantRowAndIdentity) {
  const KoopmanMatrix km = linear_edmd(-1.0, 0.1, 2);
  EXPECT_NEAR(km.K(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(km.K(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(km.K(1, 0), 0.0, 1e-12);
  const Matrix x = testing::random_matrix(10, 3, 5);
  EXPECT_LT((edmd_learn(x, x, 0.1).K - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(edmd_learn(x, x, 0.0), InvalidArgument);
}

TEST(Fdm, ScalarAndIdentity) {
  EXPECT_NEAR(fdm_learn(scalar_k(std::exp(-0.01), 0.01)).L(0, 0), -0.995017, 1e-6);
  KoopmanMatrix id;
  id.K = Matrix::Identity(3, 3);
  id.tau = 0.2;
  const LearnedGenerator g = fdm_learn(id);
  EXPECT_EQ(g.L.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.method, Method::kFdm);
}

TEST(Fdm, FirstOrderInTau) {
  const double e1 = std::abs(fdm_learn(linear_edmd(-1.0, 0.1, 1)).L(1, 1) + 1.0);
  const double e2 = std::abs(fdm_learn(linear_edmd(-1.0, 0.05, 1)).L(1, 1) + 1.0);
  EXPECT_GE(e1 / e2, 1.8);
  EXPECT_LE(e1 / e2, 2.2);
}

TEST(Klm, ScalarExact) {
  const LearnedGenerator g = klm_learn(scalar_k(std::exp(-0.01), 0.01));
  EXPECT_NEAR(g.L(0, 0), -1.0, 1e-12);
  EXPECT_EQ(g.imag_norm, 0.0);
  EXPECT_EQ(g.method, Method::kKlm);
}

TEST(Klm, ExpRoundTrip) {
  const Matrix gen = testing::random_diagonalizable(4, -1.5, 0.5, 13);
  KoopmanMatrix km;
  km.K = linalg::matrix_exp(0.1 * gen);
  km.tau = 0.1;
  const LearnedGenerator g = klm_learn(km);
  EXPECT_LT((g.L - gen).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE(g.imag_norm, 1e-10);
}

TEST(Klm, NegativeEigenvalueFails) {
  KoopmanMatrix km;
  km.K = Matrix::Zero(2, 2);
  km.K.diagonal() << -0.5, 0.5;
  km.tau = 0.1;
  EXPECT_THROW(klm_learn(km), BranchCut);
}

TEST(Klm, ExactOnLinearFlowForAnyTau) {
  for (double tau : {0.01, 0.1, 0.5}) {
    const LearnedGenerator g = klm_learn(linear_edmd(-0.5, tau, 3));
    Matrix want = Matrix::Zero(4, 4);
    want.diagonal() << 0.0, -0.5, -1.0, -1.5;
    EXPECT_LT((g.L - want).cwiseAbs().maxCoeff(), 1e-8) << tau;
  }
}

TEST(Baselines, FdmKlmGapIsOrderTau) {
  double prev = 0.0;
  for (double tau : {0.1, 0.05, 0.025}) {
    const KoopmanMatrix km = linear_edmd(-1.0, tau, 2);
    const double gap = (fdm_learn(km).L - klm_learn(km).L).cwiseAbs().maxCoeff();
    if (prev > 0.0) {
      EXPECT_GE(prev / gap, 1.8);
      EXPECT_LE(prev / gap, 2.2);
    }
    prev = gap;
  }
}

TEST(FiniteDifference, ExactOnQuadratics) {
  Matrix s(6, 1);
  for (int k = 0; k < 6; ++k) s(k, 0) = 3.0 + 2.0 * (0.1 * k) + 5.0 * (0.1 * k) * (0.1 * k);
  const Matrix d = finite_difference_derivatives(s, 0.1, DerivativeScheme::kCentral2);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(d(k, 0), 2.0 + 10.0 * 0.1 * k, 1e-12);
  Matrix q(8, 1);
  for (int k = 0; k < 8; ++k) q(k, 0) = std::pow(0.1 * k, 4);
  const Matrix d4 = finite_difference_derivatives(q, 0.1, DerivativeScheme::kCentral4);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(d4(k, 0), 4 * std::pow(0.1 * k, 3), 1e-11);
  EXPECT_THROW(finite_difference_derivatives(Matrix::Zero(2, 1), 0.1, DerivativeScheme::kCentral2),
               InvalidArgument);
}

TEST(Stlsq, LinearDecayExactDerivatives) {
  auto dict = std::make_shared<const Dictionary>(Dictionary::monomial_total_degree(1, 2));
  const Matrix x = column({-0.9, -0.4, 0.1, 0.3, 0.8});
  const IdentifiedSystem sys = sindy_stlsq(x, -x, dict, StlsqOptions{});
  EXPECT_NEAR(sys.theta(0, 0), 0.0, 0.0);
  EXPECT_NEAR(sys.theta(0, 1), -1.0, 1e-12);
  EXPECT_EQ(sys.theta(0, 2), 0.0);
  EXPECT_EQ(sys.method, Method::kSindy);
}

TEST(Stlsq, CubicSupport) {
  auto dict = std::make_shared<const Dictionary>(Dictionary::monomial_total_degree(1, 4));
  Matrix x(21, 1);
  for (int k = 0; k <= 20; ++k) x(k, 0) = -1.0 + 0.1 * k;
  const Matrix dx = -x.array().cube().matrix();
  const IdentifiedSystem sys = sindy_stlsq(x, dx, dict, StlsqOptions{});
  for (int i = 0; i < 5; ++i) {
    if (i == 3) {
      EXPECT_NEAR(sys.theta(0, i), -1.0, 1e-12);
    } else {
      EXPECT_EQ(sys.theta(0, i), 0.0);
    }
  }
}

TEST(Stlsq, ZeroThresholdIsLeastSquaresAndIdempotent) {
  const Matrix f = testing::random_matrix(30, 5, 1);
  const Matrix y = testing::random_matrix(30, 2, 2);
  StlsqOptions opts;
  opts.threshold = 0.0;
  EXPECT_LT((stlsq(f, y, opts) - linalg::lstsq(f, y)).cwiseAbs().maxCoeff(), 1e-13);

  opts.threshold = 0.15;
  const Matrix c = stlsq(f, y, opts);
  // Refit restricted to the surviving support reproduces the same result.
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if (c(i, j) != 0.0) keep.push_back(i);
    }
    Matrix sub(f.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = f.col(keep[k]);
    const Matrix again = stlsq(sub, y.col(j), opts);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      EXPECT_NEAR(again(static_cast<Eigen::Index>(k), 0), c(keep[k], j), 1e-12);
    }
  }
}

TEST(Stlsq, EmptySupportEverywhereIsDegenerate) {
  const Matrix f = testing::random_matrix(10, 3, 4);
  StlsqOptions opts;
  opts.threshold = 1e6;
  EXPECT_THROW(stlsq(f, testing::random_matrix(10, 2, 5), opts), DegenerateData);
}

TEST(Sindy, FromDatasetOnVanDerPol) {
  const SystemSpec vdp = builtin_system("vdp");
  DatasetOptions opts;
  opts.gl = false;
  const SnapshotDataset d =
      generate_dataset(vdp, sample_initial_conditions(vdp.domain, 50, 2), 1.0, 100, opts);
  auto dict = std::make_shared<const Dictionary>(Dictionary::monomial_per_axis({3, 3}));
  const IdentifiedSystem sys = sindy_from_dataset(d, dict, StlsqOptions{});
  EXPECT_NEAR(sys.theta(0, 3), -1.0, 1e-3);
  EXPECT_NEAR(sys.theta(1, 1), 1.0, 1e-3);
  EXPECT_NEAR(sys.theta(1, 5), 1.0, 1e-2);
}

}  // namespace
}  // namespace koopgen
