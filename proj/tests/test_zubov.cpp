#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "koopgen/error.hpp"
#include "koopgen/rtm.hpp"
#include "koopgen/systems.hpp"
#include "koopgen/zubov.hpp"

namespace koopgen {
namespace {

constexpr double kAlpha = 0.1;

double u_exact(double x) { return 1.0 - std::exp(-kAlpha * x * x / 2.0); }

// RTM generator of f(x) = -x on tanh features, from exact-flow data.
LearnedGenerator oracle_generator() {
  static const LearnedGenerator g = [] {
    const SystemSpec s = builtin_system("linear");
    const Matrix x0 = sample_initial_conditions(s.domain, 200, 21);
    RtmConfig c;
    c.mu = 2.5;
    c.T = 1.0;
    c.gamma_count = 20;
    auto dict = std::make_shared<const Dictionary>(Dictionary::tanh_random(1, 30, 7, 2.0, 1.0));
    return learn(generate_dataset(s, x0, 1.0, 20), dict, c);
  }();
  return g;
}

ZubovProblem oracle_problem() {
  ZubovProblem p;
  p.alpha = kAlpha;
  p.equilibrium = Vector::Zero(1);
  p.collocation = lattice_collocation(Box::cube(1, -1, 1), {401}, p.equilibrium, 0.0);
  p.weights.boundary = 0.0;
  return p;
}

TEST(Zubov, OneDimensionalOracle) {
  const LearnedGenerator g = oracle_generator();
  const ZubovSolution sol = zubov_solve(g, oracle_problem());
  EXPECT_LE(sol.residual_rms, 1e-3);
  EXPECT_LE(std::abs(sol.u_at_equilibrium), 1e-6);
  Matrix probe(1, 1);
  probe << 0.5;
  EXPECT_NEAR(zubov_values(*g.dictionary, sol.theta, probe)(0), 0.0124222, 1e-3);
  double sup = 0.0;
  Matrix pts(181, 1);
  for (int k = 0; k <= 180; ++k) pts(k, 0) = -0.9 + 0.01 * k;
  const Vector u = zubov_values(*g.dictionary, sol.theta, pts);
  for (int k = 0; k <= 180; ++k) sup = std::max(sup, std::abs(u(k) - u_exact(pts(k, 0))));
  EXPECT_LE(sup, 1e-3);
}

TEST(Zubov, RoaCoversLatticeAndRespectsLevel) {
  const LearnedGenerator g = oracle_generator();
  const ZubovProblem p = oracle_problem();
  const ZubovSolution sol = zubov_solve(g, p);
  const Lattice lat{Box::cube(1, -1, 1), {201}};
  const RoaMask mask = roa_extract(sol, *g.dictionary, lat, p.equilibrium, 0.05);
  EXPECT_GE(mask.fraction(), 0.95);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (mask.inside[i]) {
      EXPECT_GE(mask.u(static_cast<Eigen::Index>(i)), -1e-3);
      EXPECT_LE(mask.u(static_cast<Eigen::Index>(i)), 0.95);
    }
  }
  const RoaMask tight = roa_extract(sol, *g.dictionary, lat, p.equilibrium, 0.9999);
  EXPECT_LT(tight.count(), mask.count());
  EXPECT_GE(tight.count(), 1u);
}

TEST(Zubov, LieDerivativeSigns) {
  const LearnedGenerator g = oracle_generator();
  const ZubovSolution sol = zubov_solve(g, oracle_problem());
  EXPECT_EQ(lie_derivative_check(g, Vector::Zero(g.L.rows()), Matrix::Constant(3, 1, 0.4)), 0.0);
  EXPECT_NEAR(lie_derivative_check(g, sol.theta, Matrix::Zero(1, 1)), 0.0, 1e-4);
  Matrix away(4, 1);
  away << -0.8, -0.3, 0.3, 0.8;
  EXPECT_LT(lie_derivative_check(g, sol.theta, away), 0.0);
}

TEST(Zubov, EquilibriumAnchoring) {
  const LearnedGenerator g = oracle_generator();
  ZubovProblem p = oracle_problem();
  p.weights.equilibrium = 1e6;
  EXPECT_LE(std::abs(zubov_solve(g, p).u_at_equilibrium), 1e-6);
}

TEST(Zubov, Preconditions) {
  const LearnedGenerator g = oracle_generator();
  ZubovProblem p = oracle_problem();
  p.alpha = 0.0;
  EXPECT_THROW(zubov_solve(g, p), InvalidArgument);
  p = oracle_problem();
  p.weights = {0.0, 0.0, 0.0};
  EXPECT_THROW(zubov_solve(g, p), InvalidArgument);
  p = oracle_problem();
  p.equilibrium = Vector::Constant(1, 3.0);
  EXPECT_NO_THROW(p.validate(1));
  p.equilibrium = Vector::Zero(2);
  EXPECT_THROW(p.validate(1), ShapeMismatch);
}

TEST(Roa, EmptyWhenEquilibriumOutsideSublevel) {
  const Dictionary dict = Dictionary::monomial_total_degree(1, 1);
  ZubovSolution sol;
  sol.theta = Vector::Zero(2);
  sol.theta(0) = 2.0;  // u = 2 everywhere
  const Lattice lat{Box::cube(1, -1, 1), {11}};
  EXPECT_THROW(roa_extract(sol, dict, lat, Vector::Zero(1), 0.05), EmptyRegion);
  EXPECT_THROW(roa_extract(sol, dict, lat, Vector::Zero(1), 1.0), InvalidArgument);
}

TEST(Roa, ConnectedComponentOnly) {
  // u = x^2 - 0.5 x^4 style bowl with an outer dip: u = 4 x^2 (1 - x^2)... use
  // u(x) = 4x^2 - 4x^4, which returns below the level near |x| = 1.
  const Dictionary dict = Dictionary::monomial_total_degree(1, 4);
  ZubovSolution sol;
  sol.theta = Vector::Zero(5);
  sol.theta(2) = 4.0;
  sol.theta(4) = -4.0;
  const Lattice lat{Box::cube(1, -1, 1), {201}};
  const RoaMask mask = roa_extract(sol, dict, lat, Vector::Zero(1), 0.5);
  // u <= 0.5 near 0 (|x| < 0.383) and again near |x| = 1 (|x| > 0.924).
  EXPECT_FALSE(mask.inside[0]);
  EXPECT_TRUE(mask.inside[100]);
  EXPECT_NEAR(static_cast<double>(mask.count()), 77.0, 2.0);
}

TEST(Lattice, PointsAndCollocation) {
  const Lattice lat{Box::cube(2, -1, 1), {3, 5}};
  EXPECT_EQ(lat.size(), 15u);
  EXPECT_EQ(lat.unravel(4), (std::vector<int>{1, 1}));
  EXPECT_DOUBLE_EQ(lat.point(4)(0), 0.0);
  EXPECT_DOUBLE_EQ(lat.point(4)(1), -0.5);
  const Matrix c = lattice_collocation(Box::cube(2, -1, 1), {5, 5}, Vector::Zero(2), 0.1);
  EXPECT_EQ(c.rows(), 24);
  const Matrix b = box_boundary_points(Box::cube(2, -1, 1), 5);
  EXPECT_EQ(b.rows(), 16);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    EXPECT_DOUBLE_EQ(b.row(i).cwiseAbs().maxCoeff(), 1.0);
  }
}

}  // namespace
}  // namespace koopgen
