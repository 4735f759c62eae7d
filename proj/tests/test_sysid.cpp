#include <cmath>
#include <memory>
#include <numeric>

#include <gtest/gtest.h>

#include "koopgen/error.hpp"
#include "koopgen/rtm.hpp"
#include "koopgen/systems.hpp"
#include "koopgen/sysid.hpp"
#include "test_support.hpp"

namespace koopgen {
namespace {

std::shared_ptr<const Dictionary> share(Dictionary d) {
  return std::make_shared<const Dictionary>(std::move(d));
}

LearnedGenerator diag_generator() {
  LearnedGenerator g;
  g.dictionary = share(Dictionary::monomial_total_degree(1, 2));
  g.L = Matrix::Zero(3, 3);
  g.L.diagonal() << 0.0, -1.0, -2.0;
  return g;
}

Trajectory const_traj(int n, double value, int dim = 1) {
  Trajectory t;
  t.states = Matrix::Constant(n, dim, value);
  for (int k = 0; k < n; ++k) t.times.push_back(k);
  return t;
}

TEST(Recover, ColumnExtraction) {
  const IdentifiedSystem s = recover_field(diag_generator());
  ASSERT_EQ(s.theta.rows(), 1);
  EXPECT_EQ(s.theta(0, 0), 0.0);
  EXPECT_EQ(s.theta(0, 1), -1.0);
  EXPECT_EQ(s.theta(0, 2), 0.0);
}

TEST(Recover, MissingCoordinate) {
  LearnedGenerator g;
  g.dictionary = share(Dictionary::tanh_random(1, 3, 1, 1.0, 1.0, false));
  g.L = Matrix::Zero(3, 3);
  EXPECT_THROW(recover_field(g), MissingCoordinate);
}

TEST(TrueWeights, VanDerPolFixture) {
  const Matrix w = true_weights(builtin_system("vdp"), Dictionary::monomial_per_axis({3, 3}));
  Matrix want = Matrix::Zero(2, 9);
  want(0, 3) = -1.0;
  want(1, 1) = 1.0;
  want(1, 3) = -1.0;
  want(1, 5) = 1.0;
  EXPECT_EQ(w, want);
  EXPECT_THROW(true_weights(builtin_system("vdp"), Dictionary::monomial_per_axis({2, 2})),
               InvalidArgument);
  EXPECT_THROW(true_weights(builtin_system("rational2d"), Dictionary::monomial_per_axis({3, 3})),
               InvalidArgument);
}

TEST(TrueWeights, LorenzFamilies) {
  const Matrix w63 =
      true_weights(builtin_system("lorenz63_scaled"), Dictionary::monomial_per_axis({2, 2, 2}));
  EXPECT_DOUBLE_EQ(w63(0, 2), 10.0);
  EXPECT_DOUBLE_EQ(w63(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(w63(1, 5), -1.0);
  EXPECT_DOUBLE_EQ(w63(2, 3), 1.0);
  const Matrix w96 = true_weights(builtin_system("lorenz96"),
                                  Dictionary::monomial_per_axis(std::vector<int>(6, 2)));
  EXPECT_EQ(w96.rows(), 6);
  EXPECT_EQ(w96.cols(), 64);
  EXPECT_DOUBLE_EQ(w96(0, 0), 0.1);
}

TEST(Predict, ZeroFieldAndLinearDecay) {
  IdentifiedSystem zero;
  zero.dictionary = share(Dictionary::monomial_total_degree(1, 2));
  zero.theta = Matrix::Zero(1, 3);
  Vector x0(1);
  x0 << 0.7;
  const Trajectory flat = predict_flow(zero, x0, 2.0, 4);
  EXPECT_EQ(flat.states.rows(), 5);
  EXPECT_EQ(flat.states.col(0).maxCoeff(), 0.7);
  EXPECT_EQ(flat.states.col(0).minCoeff(), 0.7);

  const IdentifiedSystem decay = recover_field(diag_generator());
  x0 << 1.0;
  const Trajectory tr = predict_flow(decay, x0, 1.0, 10);
  EXPECT_NEAR(tr.states(10, 0), std::exp(-1.0), 1e-8);
}

TEST(Predict, OracleInjectionMatchesTruth) {
  const SystemSpec vdp = builtin_system("vdp");
  const auto dict = share(Dictionary::monomial_per_axis({3, 3}));
  IdentifiedSystem s{true_weights(vdp, *dict), dict, Method::kRtm};
  Vector x0(2);
  x0 << 0.4, -0.3;
  const Trajectory pred = predict_flow(s, x0, 1.0, 10);
  std::vector<double> t;
  for (int k = 0; k <= 10; ++k) t.push_back(0.1 * k);
  const Trajectory truth = integrate(vdp, std::span<const double>(x0.data(), 2), t);
  EXPECT_LT((pred.states - truth.states).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Predict, DivergenceIsFlagged) {
  IdentifiedSystem s;
  s.dictionary = share(Dictionary::monomial_total_degree(1, 2));
  s.theta = Matrix::Zero(1, 3);
  s.theta(0, 2) = 5.0;  // x' = 5 x^2
  Vector x0(1);
  x0 << 0.9;
  const Trajectory tr = predict_flow(s, x0, 10.0, 10);
  EXPECT_NE(tr.status, TrajectoryStatus::kOk);
}

TEST(RmseFlow, Oracles) {
  const std::vector<Trajectory> a{const_traj(5, 1.0)};
  EXPECT_EQ(rmse_flow(a, a), 0.0);
  EXPECT_NEAR(rmse_flow(a, {const_traj(5, 1.3)}), 0.3, 1e-14);
  const std::vector<Trajectory> two{const_traj(5, 0.0), const_traj(5, 0.0)};
  EXPECT_NEAR(rmse_flow(two, {const_traj(5, 0.2), const_traj(5, 0.6)}), 0.4, 1e-14);
  EXPECT_EQ(rmse_flow(two, {const_traj(5, 0.2), const_traj(5, 0.6)}),
            rmse_flow({const_traj(5, 0.2), const_traj(5, 0.6)}, two));
  EXPECT_THROW(rmse_flow(a, {const_traj(4, 1.0)}), ShapeMismatch);
}

TEST(RmseFlow, InitialRowIsExcluded) {
  Trajectory p = const_traj(3, 0.0);
  p.states(0, 0) = 100.0;
  EXPECT_EQ(rmse_flow({const_traj(3, 0.0)}, {p}), 0.0);
}

TEST(EvaluateFlow, BlowupsExcludedAndCounted) {
  Trajectory bad = const_traj(4, 0.0);
  bad.status = TrajectoryStatus::kBlowup;
  const FlowMetrics fm =
      evaluate_flow({const_traj(4, 0.0), const_traj(4, 0.0)}, {const_traj(4, 0.5), bad});
  EXPECT_EQ(fm.blowups, 1);
  EXPECT_NEAR(fm.rmse_flow, 0.5, 1e-14);
  EXPECT_TRUE(std::isnan(fm.per_trajectory[1]));
}

TEST(RmseWeights, Oracles) {
  Matrix a = Matrix::Zero(1, 4), b = Matrix::Zero(1, 4);
  EXPECT_EQ(rmse_weights(a, b), 0.0);
  b(0, 2) = 0.2;
  EXPECT_NEAR(rmse_weights(a, b), 0.1, 1e-15);
  EXPECT_THROW(rmse_weights(a, Matrix::Zero(2, 4)), ShapeMismatch);
  const Matrix x = testing::random_matrix(2, 6, 1), y = testing::random_matrix(2, 6, 2);
  std::vector<int> perm{4, 2, 0, 5, 1, 3};
  Matrix xp(2, 6), yp(2, 6);
  for (int i = 0; i < 6; ++i) {
    xp.col(i) = x.col(perm[static_cast<std::size_t>(i)]);
    yp.col(i) = y.col(perm[static_cast<std::size_t>(i)]);
  }
  EXPECT_NEAR(rmse_weights(x, y), rmse_weights(xp, yp), 1e-15);
}

SnapshotDataset validation_data() {
  const SystemSpec s = builtin_system("linear");
  return generate_dataset(s, sample_initial_conditions(s.domain, 10, 6), 1.0, 10);
}

TEST(Srtm, ZeroThresholdMatchesRecover) {
  LearnedGenerator g = diag_generator();
  g.L(0, 1) = 0.03;
  const IdentifiedSystem s = srtm_sparsify(g, validation_data(), 0.0);
  EXPECT_LT((s.theta - recover_field(g).theta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(s.method, Method::kSrtm);
}

TEST(Srtm, DropsTinyWeights) {
  LearnedGenerator g = diag_generator();
  g.L(0, 1) = 1e-9;
  g.L(2, 1) = 3e-10;
  const IdentifiedSystem s = srtm_sparsify(g, validation_data(), 1e-3);
  EXPECT_EQ(s.theta(0, 0), 0.0);
  EXPECT_NEAR(s.theta(0, 1), -1.0, 1e-8);
  EXPECT_EQ(s.theta(0, 2), 0.0);
}

TEST(Srtm, EmptySupportThrows) {
  EXPECT_THROW(srtm_sparsify(diag_generator(), validation_data(), 10.0), DegenerateData);
}

TEST(ScaledSystem, GeneratorScalesWithEpsilon) {
  const double a = -1.0, eps = 0.5;
  RtmConfig c;
  c.T = 1.0;
  c.gamma_count = 20;
  auto dict = share(Dictionary::monomial_total_degree(1, 3));
  const SystemSpec s1 = builtin_system("linear", {{"a", a}});
  const SystemSpec s2 = builtin_system("linear", {{"a", eps * a}});
  const Matrix x0 = sample_initial_conditions(s1.domain, 30, 8);
  const Matrix l1 = learn(generate_dataset(s1, x0, 1.0, 20), dict, c).L;
  const Matrix l2 = learn(generate_dataset(s2, x0, 1.0, 20), dict, c).L;
  EXPECT_LT((l2 - eps * l1).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Equilibrium, NewtonFindsOrigin) {
  const SystemSpec vdp = builtin_system("vdp");
  const auto dict = share(Dictionary::monomial_per_axis({3, 3}));
  Matrix w = true_weights(vdp, *dict);
  w(0, 0) = 1e-3;  // shift the equilibrium off the origin
  const IdentifiedSystem s{w, dict, Method::kRtm};
  const Vector eq = find_equilibrium(s, Vector::Zero(2));
  EXPECT_LT(s.evaluate(eq).norm(), 1e-12);
  EXPECT_NEAR(eq(1), 1e-3, 1e-9);

  IdentifiedSystem none;
  none.dictionary = share(Dictionary::monomial_total_degree(1, 2));
  none.theta = Matrix::Zero(1, 3);
  none.theta(0, 0) = 1.0;
  none.theta(0, 2) = 1.0;  // x' = 1 + x^2 has no real root
  EXPECT_THROW(find_equilibrium(none, Vector::Zero(1)), NumericalFailure);
}

}  // namespace
}  // namespace koopgen
