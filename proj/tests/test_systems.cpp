#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "koopgen/error.hpp"
#include "koopgen/ode.hpp"
#include "koopgen/random.hpp"
#include "koopgen/systems.hpp"

namespace koopgen {
namespace {

std::vector<double> eval(const SystemSpec& s, std::vector<double> x) {
  std::vector<double> out(x.size());
  s.evaluate(x, out);
  return out;
}

TEST(Rng, DeterministicAndOpenInterval) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform01();
    EXPECT_EQ(u, b.uniform01());
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Rng, NormalMoments) {
  Rng r(5);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Builtin, VanDerPolValues) {
  const SystemSpec vdp = builtin_system("vdp");
  EXPECT_EQ(eval(vdp, {0.0, 0.0}), (std::vector<double>{0.0, 0.0}));
  const auto f = eval(vdp, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(f[0], -1.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
  EXPECT_EQ(vdp.lipschitz_estimate.value(), 4.0);
}

TEST(Builtin, CubicValue) {
  EXPECT_DOUBLE_EQ(eval(builtin_system("cubic1d"), {0.5})[0], -0.125);
}

TEST(Builtin, LorenzDefaultsAndParams) {
  const SystemSpec l = builtin_system("lorenz63_scaled");
  EXPECT_DOUBLE_EQ(l.params.at("sigma"), 10.0);
  EXPECT_DOUBLE_EQ(l.params.at("gamma"), 0.28);
  EXPECT_DOUBLE_EQ(l.params.at("beta"), 8.0 / 3.0);
  EXPECT_DOUBLE_EQ(l.params.at("eps"), 0.1);
  const auto f = eval(l, {1.0, 0.5, 0.25});
  EXPECT_DOUBLE_EQ(f[0], 10.0 * (0.5 - 0.1));
  EXPECT_DOUBLE_EQ(f[1], 1.0 * (0.28 - 0.25) - 0.05);
  EXPECT_DOUBLE_EQ(f[2], 0.5 - 0.1 * (8.0 / 3.0) * 0.25);
}

TEST(Builtin, Lorenz96Cyclic) {
  const SystemSpec l = builtin_system("lorenz96");
  EXPECT_EQ(l.dim, 6);
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const auto f = eval(l, x);
  // j = 0: -x4 x5 + x5 x1 - x0 + 0.1 (0-based, cyclic)
  EXPECT_DOUBLE_EQ(f[0], -5.0 * 6.0 + 6.0 * 2.0 - 1.0 + 0.1);
  EXPECT_DOUBLE_EQ(f[3], -2.0 * 3.0 + 3.0 * 5.0 - 4.0 + 0.1);
  EXPECT_THROW(builtin_system("lorenz96", {{"dim", 3.0}}), InvalidArgument);
}

TEST(Builtin, PolynomialTermsMatchField) {
  for (const std::string name : {"vdp", "lorenz63_scaled", "lorenz96", "cubic1d", "linear"}) {
    const SystemSpec s = builtin_system(name);
    ASSERT_FALSE(s.polynomial_terms.empty()) << name;
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
      Vector x(s.dim);
      for (int i = 0; i < s.dim; ++i) x(i) = rng.uniform(-1, 1);
      Vector poly = Vector::Zero(s.dim);
      for (const auto& t : s.polynomial_terms) {
        double m = t.coefficient;
        for (int k = 0; k < s.dim; ++k) m *= std::pow(x(k), t.exponents[static_cast<std::size_t>(k)]);
        poly(t.axis) += m;
      }
      EXPECT_LT((poly - s.evaluate(x)).cwiseAbs().maxCoeff(), 1e-14) << name;
    }
  }
}

TEST(Builtin, NonPolynomialSystemsEvaluateFinite) {
  for (const std::string name : {"yeast7", "rational2d", "two_machine"}) {
    const SystemSpec s = builtin_system(name);
    EXPECT_FALSE(s.is_polynomial());
    const Vector f = s.evaluate(s.domain.center());
    EXPECT_TRUE(f.allFinite()) << name;
  }
  const auto tm = eval(builtin_system("two_machine"), {0.0, 0.0});
  EXPECT_NEAR(tm[1], 0.0, 1e-15);
}

TEST(Builtin, Yeast7Values) {
  const SystemSpec y = builtin_system("yeast7");
  EXPECT_DOUBLE_EQ(y.params.at("k1"), 100.0);
  EXPECT_DOUBLE_EQ(y.params.at("K1"), 0.52);
  const std::vector<double> x(7, 0.25);
  const auto f = eval(y, x);
  const double v1 = 100.0 * 0.25 * 0.25 / (1.0 + std::pow(0.25 / 0.52, 4.0));
  EXPECT_NEAR(f[0], 0.5 * (0.5 - 0.25) - v1, 1e-12);
  EXPECT_NEAR(f[6], 0.1 * 13.0 * 0.0 - 1.8 * 0.25, 1e-12);
}

TEST(Builtin, UnknownNameAndParam) {
  EXPECT_THROW(builtin_system("duffing"), InvalidArgument);
  EXPECT_THROW(builtin_system("vdp", {{"mu", 1.0}}), InvalidArgument);
  EXPECT_EQ(builtin_system_names().size(), 8u);
}

TEST(Integrate, LinearDecayMatchesExponential) {
  const SystemSpec s = builtin_system("linear");
  std::vector<double> times;
  for (int k = 0; k <= 50; ++k) times.push_back(0.1 * k);
  const double x0 = 1.0;
  const Trajectory tr = integrate(s, std::span<const double>(&x0, 1), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double exact = std::exp(-times[k]);
    EXPECT_NEAR(tr.states(static_cast<Eigen::Index>(k), 0), exact, 1e-9 * exact);
  }
  EXPECT_NEAR(tr.states(10, 0), 0.367879441, 1e-9);
}

TEST(Integrate, ZeroTimeReturnsInitial) {
  const SystemSpec s = builtin_system("vdp");
  const std::vector<double> x0{0.3, -0.2};
  const std::vector<double> t{0.0};
  const Trajectory tr = integrate(s, x0, t);
  EXPECT_EQ(tr.states(0, 0), 0.3);
  EXPECT_EQ(tr.states(0, 1), -0.2);
}

TEST(Integrate, CubicClosedForm) {
  const SystemSpec s = builtin_system("cubic1d");
  const double x0 = 1.0;
  const std::vector<double> t{1.0};
  const Trajectory tr = integrate(s, std::span<const double>(&x0, 1), t);
  EXPECT_NEAR(tr.states(0, 0), 1.0 / std::sqrt(3.0), 1e-8);
}

TEST(Integrate, SemigroupProperty) {
  const SystemSpec s = builtin_system("vdp");
  const std::vector<double> x0{0.4, 0.3};
  const std::vector<double> t1{0.7}, t2{0.5}, t12{1.2};
  const Trajectory a = integrate(s, x0, t1);
  const std::vector<double> mid{a.states(0, 0), a.states(0, 1)};
  const Trajectory b = integrate(s, mid, t2);
  const Trajectory c = integrate(s, x0, t12);
  EXPECT_NEAR(b.states(0, 0), c.states(0, 0), 1e-8);
  EXPECT_NEAR(b.states(0, 1), c.states(0, 1), 1e-8);
}

TEST(Integrate, Deterministic) {
  const SystemSpec s = builtin_system("lorenz63_scaled");
  const std::vector<double> x0{0.1, -0.3, 0.2};
  std::vector<double> t;
  for (int k = 0; k <= 20; ++k) t.push_back(0.5 * k);
  const Trajectory a = integrate(s, x0, t);
  const Trajectory b = integrate(s, x0, t);
  EXPECT_TRUE((a.states.array() == b.states.array()).all());
}

TEST(Integrate, DomainExitWarningWithoutRecast) {
  SystemSpec s = builtin_system("linear", {{"a", 1.0}});
  const double x0 = 0.9;
  const std::vector<double> t{0.0, 1.0};
  const Trajectory tr = integrate(s, std::span<const double>(&x0, 1), t);
  EXPECT_TRUE(tr.domain_exit);
  EXPECT_FALSE(tr.warnings.empty());
}

TEST(Integrate, WrongDimensionThrows) {
  const SystemSpec s = builtin_system("vdp");
  const std::vector<double> x0{0.1};
  const std::vector<double> t{1.0};
  EXPECT_THROW(integrate(s, x0, t), ShapeMismatch);
}

TEST(Integrate, BlowupReportedThroughStatus) {
  // x' = x^2 from x0 = 1 blows up at t = 1.
  SystemSpec s;
  s.name = "riccati";
  s.dim = 1;
  s.field = [](std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
  s.domain = Box::cube(1, -10, 10);
  IntegratorOptions opts;
  opts.blowup_norm = 1e6;
  opts.throw_on_stiff = false;
  const double x0 = 1.0;
  const std::vector<double> t{0.5, 2.0};
  const Trajectory tr = integrate(s, std::span<const double>(&x0, 1), t, opts);
  EXPECT_NEAR(tr.states(0, 0), 2.0, 1e-8);
  EXPECT_NE(tr.status, TrajectoryStatus::kOk);
  EXPECT_TRUE(std::isnan(tr.states(1, 0)));
}

TEST(Sampling, DeterministicInsideAndCentred) {
  const Box box = Box::cube(2, -1, 1);
  const Matrix a = sample_initial_conditions(box, 10000, 9);
  const Matrix b = sample_initial_conditions(box, 10000, 9);
  EXPECT_TRUE((a.array() == b.array()).all());
  EXPECT_LT(std::abs(a.col(0).mean()), 0.05);
  EXPECT_LT(std::abs(a.col(1).mean()), 0.05);
  const Matrix c = sample_initial_conditions(Box::cube(3, -1, 1), 100, 1);
  EXPECT_LT(c.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Recast, CutoffProfile) {
  const Box box = Box::cube(2, -1, 1);
  const std::vector<double> centre{0.0, 0.0}, edge{1.0, 0.3}, mid{0.975, 0.0};
  EXPECT_EQ(recast_cutoff(box, centre), 1.0);
  EXPECT_EQ(recast_cutoff(box, edge), 0.0);
  EXPECT_NEAR(recast_cutoff(box, mid), 0.5, 1e-12);
  const SystemSpec r = recast_field(builtin_system("vdp"));
  const auto f = eval(r, {1.0, 0.5});
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(eval(r, {0.2, 0.1}), eval(builtin_system("vdp"), {0.2, 0.1}));
}

TEST(Recast, TrajectoriesStayInClosure) {
  const SystemSpec r = recast_field(builtin_system("linear", {{"a", 2.0}, {"dim", 2.0}}));
  const Matrix x0s = sample_initial_conditions(r.domain, 20, 4);
  std::vector<double> t;
  for (int k = 0; k <= 40; ++k) t.push_back(0.25 * k);
  for (Eigen::Index m = 0; m < x0s.rows(); ++m) {
    const std::vector<double> x0{x0s(m, 0), x0s(m, 1)};
    const Trajectory tr = integrate(r, x0, t);
    EXPECT_FALSE(tr.domain_exit);
    EXPECT_LE(tr.states.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(TrajectoryCsv, RoundTrip) {
  const SystemSpec s = builtin_system("vdp");
  const std::vector<double> x0{0.2, 0.1};
  const std::vector<double> t{0.0, 0.1, 0.2};
  const Trajectory tr = integrate(s, x0, t);
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  EXPECT_EQ(ss.str().substr(0, 8), "t,x1,x2\n");
  const Trajectory back = read_trajectory_csv(ss);
  EXPECT_EQ(back.times, tr.times);
  EXPECT_TRUE((back.states.array() == tr.states.array()).all());
}

TEST(TrajectoryCsv, BadInputReportsLine) {
  std::stringstream ss("t,x1\n0,1\n0.1,abc\n");
  try {
    read_trajectory_csv(ss);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

}  // namespace
}  // namespace koopgen
