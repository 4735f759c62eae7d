#include "koopgen/sysid.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "koopgen/baselines.hpp"
#include "koopgen/error.hpp"
#include "koopgen/linalg.hpp"

namespace koopgen {

Vector IdentifiedSystem::evaluate(const Vector& x) const {
  return theta * dictionary->evaluate(x);
}

VectorField IdentifiedSystem::field() const {
  if (!dictionary) throw InvalidArgument("identified system has no dictionary");
  return [theta = theta, dict = dictionary](std::span<const double> x, std::span<double> out) {
    thread_local Vector z;
    z.resize(dict->size());
    dict->evaluate(x, std::span<double>(z.data(), static_cast<std::size_t>(z.size())));
    Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size())) = theta * z;
  };
}

IdentifiedSystem recover_field(const LearnedGenerator& gen) {
  if (!gen.dictionary) throw InvalidArgument("recover_field: generator has no dictionary");
  const Dictionary& dict = *gen.dictionary;
  if (gen.L.rows() != dict.size() || gen.L.cols() != dict.size()) {
    throw ShapeMismatch("recover_field: L does not match the dictionary size");
  }
  IdentifiedSystem sys;
  sys.dictionary = gen.dictionary;
  sys.method = gen.method;
  sys.theta.resize(dict.dim(), dict.size());
  for (int j = 0; j < dict.dim(); ++j) {
    sys.theta.row(j) = gen.L.col(dict.coordinate_index(j)).transpose();
  }
  return sys;
}

IntegratorOptions prediction_integrator_options() {
  IntegratorOptions o;
  o.blowup_norm = 1e6;
  o.throw_on_stiff = false;
  o.max_steps = 500'000;
  return o;
}

Trajectory predict_flow(const IdentifiedSystem& sys, const Vector& x0, double T_s,
                        int snapshot_count, const IntegratorOptions& opts) {
  if (x0.size() != sys.dim()) throw ShapeMismatch("predict_flow: x0 has wrong dimension");
  if (!(T_s > 0.0) || snapshot_count < 1) {
    throw InvalidArgument("predict_flow: need T_s > 0 and Gamma_s >= 1");
  }
  std::vector<double> times;
  for (int k = 0; k <= snapshot_count; ++k) times.push_back(T_s * k / snapshot_count);
  times.back() = T_s;
  OdeSolution sol = integrate_dopri5(
      sys.field(), std::span<const double>(x0.data(), static_cast<std::size_t>(x0.size())), times,
      opts);
  Trajectory tr;
  tr.initial = x0;
  tr.times = std::move(sol.times);
  tr.states = std::move(sol.states);
  tr.status = sol.status;
  return tr;
}

namespace {

void check_pair(const Trajectory& a, const Trajectory& b) {
  if (a.states.rows() != b.states.rows() || a.states.cols() != b.states.cols()) {
    throw ShapeMismatch("rmse_flow: trajectory shapes differ");
  }
  if (a.states.rows() < 2) throw InvalidArgument("rmse_flow: need at least one step after t=0");
}

double trajectory_rms(const Trajectory& a, const Trajectory& b) {
  const Eigen::Index n = a.states.rows() - 1;
  const double ss = (a.states.bottomRows(n) - b.states.bottomRows(n)).squaredNorm();
  return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace

double rmse_flow(const std::vector<Trajectory>& truth, const std::vector<Trajectory>& predicted) {
  if (truth.size() != predicted.size()) throw ShapeMismatch("rmse_flow: trajectory counts differ");
  if (truth.empty()) throw InvalidArgument("rmse_flow: no trajectories");
  double s = 0.0;
  for (std::size_t m = 0; m < truth.size(); ++m) {
    check_pair(truth[m], predicted[m]);
    s += trajectory_rms(truth[m], predicted[m]);
  }
  return s / static_cast<double>(truth.size());
}

FlowMetrics evaluate_flow(const std::vector<Trajectory>& truth,
                          const std::vector<Trajectory>& predicted) {
  if (truth.size() != predicted.size()) throw ShapeMismatch("evaluate_flow: trajectory counts differ");
  if (truth.empty()) throw InvalidArgument("evaluate_flow: no trajectories");
  FlowMetrics fm;
  fm.snapshot_count = static_cast<int>(truth.front().states.rows()) - 1;
  fm.horizon = truth.front().times.empty() ? 0.0 : truth.front().times.back();
  double s = 0.0;
  int survivors = 0;
  for (std::size_t m = 0; m < truth.size(); ++m) {
    check_pair(truth[m], predicted[m]);
    const bool failed = predicted[m].status != TrajectoryStatus::kOk || !predicted[m].states.allFinite();
    if (failed) {
      ++fm.blowups;
      fm.per_trajectory.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double r = trajectory_rms(truth[m], predicted[m]);
    fm.per_trajectory.push_back(r);
    s += r;
    ++survivors;
  }
  fm.rmse_flow = survivors ? s / survivors : std::numeric_limits<double>::infinity();
  return fm;
}

double rmse_weights(const Matrix& theta_hat, const Matrix& theta_true) {
  if (theta_hat.rows() != theta_true.rows() || theta_hat.cols() != theta_true.cols()) {
    throw ShapeMismatch("rmse_weights: shapes differ");
  }
  if (theta_hat.size() == 0) throw InvalidArgument("rmse_weights: empty weights");
  return std::sqrt((theta_hat - theta_true).squaredNorm() / static_cast<double>(theta_hat.size()));
}

Matrix true_weights(const SystemSpec& spec, const Dictionary& dict) {
  if (!spec.is_polynomial()) {
    throw InvalidArgument("true_weights: system '" + spec.name + "' is not polynomial");
  }
  if (dict.kind() != DictionaryKind::kMonomial || dict.dim() != spec.dim) {
    throw InvalidArgument("true_weights: need a monomial dictionary of matching dimension");
  }
  Matrix w = Matrix::Zero(spec.dim, dict.size());
  for (const PolynomialTerm& t : spec.polynomial_terms) {
    const auto& ex = dict.exponents();
    const auto it = std::find(ex.begin(), ex.end(), t.exponents);
    if (it == ex.end()) {
      std::string name;
      for (std::size_t a = 0; a < t.exponents.size(); ++a) name += std::to_string(t.exponents[a]);
      throw InvalidArgument("true_weights: term with exponents " + name + " of " + spec.name +
                            " is not in dictionary " + dict.label());
    }
    w(t.axis, it - ex.begin()) += t.coefficient;
  }
  return w;
}

IdentifiedSystem srtm_sparsify(const LearnedGenerator& gen, const SnapshotDataset& validation,
                               double threshold, int max_iters) {
  if (threshold < 0.0 || max_iters < 0) throw InvalidArgument("srtm: bad threshold or iterations");
  IdentifiedSystem sys = recover_field(gen);
  sys.method = Method::kSrtm;
  const Dictionary& dict = *gen.dictionary;
  if (validation.dim != dict.dim()) throw ShapeMismatch("srtm: validation dimension differs");

  // Every validation snapshot state.
  std::vector<const Matrix*> blocks;
  Eigen::Index rows = validation.initial.rows();
  for (const auto& s : validation.uniform_states) {
    blocks.push_back(&s);
    rows += s.rows() - 1;
  }
  if (blocks.empty()) {
    for (const auto& s : validation.gl_states) {
      blocks.push_back(&s);
      rows += s.rows();
    }
  }
  Matrix states(rows, dict.dim());
  Eigen::Index r = 0;
  states.topRows(validation.initial.rows()) = validation.initial;
  r += validation.initial.rows();
  for (const Matrix* b : blocks) {
    const Eigen::Index skip = validation.has_uniform() ? 1 : 0;
    states.middleRows(r, b->rows() - skip) = b->bottomRows(b->rows() - skip);
    r += b->rows() - skip;
  }
  if (states.rows() == 0) throw DegenerateData("srtm: empty validation set");
  const Matrix Z = dict.evaluate_batch(states);
  // Targets: the learned generator applied to x_j at the validation states.
  const Matrix Y = Z * sys.theta.transpose();

  const Eigen::Index N = dict.size();
  bool any = false;
  for (int j = 0; j < sys.dim(); ++j) {
    Vector c = sys.theta.row(j).transpose();
    std::vector<char> active(static_cast<std::size_t>(N), 1);
    for (int iter = 0; iter < max_iters; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (active[static_cast<std::size_t>(i)] && std::abs(c(i)) < threshold) {
          active[static_cast<std::size_t>(i)] = 0;
          changed = true;
        }
      }
      if (!changed) break;
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (active[static_cast<std::size_t>(i)]) idx.push_back(i);
      }
      c.setZero();
      if (idx.empty()) break;
      Matrix sub(Z.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = Z.col(idx[k]);
      const Vector s = linalg::lstsq(sub, Y.col(j));
      for (std::size_t k = 0; k < idx.size(); ++k) c(idx[k]) = s(static_cast<Eigen::Index>(k));
    }
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!active[static_cast<std::size_t>(i)]) c(i) = 0.0;
    }
    sys.theta.row(j) = c.transpose();
    if ((c.array() != 0.0).any()) any = true;
  }
  if (!any) throw DegenerateData("srtm: every weight fell below the threshold");
  return sys;
}

namespace {

// Size of the rounding error in evaluating theta * z(x); below this the
// residual carries no information.
double evaluation_floor(const IdentifiedSystem& sys, const Vector& x) {
  const Vector z = sys.dictionary->evaluate(x);
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (sys.theta.cwiseAbs() * z.cwiseAbs()).norm();
}

}  // namespace

Vector find_equilibrium(const IdentifiedSystem& sys, const Vector& start, const NewtonOptions& opts) {
  if (start.size() != sys.dim()) throw ShapeMismatch("find_equilibrium: start has wrong dimension");
  const int d = sys.dim();
  Vector x = start;
  Vector f = sys.evaluate(x);
  auto converged = [&] {
    return f.allFinite() && f.norm() <= std::max(opts.tol, evaluation_floor(sys, x));
  };
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (!f.allFinite()) break;
    if (converged()) return x;
    Matrix J(d, d);
    for (int a = 0; a < d; ++a) {
      const double h = opts.fd_step * std::max(1.0, std::abs(x(a)));
      Vector xp = x, xm = x;
      xp(a) += h;
      xm(a) -= h;
      J.col(a) = (sys.evaluate(xp) - sys.evaluate(xm)) / (2 * h);
    }
    const Vector step = linalg::lstsq(J, -f);
    if (step.norm() == 0.0) break;
    // Backtrack until the residual decreases.
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      const Vector xn = x + t * step;
      const Vector fn = sys.evaluate(xn);
      if (fn.allFinite() && fn.norm() < f.norm()) {
        x = xn;
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (converged()) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", f.norm());
  throw NumericalFailure(std::string("equilibrium not found: damped Newton stalled at |f| = ") + buf);
}

}  // namespace koopgen
