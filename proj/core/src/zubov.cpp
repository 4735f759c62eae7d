#include "koopgen/zubov.hpp"

#include <cmath>
#include <deque>
#include <string>

#include "koopgen/error.hpp"
#include "koopgen/linalg.hpp"

namespace koopgen {

void ZubovProblem::validate(int dim) const {
  if (!(alpha > 0.0)) throw InvalidArgument("zubov: alpha must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("zubov: epsilon must lie in (0,1)");
  if (weights.residual < 0.0 || weights.equilibrium < 0.0 || weights.boundary < 0.0) {
    throw InvalidArgument("zubov: loss weights must be nonnegative");
  }
  if (weights.residual + weights.equilibrium + weights.boundary == 0.0) {
    throw InvalidArgument("zubov: loss weights are all zero");
  }
  if (equilibrium.size() != dim) throw ShapeMismatch("zubov: equilibrium has wrong dimension");
  if (collocation.rows() > 0 && collocation.cols() != dim) {
    throw ShapeMismatch("zubov: collocation points have wrong dimension");
  }
  if (boundary.rows() > 0 && boundary.cols() != dim) {
    throw ShapeMismatch("zubov: boundary points have wrong dimension");
  }
  if (collocation.rows() == 0 && weights.residual > 0.0) {
    throw InvalidArgument("zubov: no collocation points");
  }
}

Vector zubov_values(const Dictionary& dict, const Vector& theta, const Matrix& points) {
  if (theta.size() != dict.size()) throw ShapeMismatch("zubov: theta does not match dictionary");
  return dict.evaluate_batch(points) * theta;
}

ZubovSolution zubov_solve(const LearnedGenerator& gen, const ZubovProblem& prob) {
  if (!gen.dictionary) throw InvalidArgument("zubov: generator has no dictionary");
  const Dictionary& dict = *gen.dictionary;
  prob.validate(dict.dim());
  const Eigen::Index N = dict.size();
  if (gen.L.rows() != N || gen.L.cols() != N) throw ShapeMismatch("zubov: L does not match dictionary");

  const Matrix Zc = dict.evaluate_batch(prob.collocation);
  Vector r(prob.collocation.rows());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    r(i) = prob.alpha * (prob.collocation.row(i).transpose() - prob.equilibrium).squaredNorm();
  }
  // (Z L - r Z) theta = -r
  const Matrix Zres = Zc * gen.L - r.asDiagonal() * Zc;

  const Eigen::Index nc = prob.collocation.rows();
  const Eigen::Index nb = prob.weights.boundary > 0.0 ? prob.boundary.rows() : 0;
  Matrix lhs(nc + 1 + nb, N);
  Vector rhs(nc + 1 + nb);
  lhs.topRows(nc) = prob.weights.residual * Zres;
  rhs.head(nc) = -prob.weights.residual * r;
  const Vector zeq = dict.evaluate(prob.equilibrium);
  lhs.row(nc) = prob.weights.equilibrium * zeq.transpose();
  rhs(nc) = 0.0;
  if (nb > 0) {
    lhs.bottomRows(nb) = prob.weights.boundary * dict.evaluate_batch(prob.boundary);
    rhs.tail(nb).setConstant(prob.weights.boundary);
  }
  if (lhs.cwiseAbs().maxCoeff() == 0.0) throw DegenerateData("zubov: system matrix is zero");

  ZubovSolution sol;
  sol.theta = linalg::lstsq(lhs, rhs, prob.rcond);
  sol.level = 1.0 - prob.epsilon;
  sol.u_at_equilibrium = zeq.dot(sol.theta);
  sol.residual_rms = nc ? std::sqrt((Zres * sol.theta + r).squaredNorm() / static_cast<double>(nc)) : 0.0;
  if (sol.residual_rms > prob.residual_ceiling) {
    sol.warnings.push_back("Zubov residual rms " + std::to_string(sol.residual_rms) +
                           " exceeds " + std::to_string(prob.residual_ceiling));
  }
  return sol;
}

std::size_t Lattice::size() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

std::vector<int> Lattice::unravel(std::size_t flat) const {
  std::vector<int> idx(counts.size());
  for (std::size_t a = 0; a < counts.size(); ++a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(counts[a]));
    flat /= static_cast<std::size_t>(counts[a]);
  }
  return idx;
}

Vector Lattice::point(std::size_t flat) const {
  const std::vector<int> idx = unravel(flat);
  Vector x(box.dim());
  for (int a = 0; a < box.dim(); ++a) {
    const int c = counts[static_cast<std::size_t>(a)];
    x(a) = box.lower(a) + (box.upper(a) - box.lower(a)) * idx[static_cast<std::size_t>(a)] / (c - 1);
  }
  return x;
}

Matrix Lattice::points() const {
  if (static_cast<int>(counts.size()) != box.dim()) {
    throw ShapeMismatch("lattice: counts do not match box dimension");
  }
  for (int c : counts) {
    if (c < 2) throw InvalidArgument("lattice: need at least two points per axis");
  }
  Matrix p(static_cast<Eigen::Index>(size()), box.dim());
  for (std::size_t i = 0; i < size(); ++i) p.row(static_cast<Eigen::Index>(i)) = point(i).transpose();
  return p;
}

std::size_t RoaMask::count() const {
  std::size_t n = 0;
  for (auto v : inside) n += v;
  return n;
}

double RoaMask::fraction() const {
  return inside.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(inside.size());
}

RoaMask roa_extract(const ZubovSolution& sol, const Dictionary& dict, const Lattice& grid,
                    const Vector& x_eq, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("roa: epsilon must lie in (0,1)");
  if (x_eq.size() != grid.box.dim()) throw ShapeMismatch("roa: equilibrium has wrong dimension");
  RoaMask mask;
  mask.lattice = grid;
  mask.u = zubov_values(dict, sol.theta, grid.points());
  mask.inside.assign(grid.size(), 0);
  const double level = 1.0 - epsilon;

  // Nearest lattice point to x_eq.
  std::size_t seed = 0, stride = 1;
  for (int a = 0; a < grid.box.dim(); ++a) {
    const int c = grid.counts[static_cast<std::size_t>(a)];
    const double s = (x_eq(a) - grid.box.lower(a)) / (grid.box.upper(a) - grid.box.lower(a)) * (c - 1);
    const int i = std::clamp(static_cast<int>(std::lround(s)), 0, c - 1);
    seed += static_cast<std::size_t>(i) * stride;
    stride *= static_cast<std::size_t>(c);
  }
  if (!(mask.u(static_cast<Eigen::Index>(seed)) <= level)) {
    throw EmptyRegion("roa: u at the equilibrium lattice point is " +
                      std::to_string(mask.u(static_cast<Eigen::Index>(seed))) + " > " +
                      std::to_string(level));
  }
  std::deque<std::size_t> queue{seed};
  mask.inside[seed] = 1;
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    const std::vector<int> idx = grid.unravel(cur);
    std::size_t st = 1;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (int dir : {-1, 1}) {
        const int j = idx[a] + dir;
        if (j < 0 || j >= grid.counts[a]) continue;
        const std::size_t nb = dir < 0 ? cur - st : cur + st;
        if (!mask.inside[nb] && mask.u(static_cast<Eigen::Index>(nb)) <= level) {
          mask.inside[nb] = 1;
          queue.push_back(nb);
        }
      }
      st *= static_cast<std::size_t>(grid.counts[a]);
    }
  }
  return mask;
}

double lie_derivative_check(const LearnedGenerator& gen, const Vector& theta, const Matrix& points) {
  if (!gen.dictionary) throw InvalidArgument("lie_derivative_check: no dictionary");
  if (points.rows() == 0) throw InvalidArgument("lie_derivative_check: no points");
  return (gen.dictionary->evaluate_batch(points) * (gen.L * theta)).maxCoeff();
}

Matrix lattice_collocation(const Box& box, const std::vector<int>& counts, const Vector& x_eq,
                           double exclusion_radius) {
  const Matrix all = Lattice{box, counts}.points();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < all.rows(); ++i) {
    if ((all.row(i).transpose() - x_eq).norm() > exclusion_radius) keep.push_back(i);
  }
  Matrix out(static_cast<Eigen::Index>(keep.size()), box.dim());
  for (std::size_t k = 0; k < keep.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = all.row(keep[k]);
  return out;
}

Matrix box_boundary_points(const Box& box, int per_axis) {
  if (per_axis < 2) throw InvalidArgument("boundary points: need at least two per axis");
  const Lattice lat{box, std::vector<int>(static_cast<std::size_t>(box.dim()), per_axis)};
  std::vector<Vector> pts;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const std::vector<int> idx = lat.unravel(i);
    bool face = false;
    for (int v : idx) face = face || v == 0 || v == per_axis - 1;
    if (face) pts.push_back(lat.point(i));
  }
  Matrix out(static_cast<Eigen::Index>(pts.size()), box.dim());
  for (std::size_t k = 0; k < pts.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
  return out;
}

}  // namespace koopgen
