#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "koopgen/dictionary.hpp"
#include "koopgen/rtm.hpp"
#include "koopgen/systems.hpp"

namespace koopgen {

struct ZubovWeights {
  double residual = 1.0;
  double equilibrium = 100.0;
  double boundary = 10.0;
};

/// L u = -alpha |x - x_eq|^2 (1 - u), u(x_eq) = 0, u = 1 on the boundary
/// points (soft).
struct ZubovProblem {
  double alpha = 0.1;
  Vector equilibrium;
  Matrix collocation;  // rows are points
  Matrix boundary;     // rows are points; may be empty
  ZubovWeights weights;
  double epsilon = 0.05;
  /// residual_rms above this adds a warning.
  double residual_ceiling = 1e-2;
  double rcond = linalg::kDefaultRcond;

  void validate(int dim) const;
};

struct ZubovSolution {
  Vector theta;
  double residual_rms = 0.0;
  double level = 0.95;  // 1 - epsilon
  double u_at_equilibrium = 0.0;
  std::vector<std::string> warnings;
};

ZubovSolution zubov_solve(const LearnedGenerator& gen, const ZubovProblem& prob);

/// u(x; theta) = Z(x)^T theta at each row.
Vector zubov_values(const Dictionary& dict, const Vector& theta, const Matrix& points);

/// Evenly spaced lattice including the box faces.
struct Lattice {
  Box box;
  std::vector<int> counts;  // per axis, each >= 2

  std::size_t size() const;
  std::vector<int> unravel(std::size_t flat) const;  // axis 0 fastest
  Vector point(std::size_t flat) const;
  Matrix points() const;
};

struct RoaMask {
  Lattice lattice;
  std::vector<std::uint8_t> inside;
  Vector u;  // u at every lattice point

  std::size_t count() const;
  double fraction() const;
};

/// Connected component (axis neighbours) of {u <= 1 - epsilon} that
/// contains the lattice point nearest x_eq. Throws EmptyRegion if that point
/// is not in the sublevel set.
RoaMask roa_extract(const ZubovSolution& sol, const Dictionary& dict, const Lattice& grid,
                    const Vector& x_eq, double epsilon);

/// max over rows of Z(x)^T L theta.
double lie_derivative_check(const LearnedGenerator& gen, const Vector& theta,
                            const Matrix& points);

/// Lattice points of `box` at distance > exclusion_radius from x_eq.
Matrix lattice_collocation(const Box& box, const std::vector<int>& counts, const Vector& x_eq,
                           double exclusion_radius);

/// Points on the faces of `box`: per_axis evenly spaced samples along every
/// face coordinate.
Matrix box_boundary_points(const Box& box, int per_axis);

}  // namespace koopgen
