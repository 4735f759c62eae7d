#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "koopgen/linalg.hpp"
#include "koopgen/ode.hpp"

namespace koopgen {

/// Axis-aligned box prod_i (lower_i, upper_i).
struct Box {
  Vector lower;
  Vector upper;

  static Box cube(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lower.size()); }
  Vector center() const { return 0.5 * (lower + upper); }
  Vector half_width() const { return 0.5 * (upper - lower); }
  /// Membership in the closure, with absolute slack `tol`.
  bool contains(std::span<const double> x, double tol = 0.0) const;
};

/// One monomial term coefficient * prod_k x_k^exponents[k] of f_axis.
struct PolynomialTerm {
  int axis = 0;
  double coefficient = 0.0;
  std::vector<int> exponents;
};

/// Closed-form flow phi(t, x0), when the system has one.
using FlowMap = std::function<void(double t, std::span<const double> x0, std::span<double> out)>;

using Params = std::map<std::string, double>;

/// A named vector field on a box domain.
struct SystemSpec {
  std::string name;
  int dim = 0;
  VectorField field;
  Box domain;
  std::optional<double> lipschitz_estimate;
  /// Multiply the field by a cutoff that vanishes on the domain boundary.
  bool recast_boundary = false;
  /// Monomial expansion of the field; empty for non-polynomial systems.
  std::vector<PolynomialTerm> polynomial_terms;
  FlowMap exact_flow;
  Params params;

  /// Effective field (cutoff applied when recast_boundary is set).
  void evaluate(std::span<const double> x, std::span<double> out) const;
  Vector evaluate(const Vector& x) const;
  VectorField effective_field() const;
  bool is_polynomial() const { return !polynomial_terms.empty() && !recast_boundary; }
};

struct Trajectory {
  Vector initial;
  std::vector<double> times;
  Matrix states;  // times.size() x dim
  TrajectoryStatus status = TrajectoryStatus::kOk;
  /// Set when a state left the closure of the domain (without recast).
  bool domain_exit = false;
  std::vector<std::string> warnings;

  int dim() const { return static_cast<int>(states.cols()); }
};

std::vector<std::string> builtin_system_names();

/// Benchmark vector fields: vdp, lorenz63_scaled, lorenz96, yeast7,
/// rational2d, two_machine, cubic1d, plus `linear` (f(x) = a x) for oracle
/// checks. Unknown names and unknown or out-of-range params throw
/// InvalidArgument.
SystemSpec builtin_system(std::string_view name, const Params& params = {});

/// Integrates the effective field from x0, returning the state at each of
/// `request_times` (ascending, nonnegative).
Trajectory integrate(const SystemSpec& spec, std::span<const double> x0,
                     std::span<const double> request_times,
                     const IntegratorOptions& opts = {});

/// M points i.i.d. uniform on the open box, one per row.
Matrix sample_initial_conditions(const Box& domain, std::size_t count, std::uint64_t seed);

/// Copy of `spec` whose field is scaled by recast_cutoff, so that the box is
/// forward invariant.
SystemSpec recast_field(const SystemSpec& spec);

/// Product over axes of smoothstep((1 - r_i) / 0.05), r_i = |x_i - c_i| / h_i.
/// Equals 1 on the 95%-scaled inner box and 0 on the boundary.
double recast_cutoff(const Box& domain, std::span<const double> x);

/// CSV with header `t,x1,...,xd`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

}  // namespace koopgen
