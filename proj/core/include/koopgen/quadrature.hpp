#pragma once

#include <span>
#include <vector>

namespace koopgen {

/// Gauss-Legendre rule on [0, T].
struct QuadratureRule {
  double T = 0.0;
  std::vector<double> nodes;    // ascending, inside (0, T)
  std::vector<double> weights;  // positive, summing to T

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Legendre nodes by Newton iteration, mapped from [-1, 1] to [0, T].
QuadratureRule gl_rule(double T, int gamma_count);

double gl_integrate(const QuadratureRule& rule, std::span<const double> values);

enum class UniformMode {
  kInterpGl,   // monotone cubic (PCHIP) through the samples, then Gauss-Legendre
  kComposite,  // composite Simpson
};

/// Integral over [0, T] from samples at t_k = k T / Gamma, k = 0..Gamma.
double integrate_uniform(double T, std::span<const double> samples, UniformMode mode);

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes through
/// (t_k, y_k), evaluated at `at`. `t` must be strictly increasing.
std::vector<double> pchip_interpolate(std::span<const double> t, std::span<const double> y,
                                      std::span<const double> at);

/// Error bound for Gauss-Legendre on t -> e^{-mu t} z(phi(t, x)) with z a
/// degree-N monomial and f Lipschitz with constant L_f:
///   T^{2G+1} |x|^N sup_t q(t) / (8 G^2)^G,
///   q(t) = e^{(N L_f - mu) t} (mu + N L_f)^{2G}.
double quad_error_bound(double mu, int order_n, double lipschitz, double T, int gamma_count,
                        double x_norm);

struct GlCoefficient {
  int k = 0;
  double exact = 0.0;  // (k!)^4 / ((2k+1) ((2k)!)^3)
  double bound = 0.0;  // (8 k^2)^{-k}
};

/// Evaluates both sides for k = 1..k_max (k_max <= 20) and throws
/// InternalConsistency if exact > bound anywhere.
std::vector<GlCoefficient> gl_coefficient_bound_check(int k_max);

}  // namespace koopgen
