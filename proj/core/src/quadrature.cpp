#include "koopgen/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "koopgen/error.hpp"

namespace koopgen {

QuadratureRule gl_rule(double T, int gamma_count) {
  if (gamma_count < 1) throw InvalidArgument("gl_rule: need at least one node");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("gl_rule: T must be positive");
  const int n = gamma_count;
  std::vector<double> xs(static_cast<std::size_t>(n)), ws(static_cast<std::size_t>(n));
  // Roots come in +- pairs; solve for the positive half.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // P_n = p1, P_{n-1} = p0.
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    xs[static_cast<std::size_t>(i)] = -x;
    xs[static_cast<std::size_t>(n - 1 - i)] = x;
    ws[static_cast<std::size_t>(i)] = w;
    ws[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) xs[static_cast<std::size_t>(n / 2)] = 0.0;

  QuadratureRule rule;
  rule.T = T;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = 0.5 * T * (xs[static_cast<std::size_t>(i)] + 1.0);
    rule.weights[static_cast<std::size_t>(i)] = 0.5 * T * ws[static_cast<std::size_t>(i)];
  }
  return rule;
}

double gl_integrate(const QuadratureRule& rule, std::span<const double> values) {
  if (values.size() != rule.nodes.size()) {
    throw ShapeMismatch("gl_integrate: " + std::to_string(values.size()) + " values for " +
                        std::to_string(rule.nodes.size()) + " nodes");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += rule.weights[i] * values[i];
  return s;
}

std::vector<double> pchip_interpolate(std::span<const double> t, std::span<const double> y,
                                      std::span<const double> at) {
  const std::size_t n = t.size();
  if (n < 2 || y.size() != n) throw InvalidArgument("pchip: need matching t, y with n >= 2");
  std::vector<double> h(n - 1), delta(n - 1), d(n);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = t[k + 1] - t[k];
    if (!(h[k] > 0.0)) throw InvalidArgument("pchip: abscissae must be strictly increasing");
    delta[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
  } else {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] <= 0.0) {
        d[k] = 0.0;
      } else {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
      }
    }
    // Shape-preserving three-point end slopes.
    auto end_slope = [](double h0, double h1, double del0, double del1) {
      double s = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
      if (s * del0 <= 0.0) {
        s = 0.0;
      } else if (del0 * del1 <= 0.0 && std::abs(s) > std::abs(3.0 * del0)) {
        s = 3.0 * del0;
      }
      return s;
    };
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  std::vector<double> out;
  out.reserve(at.size());
  for (double x : at) {
    if (x < t[0] || x > t[n - 1]) throw InvalidArgument("pchip: evaluation point out of range");
    std::size_t k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
    k = std::min(k == 0 ? 0 : k - 1, n - 2);
    const double s = (x - t[k]) / h[k];
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    out.push_back(h00 * y[k] + h10 * h[k] * d[k] + h01 * y[k + 1] + h11 * h[k] * d[k + 1]);
  }
  return out;
}

double integrate_uniform(double T, std::span<const double> samples, UniformMode mode) {
  if (!(T > 0.0)) throw InvalidArgument("integrate_uniform: T must be positive");
  if (samples.size() < 2) throw InvalidArgument("integrate_uniform: need at least two samples");
  const int g = static_cast<int>(samples.size()) - 1;
  const double h = T / g;

  if (mode == UniformMode::kInterpGl) {
    if (g < 3) throw InvalidArgument("integrate_uniform: interp_gl needs Gamma >= 3");
    std::vector<double> t(samples.size());
    for (int k = 0; k <= g; ++k) t[static_cast<std::size_t>(k)] = k * h;
    t.back() = T;
    const QuadratureRule rule = gl_rule(T, g);
    return gl_integrate(rule, pchip_interpolate(t, samples, rule.nodes));
  }

  if (g == 1) return 0.5 * h * (samples[0] + samples[1]);
  auto simpson = [&](int from, int to) {
    double s = samples[static_cast<std::size_t>(from)] + samples[static_cast<std::size_t>(to)];
    for (int k = from + 1; k < to; ++k) {
      s += ((k - from) % 2 ? 4.0 : 2.0) * samples[static_cast<std::size_t>(k)];
    }
    return s * h / 3.0;
  };
  if (g % 2 == 0) return simpson(0, g);
  // Odd interval count: Simpson on the first Gamma - 3 intervals, 3/8 rule
  // on the last three.
  const auto y = [&](int k) { return samples[static_cast<std::size_t>(k)]; };
  const double tail = 3.0 * h / 8.0 * (y(g - 3) + 3.0 * y(g - 2) + 3.0 * y(g - 1) + y(g));
  return (g > 3 ? simpson(0, g - 3) : 0.0) + tail;
}

double quad_error_bound(double mu, int order_n, double lipschitz, double T, int gamma_count,
                        double x_norm) {
  if (gamma_count < 1 || order_n < 0 || !(T > 0.0) || lipschitz < 0.0 || x_norm < 0.0) {
    throw InvalidArgument("quad_error_bound: invalid arguments");
  }
  if (x_norm == 0.0) return 0.0;
  const double nl = order_n * lipschitz;
  const double g = gamma_count;
  // Work in logs: the factors individually overflow/underflow for large Gamma.
  double log_b = (2.0 * g + 1.0) * std::log(T) + order_n * std::log(x_norm) +
                 g * (2.0 * std::log(mu + nl) - std::log(8.0 * g * g));
  if (nl > mu) log_b += (nl - mu) * T;
  return std::exp(log_b);
}

std::vector<GlCoefficient> gl_coefficient_bound_check(int k_max) {
  if (k_max < 1 || k_max > 20) throw InvalidArgument("gl_coefficient_bound_check: 1 <= k <= 20");
  std::vector<GlCoefficient> rows;
  for (int k = 1; k <= k_max; ++k) {
    const double log_e = 4.0 * std::lgamma(k + 1.0) - std::log(2.0 * k + 1.0) -
                         3.0 * std::lgamma(2.0 * k + 1.0);
    GlCoefficient r;
    r.k = k;
    r.exact = std::exp(log_e);
    r.bound = std::pow(8.0 * k * k, -k);
    if (r.exact > r.bound) {
      throw InternalConsistency("Gauss-Legendre coefficient bound violated at k=" +
                                std::to_string(k));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace koopgen
