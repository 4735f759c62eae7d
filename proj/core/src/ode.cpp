#include "koopgen/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "koopgen/error.hpp"

namespace koopgen {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double rms_scaled(const Vector& v, const Vector& scale) {
  return std::sqrt((v.array() / scale.array()).square().mean());
}

}  // namespace

OdeSolution integrate_dopri5(const VectorField& f, std::span<const double> x0,
                             std::span<const double> request_times,
                             const IntegratorOptions& opts,
                             const std::function<bool(std::span<const double>)>& inside) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  OdeSolution sol;
  sol.times.assign(request_times.begin(), request_times.end());
  sol.states = Matrix::Constant(static_cast<Eigen::Index>(request_times.size()), n,
                                std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < request_times.size(); ++i) {
    if (request_times[i] < 0.0 || (i > 0 && request_times[i] < request_times[i - 1])) {
      throw InvalidArgument("integrate: request times must be ascending and nonnegative");
    }
  }
  if (request_times.empty()) return sol;

  auto eval = [&f](const Vector& x, Vector& out) {
    f(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
      std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  };
  auto check_region = [&](const Vector& x) {
    if (inside && !sol.left_region &&
        !inside(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())))) {
      sol.left_region = true;
    }
  };

  Vector y = Eigen::Map<const Vector>(x0.data(), n);
  double t = 0.0;
  std::size_t next = 0;
  while (next < request_times.size() && request_times[next] == 0.0) {
    sol.states.row(static_cast<Eigen::Index>(next++)) = y.transpose();
  }
  if (next == request_times.size()) return sol;

  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n), scale(n);
  eval(y, k1);
  if (!k1.allFinite()) {
    sol.status = TrajectoryStatus::kBlowup;
    return sol;
  }

  const double t_end = request_times.back();
  // Initial step (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    scale = opts.atol + opts.rtol * y.array().abs();
    const double d0 = rms_scaled(y, scale);
    const double d1 = rms_scaled(k1, scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end);
    ytmp = y + h0 * k1;
    eval(ytmp, k2);
    const double d2 = rms_scaled(k2 - k1, scale) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min(100.0 * h0, h1);
  }

  bool last_rejected = false;
  while (next < request_times.size()) {
    if (sol.steps >= opts.max_steps) {
      // Step budget exhausted: same outcome as a step-size underflow.
      sol.status = TrajectoryStatus::kStiff;
      sol.stopped_at = t;
      if (opts.throw_on_stiff) {
        throw StiffnessError("integrate: maximum number of steps exceeded at t = " +
                             std::to_string(t));
      }
      return sol;
    }
    const double target = request_times[next];
    const double h_natural = h;
    bool lands = false;
    if (t + h >= target - 1e-14 * std::max(1.0, std::abs(target))) {
      h = target - t;
      lands = true;
    }
    if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
      if (lands) {
        // Request coincides with the current time up to roundoff.
        t = target;
        check_region(y);
        sol.states.row(static_cast<Eigen::Index>(next++)) = y.transpose();
        h = h_natural;
        continue;
      }
      sol.status = TrajectoryStatus::kStiff;
      sol.stopped_at = t;
      if (opts.throw_on_stiff) {
        throw StiffnessError("integrate: step size underflow at t = " + std::to_string(t));
      }
      return sol;
    }

    ytmp = y + h * a21 * k1;
    eval(ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    eval(ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    eval(ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    eval(ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    eval(ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    eval(ynew, k7);
    ++sol.steps;

    double enorm;
    if (!ynew.allFinite() || !k7.allFinite()) {
      enorm = std::numeric_limits<double>::infinity();
    } else {
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      scale = opts.atol + opts.rtol * y.array().abs().max(ynew.array().abs());
      enorm = rms_scaled(err, scale);
    }

    if (enorm <= 1.0) {
      t = lands ? target : t + h;
      y = ynew;
      k1 = k7;
      check_region(y);
      if (y.norm() > opts.blowup_norm) {
        sol.status = TrajectoryStatus::kBlowup;
        sol.stopped_at = t;
        return sol;
      }
      double fac = enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h *= fac;
      if (lands) {
        sol.states.row(static_cast<Eigen::Index>(next++)) = y.transpose();
        h = std::max(h, h_natural);
        // Consecutive requests at the same instant.
        while (next < request_times.size() && request_times[next] <= t) {
          sol.states.row(static_cast<Eigen::Index>(next++)) = y.transpose();
        }
      }
      last_rejected = false;
    } else {
      const double fac =
          std::isfinite(enorm) ? std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 1.0) : 0.2;
      h *= fac;
      last_rejected = true;
      if (!std::isfinite(enorm) && h < 1e-10 * std::max(1.0, std::abs(t))) {
        sol.status = TrajectoryStatus::kBlowup;
        sol.stopped_at = t;
        return sol;
      }
    }
  }
  sol.stopped_at = t;
  return sol;
}

}  // namespace koopgen
