#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "koopgen/linalg.hpp"

namespace koopgen {

/// x -> f(x), writing into `out` (same length as `x`).
using VectorField = std::function<void(std::span<const double> x, std::span<double> out)>;

enum class TrajectoryStatus {
  kOk,
  kBlowup,  // state norm exceeded the blow-up threshold or became non-finite
  kStiff,   // step size underflow
};

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Integration stops (status kBlowup) once |x| exceeds this.
  double blowup_norm = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
  /// When false, step-size underflow is reported through the status instead
  /// of throwing StiffnessError.
  bool throw_on_stiff = true;
};

struct OdeSolution {
  std::vector<double> times;
  Matrix states;  // times.size() x dim; rows past a failure are NaN
  TrajectoryStatus status = TrajectoryStatus::kOk;
  double stopped_at = 0.0;
  std::size_t steps = 0;
  /// Per-request flag: the accepted state at this time lay outside the
  /// caller-supplied bound check (see `inside`).
  bool left_region = false;
};

/// Adaptive Dormand-Prince 5(4) integration of x' = f(x) from t = 0.
/// Steps are shortened to land exactly on every requested time, so the
/// returned states carry the full step accuracy. `request_times` must be
/// ascending and nonnegative. `inside`, when set, is checked on every accepted
/// state and sets `left_region` on the first failure.
OdeSolution integrate_dopri5(const VectorField& f, std::span<const double> x0,
                             std::span<const double> request_times,
                             const IntegratorOptions& opts = {},
                             const std::function<bool(std::span<const double>)>& inside = {});

}  // namespace koopgen
