#pragma once

#include <span>
#include <vector>

#include "koopgen/linalg.hpp"
#include "koopgen/ode.hpp"
#include "koopgen/systems.hpp"

namespace koopgen {

/// Snapshots of M trajectories on [0, T].
///
/// Two sample grids may be present: the Gamma Gauss-Legendre nodes of [0, T]
/// and the uniform grid t_k = k T / Gamma, k = 0..Gamma. The endpoint phi(T)
/// is always stored.
struct SnapshotDataset {
  int dim = 0;
  double T = 0.0;
  int gamma_count = 0;
  Matrix initial;  // M x d

  std::vector<double> gl_times;
  std::vector<Matrix> gl_states;  // per trajectory, Gamma x d

  std::vector<double> uniform_times;
  std::vector<Matrix> uniform_states;  // per trajectory, (Gamma + 1) x d

  Matrix endpoint;  // M x d
  std::vector<TrajectoryStatus> status;

  int size() const { return static_cast<int>(initial.rows()); }
  bool has_gl() const { return !gl_states.empty(); }
  bool has_uniform() const { return !uniform_states.empty(); }
  double tau() const { return T / gamma_count; }

  /// M x d matrix of phi(t_k) over all trajectories, for uniform index k.
  Matrix uniform_slice(int k) const;

  /// Throws if shapes are inconsistent or any state is non-finite.
  void validate() const;
};

struct DatasetOptions {
  bool gl = true;
  bool uniform = true;
  IntegratorOptions integrator;
  /// Use the closed-form flow when the system provides one.
  bool use_exact_flow = true;
  /// Worker threads for per-trajectory integration (0 = hardware).
  int workers = 1;
};

/// Integrates every row of `x0s` and samples the requested grids.
SnapshotDataset generate_dataset(const SystemSpec& spec, const Matrix& x0s, double T,
                                 int gamma_count, const DatasetOptions& options = {});

/// Builds a uniform-grid dataset from externally supplied trajectories that
/// share the same equally spaced times starting at 0.
SnapshotDataset dataset_from_trajectories(const std::vector<Trajectory>& trajectories);

/// Rows `rows` of `data`, in the given order.
SnapshotDataset subset(const SnapshotDataset& data, std::span<const int> rows);

/// Runs body(i) for i in [0, count) on up to `workers` threads. Exceptions
/// are rethrown on the caller (first one wins).
void parallel_for(int count, int workers, const std::function<void(int)>& body);

}  // namespace koopgen
