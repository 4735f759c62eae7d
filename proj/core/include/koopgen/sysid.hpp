#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "koopgen/dataset.hpp"
#include "koopgen/dictionary.hpp"
#include "koopgen/rtm.hpp"
#include "koopgen/systems.hpp"

namespace koopgen {

/// f_hat_j(x) = Z(x)^T theta.row(j).
struct IdentifiedSystem {
  Matrix theta;  // d x N
  std::shared_ptr<const Dictionary> dictionary;
  Method method = Method::kRtm;

  int dim() const { return static_cast<int>(theta.rows()); }
  Vector evaluate(const Vector& x) const;
  VectorField field() const;
};

/// theta.row(j) = L.col(coordinate_index(j))^T.
IdentifiedSystem recover_field(const LearnedGenerator& gen);

/// Integration defaults for identified fields: divergence and step-size
/// underflow are reported through the trajectory status.
IntegratorOptions prediction_integrator_options();

/// States at t_k = k T_s / Gamma_s, k = 0..Gamma_s.
Trajectory predict_flow(const IdentifiedSystem& sys, const Vector& x0, double T_s,
                        int snapshot_count,
                        const IntegratorOptions& opts = prediction_integrator_options());

/// Mean over trajectories of sqrt(mean over k >= 1 of |phi - phi_hat|^2).
double rmse_flow(const std::vector<Trajectory>& truth, const std::vector<Trajectory>& predicted);

/// sqrt(mean of squared entry differences).
double rmse_weights(const Matrix& theta_hat, const Matrix& theta_true);

struct FlowMetrics {
  double rmse_flow = 0.0;
  std::optional<double> rmse_weights;
  std::vector<double> per_trajectory;  // NaN for blown-up predictions
  double horizon = 0.0;
  int snapshot_count = 0;
  int blowups = 0;
};

/// Like rmse_flow, but predictions that blew up or went stiff are flagged and
/// excluded from the mean. rmse_flow is infinite when none survive.
FlowMetrics evaluate_flow(const std::vector<Trajectory>& truth,
                          const std::vector<Trajectory>& predicted);

/// Exact weights of a polynomial system on a monomial dictionary (d x N).
/// Throws InvalidArgument if a term is not representable.
Matrix true_weights(const SystemSpec& spec, const Dictionary& dict);

/// Sequentially thresholded refit of recover_field(gen) against the learned
/// generator's output on the validation snapshots.
IdentifiedSystem srtm_sparsify(const LearnedGenerator& gen, const SnapshotDataset& validation,
                               double threshold, int max_iters = 10);

struct NewtonOptions {
  int max_iters = 100;
  double tol = 1e-12;
  double fd_step = 1e-7;
};

/// Damped Newton on f_hat(x) = 0 from `start`, finite-difference Jacobian.
/// Throws NumericalFailure when it does not converge.
Vector find_equilibrium(const IdentifiedSystem& sys, const Vector& start,
                        const NewtonOptions& opts = {});

}  // namespace koopgen
