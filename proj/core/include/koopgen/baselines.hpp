#pragma once

#include <memory>
#include <string_view>

#include "koopgen/dataset.hpp"
#include "koopgen/dictionary.hpp"
#include "koopgen/rtm.hpp"
#include "koopgen/sysid.hpp"

namespace koopgen {

struct KoopmanMatrix {
  Matrix K;
  double tau = 0.0;
  std::shared_ptr<const Dictionary> dictionary;
};

/// K = argmin |Phi_tau - X K|_F by SVD least squares.
KoopmanMatrix edmd_learn(const Matrix& X, const Matrix& Phi_tau, double tau,
                         std::shared_ptr<const Dictionary> dict = nullptr,
                         double rcond = linalg::kDefaultRcond);

/// EDMD on the pairs (x0, phi(tau, x0)) of a uniform-grid dataset,
/// tau = T / Gamma.
KoopmanMatrix edmd_from_dataset(const SnapshotDataset& data,
                                std::shared_ptr<const Dictionary> dict,
                                double rcond = linalg::kDefaultRcond);

/// (K - I) / tau.
LearnedGenerator fdm_learn(const KoopmanMatrix& km);

/// Re log(K) / tau; imag_norm = max |Im log(K)| / tau. Propagates
/// DefectiveMatrix and BranchCut.
LearnedGenerator klm_learn(const KoopmanMatrix& km);

enum class DerivativeScheme {
  kCentral2,  // second order central, one-sided second order at the ends
  kCentral4,  // fourth order central, one-sided fourth order at the ends
};

std::string_view to_string(DerivativeScheme s);
DerivativeScheme derivative_scheme_from_string(std::string_view s);

/// Time derivatives of uniformly sampled states (rows) with spacing dt.
Matrix finite_difference_derivatives(const Matrix& states, double dt, DerivativeScheme scheme);

struct StlsqOptions {
  double threshold = 0.05;
  int max_iters = 10;
  double rcond = linalg::kDefaultRcond;
};

/// Column-wise sequentially thresholded least squares of targets on
/// features: returns coefficients (features.cols() x targets.cols()).
/// Throws DegenerateData if every column ends with an empty support.
Matrix stlsq(const Matrix& features, const Matrix& targets, const StlsqOptions& opts);

IdentifiedSystem sindy_stlsq(const Matrix& states, const Matrix& derivatives,
                             std::shared_ptr<const Dictionary> dict, const StlsqOptions& opts);

/// SINDy on all uniform snapshots of a dataset.
IdentifiedSystem sindy_from_dataset(const SnapshotDataset& data,
                                    std::shared_ptr<const Dictionary> dict,
                                    const StlsqOptions& opts,
                                    DerivativeScheme scheme = DerivativeScheme::kCentral2);

}  // namespace koopgen
