#include "koopgen/baselines.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

#include "koopgen/error.hpp"
#include "koopgen/linalg.hpp"

namespace koopgen {

KoopmanMatrix edmd_learn(const Matrix& X, const Matrix& Phi_tau, double tau,
                         std::shared_ptr<const Dictionary> dict, double rcond) {
  if (!(tau > 0.0)) throw InvalidArgument("edmd: tau must be positive");
  if (X.rows() != Phi_tau.rows() || X.cols() != Phi_tau.cols()) {
    throw ShapeMismatch("edmd: X and Phi_tau must share a shape");
  }
  if (X.rows() == 0) throw DegenerateData("edmd: no samples");
  if (linalg::singular_values(X)(0) == 0.0) throw DegenerateData("edmd: X is zero");
  KoopmanMatrix km;
  km.K = linalg::lstsq(X, Phi_tau, rcond);
  km.tau = tau;
  km.dictionary = std::move(dict);
  return km;
}

KoopmanMatrix edmd_from_dataset(const SnapshotDataset& data, std::shared_ptr<const Dictionary> dict,
                                double rcond) {
  if (!dict) throw InvalidArgument("edmd: no dictionary");
  if (!data.has_uniform()) throw InvalidArgument("edmd: dataset has no uniform-grid samples");
  const Matrix X = dict->evaluate_batch(data.initial);
  const Matrix Phi = dict->evaluate_batch(data.uniform_slice(1));
  return edmd_learn(X, Phi, data.tau(), std::move(dict), rcond);
}

namespace {

nlohmann::json koopman_provenance(const KoopmanMatrix& km, std::string_view method) {
  return {{"method", std::string(method)},
          {"tau", km.tau},
          {"N", km.K.rows()},
          {"cond_K", linalg::condition_number(km.K)}};
}

}  // namespace

LearnedGenerator fdm_learn(const KoopmanMatrix& km) {
  if (!(km.tau > 0.0)) throw InvalidArgument("fdm: tau must be positive");
  LearnedGenerator g;
  g.method = Method::kFdm;
  g.dictionary = km.dictionary;
  g.L = (km.K - Matrix::Identity(km.K.rows(), km.K.cols())) / km.tau;
  g.provenance = koopman_provenance(km, "FDM");
  return g;
}

LearnedGenerator klm_learn(const KoopmanMatrix& km) {
  if (!(km.tau > 0.0)) throw InvalidArgument("klm: tau must be positive");
  const linalg::MatrixLog lg = linalg::matrix_log(km.K);
  LearnedGenerator g;
  g.method = Method::kKlm;
  g.dictionary = km.dictionary;
  g.L = lg.real / km.tau;
  g.imag_norm = lg.imag.size() ? lg.imag.cwiseAbs().maxCoeff() / km.tau : 0.0;
  g.provenance = koopman_provenance(km, "KLM");
  g.provenance["imag_norm"] = g.imag_norm;
  return g;
}

std::string_view to_string(DerivativeScheme s) {
  return s == DerivativeScheme::kCentral2 ? "central2" : "central4";
}

DerivativeScheme derivative_scheme_from_string(std::string_view s) {
  if (s == "central2") return DerivativeScheme::kCentral2;
  if (s == "central4") return DerivativeScheme::kCentral4;
  throw InvalidArgument("unknown derivative scheme '" + std::string(s) + "'");
}

Matrix finite_difference_derivatives(const Matrix& states, double dt, DerivativeScheme scheme) {
  if (!(dt > 0.0)) throw InvalidArgument("finite differences: dt must be positive");
  const Eigen::Index n = states.rows();
  Matrix d(n, states.cols());
  if (scheme == DerivativeScheme::kCentral2) {
    if (n < 3) throw InvalidArgument("finite differences: central2 needs >= 3 samples");
    for (Eigen::Index k = 1; k + 1 < n; ++k) d.row(k) = (states.row(k + 1) - states.row(k - 1)) / (2 * dt);
    d.row(0) = (-3.0 * states.row(0) + 4.0 * states.row(1) - states.row(2)) / (2 * dt);
    d.row(n - 1) = (3.0 * states.row(n - 1) - 4.0 * states.row(n - 2) + states.row(n - 3)) / (2 * dt);
    return d;
  }
  if (n < 5) throw InvalidArgument("finite differences: central4 needs >= 5 samples");
  for (Eigen::Index k = 2; k + 2 < n; ++k) {
    d.row(k) = (states.row(k - 2) - 8.0 * states.row(k - 1) + 8.0 * states.row(k + 1) -
                states.row(k + 2)) /
               (12 * dt);
  }
  // Fourth-order one-sided stencils for the two rows at each end.
  const auto fwd = [&](Eigen::Index k) {
    return (-25.0 * states.row(k) + 48.0 * states.row(k + 1) - 36.0 * states.row(k + 2) +
            16.0 * states.row(k + 3) - 3.0 * states.row(k + 4)) /
           (12 * dt);
  };
  const auto fwd1 = [&](Eigen::Index k) {
    // derivative at k from k-1..k+3
    return (-3.0 * states.row(k - 1) - 10.0 * states.row(k) + 18.0 * states.row(k + 1) -
            6.0 * states.row(k + 2) + states.row(k + 3)) /
           (12 * dt);
  };
  const auto bwd = [&](Eigen::Index k) {
    return (25.0 * states.row(k) - 48.0 * states.row(k - 1) + 36.0 * states.row(k - 2) -
            16.0 * states.row(k - 3) + 3.0 * states.row(k - 4)) /
           (12 * dt);
  };
  const auto bwd1 = [&](Eigen::Index k) {
    return (3.0 * states.row(k + 1) + 10.0 * states.row(k) - 18.0 * states.row(k - 1) +
            6.0 * states.row(k - 2) - states.row(k - 3)) /
           (12 * dt);
  };
  d.row(0) = fwd(0);
  d.row(1) = fwd1(1);
  d.row(n - 1) = bwd(n - 1);
  d.row(n - 2) = bwd1(n - 2);
  return d;
}

Matrix stlsq(const Matrix& features, const Matrix& targets, const StlsqOptions& opts) {
  if (features.rows() != targets.rows()) throw ShapeMismatch("stlsq: row counts differ");
  if (opts.threshold < 0.0 || opts.max_iters < 0) throw InvalidArgument("stlsq: bad options");
  const Eigen::Index N = features.cols();
  if (features.rows() > 4 * N && features.rows() > 256) {
    // |F_S c - y| = |R_S c - Q^T y| up to a constant, for every support S.
    linalg::require_finite(features, "stlsq features");
    const Eigen::HouseholderQR<Matrix> qr(features);
    const Matrix r = qr.matrixQR().topRows(N).triangularView<Eigen::Upper>();
    return stlsq(r, (qr.householderQ().adjoint() * targets).topRows(N), opts);
  }
  Matrix coef = linalg::lstsq(features, targets, opts.rcond);
  bool any_support = false;
  for (Eigen::Index j = 0; j < targets.cols(); ++j) {
    std::vector<char> active(static_cast<std::size_t>(N), 1);
    Vector c = coef.col(j);
    for (int iter = 0; iter < opts.max_iters; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (active[static_cast<std::size_t>(i)] && std::abs(c(i)) < opts.threshold) {
          active[static_cast<std::size_t>(i)] = 0;
          changed = true;
        }
      }
      if (!changed) break;
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (active[static_cast<std::size_t>(i)]) idx.push_back(i);
      }
      c.setZero();
      if (idx.empty()) break;
      Matrix sub(features.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = features.col(idx[k]);
      const Vector s = linalg::lstsq(sub, targets.col(j), opts.rcond);
      for (std::size_t k = 0; k < idx.size(); ++k) c(idx[k]) = s(static_cast<Eigen::Index>(k));
    }
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!active[static_cast<std::size_t>(i)]) c(i) = 0.0;
    }
    coef.col(j) = c;
    if ((c.array() != 0.0).any()) any_support = true;
  }
  if (!any_support && targets.cols() > 0) {
    throw DegenerateData("stlsq: every coefficient fell below the threshold");
  }
  return coef;
}

IdentifiedSystem sindy_stlsq(const Matrix& states, const Matrix& derivatives,
                             std::shared_ptr<const Dictionary> dict, const StlsqOptions& opts) {
  if (!dict) throw InvalidArgument("sindy: no dictionary");
  if (states.rows() != derivatives.rows() || states.cols() != derivatives.cols()) {
    throw ShapeMismatch("sindy: states and derivatives must share a shape");
  }
  const Matrix theta = stlsq(dict->evaluate_batch(states), derivatives, opts);
  return IdentifiedSystem{theta.transpose(), std::move(dict), Method::kSindy};
}

IdentifiedSystem sindy_from_dataset(const SnapshotDataset& data,
                                    std::shared_ptr<const Dictionary> dict,
                                    const StlsqOptions& opts, DerivativeScheme scheme) {
  if (!data.has_uniform()) throw InvalidArgument("sindy: dataset has no uniform-grid samples");
  const Eigen::Index rows_per = data.gamma_count + 1;
  Matrix states(data.size() * rows_per, data.dim);
  Matrix derivs(states.rows(), data.dim);
  for (int m = 0; m < data.size(); ++m) {
    const Matrix& s = data.uniform_states[static_cast<std::size_t>(m)];
    states.middleRows(m * rows_per, rows_per) = s;
    derivs.middleRows(m * rows_per, rows_per) = finite_difference_derivatives(s, data.tau(), scheme);
  }
  return sindy_stlsq(states, derivs, std::move(dict), opts);
}

}  // namespace koopgen
