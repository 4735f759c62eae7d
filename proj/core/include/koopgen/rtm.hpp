#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopgen/dataset.hpp"
#include "koopgen/dictionary.hpp"
#include "koopgen/linalg.hpp"

namespace koopgen {

enum class QuadratureMode { kGlNodes, kUniformInterp, kUniformComposite };

enum class Method { kRtm, kSrtm, kFdm, kKlm, kSindy };

std::string_view to_string(QuadratureMode mode);
QuadratureMode quadrature_mode_from_string(std::string_view s);
std::string_view to_string(Method method);
Method method_from_string(std::string_view s);

struct RtmConfig {
  double mu = 2.5;
  double lambda = 1e8;
  double T = 1.0;
  int gamma_count = 50;
  /// Tikhonov regularisation of A; 0 uses the plain pseudoinverse.
  double delta = 0.0;
  QuadratureMode quadrature_mode = QuadratureMode::kGlNodes;
  double rcond = linalg::kDefaultRcond;
  int workers = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

struct RtmIntermediates {
  Matrix X;       // M x N, Z(x0)
  Matrix I_quad;  // M x N, quadrature of e^{-mu t} Z(phi(t))
  Matrix Phi_T;   // M x N, Z(phi(T))
  Matrix Xi;      // N x N
  Matrix Y_A;
  Matrix Y_B;
  Matrix A;
  Matrix B;
  double cond_D = 0.0;  // cond(X - e^{-mu T} Phi_T)
  double cond_A = 0.0;
};

/// Generator matrix on a dictionary: (L g)(x) ~ Z(x)^T L theta for
/// g = Z^T theta.
struct LearnedGenerator {
  Matrix L;
  Method method = Method::kRtm;
  double imag_norm = 0.0;
  std::shared_ptr<const Dictionary> dictionary;
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<std::string> warnings;
};

/// X, I_quad and Phi_T.
RtmIntermediates assemble(const SnapshotDataset& data, const Dictionary& dict,
                          const RtmConfig& cfg);

/// Xi = pinv(X - e^{-mu T} Phi_T) I_quad. Also records cond_D.
Matrix solve_resolvent_weights(RtmIntermediates& inter, const RtmConfig& cfg);

LearnedGenerator learn(const SnapshotDataset& data, std::shared_ptr<const Dictionary> dict,
                       const RtmConfig& cfg, RtmIntermediates* keep = nullptr);

/// C lambda^2 e^{-lambda T} / (lambda - omega).
double truncation_bound(double lambda, double T, double omega, double C);

}  // namespace koopgen
