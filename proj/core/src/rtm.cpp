#include "koopgen/rtm.hpp"

#include <cmath>
#include <string>

#include "koopgen/error.hpp"
#include "koopgen/quadrature.hpp"

namespace koopgen {

std::string_view to_string(QuadratureMode mode) {
  switch (mode) {
    case QuadratureMode::kGlNodes: return "gl_nodes";
    case QuadratureMode::kUniformInterp: return "uniform_interp";
    case QuadratureMode::kUniformComposite: return "uniform_composite";
  }
  return "?";
}

QuadratureMode quadrature_mode_from_string(std::string_view s) {
  if (s == "gl_nodes") return QuadratureMode::kGlNodes;
  if (s == "uniform_interp") return QuadratureMode::kUniformInterp;
  if (s == "uniform_composite") return QuadratureMode::kUniformComposite;
  throw InvalidArgument("unknown quadrature mode '" + std::string(s) + "'");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kRtm: return "RTM";
    case Method::kSrtm: return "SRTM";
    case Method::kFdm: return "FDM";
    case Method::kKlm: return "KLM";
    case Method::kSindy: return "SINDY";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  std::string up(s);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "RTM") return Method::kRtm;
  if (up == "SRTM") return Method::kSrtm;
  if (up == "FDM") return Method::kFdm;
  if (up == "KLM") return Method::kKlm;
  if (up == "SINDY") return Method::kSindy;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

void RtmConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("rtm: mu must be positive");
  if (!(lambda > mu) || !std::isfinite(lambda)) throw InvalidArgument("rtm: lambda must exceed mu");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("rtm: T must be positive");
  if (gamma_count < 1) throw InvalidArgument("rtm: Gamma must be >= 1");
  if (!(delta >= 0.0)) throw InvalidArgument("rtm: delta must be nonnegative");
  if (!(rcond > 0.0 && rcond < 1.0)) throw InvalidArgument("rtm: rcond must lie in (0,1)");
}

nlohmann::json RtmConfig::to_json() const {
  return {{"mu", mu},
          {"lambda", lambda},
          {"T", T},
          {"gamma_count", gamma_count},
          {"delta", delta},
          {"quadrature_mode", std::string(to_string(quadrature_mode))},
          {"rcond", rcond}};
}

RtmIntermediates assemble(const SnapshotDataset& data, const Dictionary& dict,
                          const RtmConfig& cfg) {
  cfg.validate();
  if (data.dim != dict.dim()) throw ShapeMismatch("assemble: dataset and dictionary dimensions differ");
  if (std::abs(data.T - cfg.T) > 1e-12 * std::max(1.0, cfg.T)) {
    throw InvalidArgument("assemble: dataset horizon " + std::to_string(data.T) +
                          " differs from configured T " + std::to_string(cfg.T));
  }
  if (data.gamma_count != cfg.gamma_count) {
    throw InvalidArgument("assemble: dataset has Gamma=" + std::to_string(data.gamma_count) +
                          ", config asks for " + std::to_string(cfg.gamma_count));
  }
  const bool gl = cfg.quadrature_mode == QuadratureMode::kGlNodes;
  if (gl && !data.has_gl()) {
    throw InvalidArgument("assemble: gl_nodes quadrature needs samples at Gauss-Legendre nodes");
  }
  if (!gl && !data.has_uniform()) {
    throw InvalidArgument("assemble: uniform quadrature needs uniform-grid samples");
  }

  const int M = data.size();
  const int N = dict.size();
  RtmIntermediates in;
  in.X = dict.evaluate_batch(data.initial);
  in.Phi_T = dict.evaluate_batch(data.endpoint);
  in.I_quad.resize(M, N);

  const QuadratureRule rule = gl ? gl_rule(cfg.T, cfg.gamma_count) : QuadratureRule{};
  const UniformMode umode = cfg.quadrature_mode == QuadratureMode::kUniformInterp
                                ? UniformMode::kInterpGl
                                : UniformMode::kComposite;
  // Discount factors e^{-mu t} at the sample times.
  std::vector<double> disc;
  for (double t : gl ? data.gl_times : data.uniform_times) disc.push_back(std::exp(-cfg.mu * t));
  if (gl) {
    // Fold the weights in once: I_quad row = sum_k w_k e^{-mu t_k} Z(phi(t_k)).
    for (std::size_t k = 0; k < disc.size(); ++k) disc[k] *= rule.weights[k];
  }

  parallel_for(M, cfg.workers, [&](int m) {
    const Matrix z = dict.evaluate_batch(gl ? data.gl_states[static_cast<std::size_t>(m)]
                                            : data.uniform_states[static_cast<std::size_t>(m)]);
    if (gl) {
      in.I_quad.row(m) = (Eigen::Map<const Vector>(disc.data(), static_cast<Eigen::Index>(disc.size()))
                              .transpose() *
                          z);
      return;
    }
    std::vector<double> col(disc.size());
    for (int i = 0; i < N; ++i) {
      for (std::size_t k = 0; k < disc.size(); ++k) {
        col[k] = disc[k] * z(static_cast<Eigen::Index>(k), i);
      }
      in.I_quad(m, i) = integrate_uniform(cfg.T, col, umode);
    }
  });
  linalg::require_finite(in.I_quad, "quadrature matrix");
  linalg::require_finite(in.Phi_T, "endpoint features");
  return in;
}

Matrix solve_resolvent_weights(RtmIntermediates& in, const RtmConfig& cfg) {
  if (in.X.rows() == 0) throw DegenerateData("resolvent solve: no trajectories");
  if (in.X.rows() != in.Phi_T.rows() || in.X.cols() != in.Phi_T.cols() ||
      in.X.rows() != in.I_quad.rows() || in.X.cols() != in.I_quad.cols()) {
    throw ShapeMismatch("resolvent solve: X, Phi_T and I_quad must share a shape");
  }
  const Matrix D = in.X - std::exp(-cfg.mu * cfg.T) * in.Phi_T;
  const Vector s = linalg::singular_values(D);
  if (s.size() == 0 || !(s(0) > 0.0)) throw DegenerateData("resolvent solve: D is zero");
  in.cond_D = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1)
                                    : std::numeric_limits<double>::infinity();
  in.Xi = linalg::lstsq(D, in.I_quad, cfg.rcond);
  return in.Xi;
}

LearnedGenerator learn(const SnapshotDataset& data, std::shared_ptr<const Dictionary> dict,
                       const RtmConfig& cfg, RtmIntermediates* keep) {
  if (!dict) throw InvalidArgument("learn: no dictionary");
  RtmIntermediates in = assemble(data, *dict, cfg);
  solve_resolvent_weights(in, cfg);

  const Matrix XXi = in.X * in.Xi;
  in.Y_A = (cfg.lambda - cfg.mu) * XXi + in.X;
  in.Y_B = cfg.lambda * cfg.mu * XXi - cfg.lambda * in.X;
  in.A = linalg::lstsq(in.X, in.Y_A, cfg.rcond);
  in.B = linalg::lstsq(in.X, in.Y_B, cfg.rcond);
  in.cond_A = linalg::condition_number(in.A);

  LearnedGenerator gen;
  gen.method = Method::kRtm;
  gen.dictionary = std::move(dict);
  gen.L = (cfg.delta > 0.0 ? linalg::tikhonov_pinv(in.A, cfg.delta) : linalg::pinv(in.A, cfg.rcond)) *
          in.B;
  linalg::require_finite(gen.L, "generator matrix");
  if (in.cond_A > 1e10) {
    gen.warnings.push_back("cond(A) = " + std::to_string(in.cond_A) +
                           " exceeds 1e10; consider delta > 0");
  }
  gen.provenance = {{"method", "RTM"},
                    {"config", cfg.to_json()},
                    {"M", data.size()},
                    {"N", gen.dictionary->size()},
                    {"cond_D", in.cond_D},
                    {"cond_A", in.cond_A}};
  if (keep) *keep = std::move(in);
  return gen;
}

double truncation_bound(double lambda, double T, double omega, double C) {
  if (!(lambda > omega)) throw InvalidArgument("truncation_bound: need lambda > omega");
  if (T < 0.0) throw InvalidArgument("truncation_bound: T must be nonnegative");
  return C * std::exp(2.0 * std::log(lambda) - lambda * T) / (lambda - omega);
}

}  // namespace koopgen
