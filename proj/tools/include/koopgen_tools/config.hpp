#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopgen/koopgen.hpp"

namespace koopgen::tools {

// Raised for anything wrong with a config file or a flag; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct DictionarySpec {
  std::string kind = "monomial";  // monomial | tanh
  std::vector<int> per_axis;      // monomial caps, one per axis
  int total_degree = -1;          // alternative to per_axis
  int sigma = 0;
  std::uint64_t seed = 0;
  double scale_w = 1.0;
  double scale_b = 1.0;
  bool append = true;

  Dictionary build(int dim) const;
};

struct ZubovSettings {
  double alpha = 0.1;
  std::optional<Box> box;  // defaults to the system domain
  std::vector<int> collocation_counts;
  double exclusion_radius = 0.05;
  int boundary_per_axis = 0;  // 0 disables boundary rows
  ZubovWeights weights;
  double epsilon = 0.05;
  double residual_ceiling = 1e-2;
  std::vector<int> lattice_counts;
  std::optional<Vector> newton_start;
};

struct BenchConfig {
  std::string label;
  std::string system;
  Params params;
  std::optional<Box> domain;
  bool recast = false;
  DictionarySpec dictionary;
  int M = 100;
  std::vector<double> gammas{50.0};
  double T = 1.0;
  double T_s = 1.0;
  int Gamma_s = 100;
  std::vector<Method> methods{Method::kRtm, Method::kSrtm, Method::kFdm, Method::kKlm,
                              Method::kSindy};
  double mu = 2.5;
  double lambda = 1e8;
  double delta = 0.0;
  QuadratureMode quadrature_mode = QuadratureMode::kGlNodes;
  double srtm_threshold = 1e-3;
  int srtm_max_iters = 10;
  StlsqOptions stlsq;
  DerivativeScheme derivative = DerivativeScheme::kCentral4;
  int eval_trajectories = 100;
  std::uint64_t seed = 1;
  int workers = 0;
  std::vector<double> sweep_mu;
  ZubovSettings zubov;
  std::string preset;

  nlohmann::json resolved;  // final merged document, hashed into every output row
  std::string hash;

  // Gamma = gamma * T, checked integral.
  int gamma_count(double gamma) const;
  SystemSpec system_spec() const;
  RtmConfig rtm_config(int gamma_count) const;
};

// Flag overrides; unset fields keep the file value.
struct Overrides {
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<std::string>> methods;
  std::optional<std::vector<double>> gammas;
  std::optional<int> workers;
};

BenchConfig parse_config(const std::string& text, const std::string& origin,
                         const Overrides& overrides = {});

BenchConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

}  // namespace koopgen::tools
