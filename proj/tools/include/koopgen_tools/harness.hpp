#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "koopgen_tools/config.hpp"

namespace koopgen::tools {

struct RunOptions {
  std::filesystem::path out_dir;  // empty: nothing is written
  bool timing = false;            // fill wall_ms (makes outputs run-dependent)
  bool write_models = true;
};

// One (system, gamma, method) cell of a benchmark table.
struct CellResult {
  std::string system;
  Method method = Method::kRtm;
  double gamma = 0.0;
  int gamma_count = 0;
  int M = 0;
  int N = 0;
  std::optional<double> rmse_weights;
  std::optional<double> rmse_flow;
  double imag_norm = 0.0;
  int blowups = 0;
  std::optional<double> cond_A;
  std::optional<double> cond_D;
  double wall_ms = 0.0;
  std::string status = "ok";
  nlohmann::json model;

  bool ok() const { return status == "ok"; }
  std::string cell_name() const;
};

struct BenchResult {
  std::vector<CellResult> cells;
  std::size_t failed() const;
};

// Evaluation trajectories: drawn from their own seeded stream, never the
// training one.
struct EvaluationSet {
  Matrix initial;
  std::vector<Trajectory> truth;
};

EvaluationSet make_evaluation_set(const BenchConfig& cfg, const SystemSpec& spec);

SnapshotDataset make_training_data(const BenchConfig& cfg, const SystemSpec& spec,
                                   int gamma_count);

struct FittedModel {
  IdentifiedSystem system;
  nlohmann::json model;
  std::optional<double> cond_A;
  std::optional<double> cond_D;
  double imag_norm = 0.0;
};

FittedModel fit_method(const BenchConfig& cfg, const std::shared_ptr<const Dictionary>& dict,
                       const SnapshotDataset& data, Method method);

// Learns and scores one method on prepared data.
CellResult run_cell(const BenchConfig& cfg, const SystemSpec& spec,
                    const std::shared_ptr<const Dictionary>& dict, const SnapshotDataset& data,
                    const EvaluationSet& eval, double gamma, Method method);

BenchResult run_bench(const BenchConfig& cfg, const RunOptions& opts = {});

std::string metrics_csv(const BenchConfig& cfg, const BenchResult& result, bool timing);

struct SweepRow {
  double gamma = 0.0;
  double mu = 0.0;
  std::optional<double> rmse_weights;
  std::optional<double> cond_A;
  std::string status = "ok";
};

std::vector<SweepRow> run_sweep_mu(const BenchConfig& cfg);

std::string sweep_csv(const BenchConfig& cfg, const std::vector<SweepRow>& rows);

struct ZubovRun {
  Vector equilibrium;
  ZubovSolution solution;
  RoaMask mask;
  double lie_max = 0.0;  // max Lie derivative over the RoA mask, excluding the equilibrium cell
  nlohmann::json summary;
};

ZubovRun run_zubov(const BenchConfig& cfg);

std::string zubov_csv(const ZubovRun& run);

// Training trajectories on the uniform grid, one row per (trajectory, time).
std::string simulate_csv(const BenchConfig& cfg);

}  // namespace koopgen::tools
