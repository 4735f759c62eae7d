#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "koopgen_tools/harness.hpp"

namespace kt = koopgen::tools;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAllFailed = 3;

struct CommonFlags {
  std::string config;
  std::string out = "out";
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> methods;
  std::vector<double> gammas;
  std::optional<int> workers;
  bool timing = false;
};

void add_common(CLI::App* sub, CommonFlags& f, bool timing_flag) {
  sub->add_option("--config", f.config, "JSON config file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory")->capture_default_str();
  sub->add_option("--preset", f.preset, "named preset from the config (paper, desk)");
  sub->add_option("--seed", f.seed, "base seed, overrides the config");
  sub->add_option("--method", f.methods, "comma-separated methods: RTM,SRTM,FDM,KLM,SINDY")
      ->delimiter(',');
  sub->add_option("--gamma", f.gammas, "comma-separated sampling rates gamma")->delimiter(',');
  sub->add_option("--workers", f.workers, "worker threads, 0 = hardware concurrency");
  if (timing_flag) sub->add_flag("--timing", f.timing, "record wall_ms (outputs become run-dependent)");
}

kt::BenchConfig load(const CommonFlags& f) {
  kt::Overrides o;
  if (!f.preset.empty()) o.preset = f.preset;
  o.seed = f.seed;
  if (!f.methods.empty()) o.methods = f.methods;
  if (!f.gammas.empty()) o.gammas = f.gammas;
  o.workers = f.workers;
  return kt::load_config(f.config, o);
}

void print_table(const kt::BenchResult& r) {
  for (const auto& c : r.cells) {
    std::cout << c.system << "  " << koopgen::to_string(c.method) << "  gamma=" << c.gamma;
    if (!c.ok()) {
      std::cout << "  " << c.status << '\n';
      continue;
    }
    if (c.rmse_weights) std::cout << "  rmse_w=" << *c.rmse_weights;
    if (c.rmse_flow) std::cout << "  rmse_f=" << *c.rmse_flow;
    if (c.imag_norm != 0.0) std::cout << "  imag=" << c.imag_norm;
    if (c.blowups > 0) std::cout << "  blowups=" << c.blowups;
    std::cout << '\n';
  }
}

int cmd_simulate(const CommonFlags& f) {
  const kt::BenchConfig cfg = load(f);
  const auto path = std::filesystem::path(f.out) / ("simulate_" + cfg.label + ".csv");
  koopgen::write_text_atomic(path, kt::simulate_csv(cfg));
  std::cout << "wrote " << path.string() << '\n';
  return kExitOk;
}

// learn and identify share everything except what gets written.
int cmd_fit(const CommonFlags& f, bool identify) {
  const kt::BenchConfig cfg = load(f);
  const koopgen::SystemSpec spec = cfg.system_spec();
  const auto dict = std::make_shared<const koopgen::Dictionary>(cfg.dictionary.build(spec.dim));
  const double gamma = cfg.gammas.front();
  const koopgen::SnapshotDataset data = kt::make_training_data(cfg, spec, cfg.gamma_count(gamma));
  std::size_t failed = 0;
  for (koopgen::Method m : cfg.methods) {
    kt::CellResult c;
    c.system = cfg.label;
    c.method = m;
    c.gamma = gamma;
    try {
      kt::FittedModel fit = kt::fit_method(cfg, dict, data, m);
      nlohmann::json doc = identify ? koopgen::identified_to_json(fit.system) : fit.model;
      doc["config_hash"] = cfg.hash;
      doc["seed"] = cfg.seed;
      doc["gamma"] = gamma;
      const auto path = std::filesystem::path(f.out) /
                        ((identify ? "identified_" : "model_") + c.cell_name() + ".json");
      koopgen::write_json_atomic(path, doc);
      std::cout << "wrote " << path.string() << '\n';
      if (identify) {
        const auto& terms = doc.at("terms");
        for (std::size_t j = 0; j < terms.size(); ++j) {
          std::cout << "  dx" << (j + 1) << "/dt =";
          for (const auto& [name, w] : terms[j].items()) std::cout << ' ' << w.get<double>() << '*' << name;
          std::cout << '\n';
        }
      }
    } catch (const kt::ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      ++failed;
      std::cerr << koopgen::to_string(m) << ": " << e.what() << '\n';
    }
  }
  return failed == cfg.methods.size() ? kExitAllFailed : kExitOk;
}

int cmd_bench(const CommonFlags& f) {
  const kt::BenchConfig cfg = load(f);
  const kt::BenchResult r = kt::run_bench(cfg, {f.out, f.timing, true});
  print_table(r);
  std::cout << "wrote " << (std::filesystem::path(f.out) / "metrics.csv").string() << '\n';
  return !r.cells.empty() && r.failed() == r.cells.size() ? kExitAllFailed : kExitOk;
}

int cmd_sweep(const CommonFlags& f) {
  const kt::BenchConfig cfg = load(f);
  const auto rows = kt::run_sweep_mu(cfg);
  const auto path = std::filesystem::path(f.out) / "sweep_mu.csv";
  koopgen::write_text_atomic(path, kt::sweep_csv(cfg, rows));
  std::size_t failed = 0;
  for (const auto& r : rows) {
    std::cout << "gamma=" << r.gamma << "  mu=" << r.mu << "  ";
    if (r.rmse_weights) {
      std::cout << "rmse_w=" << *r.rmse_weights << '\n';
    } else {
      ++failed;
      std::cout << r.status << '\n';
    }
  }
  std::cout << "wrote " << path.string() << '\n';
  return failed == rows.size() ? kExitAllFailed : kExitOk;
}

int cmd_zubov(const CommonFlags& f) {
  const kt::BenchConfig cfg = load(f);
  const kt::ZubovRun run = kt::run_zubov(cfg);
  const auto base = std::filesystem::path(f.out) / ("zubov_" + cfg.label);
  koopgen::write_json_atomic(base.string() + ".json", run.summary);
  koopgen::write_text_atomic(base.string() + ".csv", kt::zubov_csv(run));
  std::cout << "equilibrium estimate: " << run.equilibrium.transpose() << '\n'
            << "residual_rms: " << run.solution.residual_rms << '\n'
            << "roa fraction: " << run.mask.fraction() << " (" << run.mask.count() << " of "
            << run.mask.lattice.size() << " lattice points)\n";
  for (const auto& w : run.summary.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
  std::cout << "wrote " << base.string() << ".json and .csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"koopgen: Koopman generator learning, system identification and Zubov RoA"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto* simulate = app.add_subcommand("simulate", "integrate the training trajectories to CSV");
  auto* learn = app.add_subcommand("learn", "learn generators and write model JSON");
  auto* identify = app.add_subcommand("identify", "recover vector-field weights");
  auto* bench = app.add_subcommand("bench", "benchmark table: metrics.csv plus per-cell models");
  auto* sweep = app.add_subcommand("sweep-mu", "RTM weight error across a grid of mu");
  auto* zubov = app.add_subcommand("zubov", "Zubov solve and region-of-attraction lattice");
  for (auto* s : {simulate, learn, identify, sweep, zubov}) add_common(s, flags, false);
  add_common(bench, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(flags);
    if (learn->parsed()) return cmd_fit(flags, false);
    if (identify->parsed()) return cmd_fit(flags, true);
    if (bench->parsed()) return cmd_bench(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (zubov->parsed()) return cmd_zubov(flags);
  } catch (const kt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const koopgen::MissingCoordinate& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitAllFailed;
  }
  return kExitOk;
}
