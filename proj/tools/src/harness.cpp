#include "koopgen_tools/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace koopgen::tools {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

std::string num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// CSV-safe single-line status text.
std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
  }
  return s;
}

std::optional<double> provenance_number(const LearnedGenerator& g, const char* key) {
  if (g.provenance.contains(key) && g.provenance.at(key).is_number()) {
    return g.provenance.at(key).get<double>();
  }
  return std::nullopt;
}

std::optional<Matrix> maybe_true_weights(const SystemSpec& spec, const Dictionary& dict) {
  try {
    return true_weights(spec, dict);
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

bool needs_coordinates(Method m) { return m != Method::kSindy; }

std::vector<double> uniform_times(double horizon, int count) {
  std::vector<double> t(static_cast<std::size_t>(count) + 1);
  for (int k = 0; k <= count; ++k) t[static_cast<std::size_t>(k)] = horizon * k / count;
  return t;
}

}  // namespace

std::string CellResult::cell_name() const {
  std::string m(to_string(method));
  for (char& c : m) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return system + "_" + m + "_g" + short_num(gamma);
}

std::size_t BenchResult::failed() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.ok() ? 0 : 1;
  return n;
}

EvaluationSet make_evaluation_set(const BenchConfig& cfg, const SystemSpec& spec) {
  EvaluationSet e;
  e.initial = sample_initial_conditions(spec.domain, static_cast<std::size_t>(cfg.eval_trajectories),
                                        derive_seed(cfg.seed, kEvalStream));
  const auto times = uniform_times(cfg.T_s, cfg.Gamma_s);
  e.truth.resize(static_cast<std::size_t>(cfg.eval_trajectories));
  const bool exact = spec.exact_flow && !spec.recast_boundary;
  parallel_for(cfg.eval_trajectories, cfg.workers, [&](int m) {
    const Vector x0 = e.initial.row(m).transpose();
    Trajectory tr;
    if (exact) {
      tr.initial = x0;
      tr.times = times;
      tr.states.resize(static_cast<Eigen::Index>(times.size()), spec.dim);
      Vector out(spec.dim);
      for (std::size_t k = 0; k < times.size(); ++k) {
        spec.exact_flow(times[k], {x0.data(), static_cast<std::size_t>(spec.dim)},
                        {out.data(), static_cast<std::size_t>(spec.dim)});
        tr.states.row(static_cast<Eigen::Index>(k)) = out.transpose();
      }
    } else {
      tr = integrate(spec, {x0.data(), static_cast<std::size_t>(spec.dim)}, times);
    }
    if (tr.status != TrajectoryStatus::kOk) {
      throw NumericalFailure("evaluation trajectory " + std::to_string(m) + " did not complete");
    }
    e.truth[static_cast<std::size_t>(m)] = std::move(tr);
  });
  return e;
}

SnapshotDataset make_training_data(const BenchConfig& cfg, const SystemSpec& spec,
                                   int gamma_count) {
  const Matrix x0 = sample_initial_conditions(spec.domain, static_cast<std::size_t>(cfg.M),
                                              derive_seed(cfg.seed, kTrainStream));
  DatasetOptions opts;
  opts.workers = cfg.workers;
  return generate_dataset(spec, x0, cfg.T, gamma_count, opts);
}

FittedModel fit_method(const BenchConfig& cfg, const std::shared_ptr<const Dictionary>& dict,
                       const SnapshotDataset& data, Method method) {
  FittedModel f;
  switch (method) {
    case Method::kRtm: {
      const LearnedGenerator g = learn(data, dict, cfg.rtm_config(data.gamma_count));
      f.system = recover_field(g);
      f.cond_A = provenance_number(g, "cond_A");
      f.cond_D = provenance_number(g, "cond_D");
      f.model = generator_to_json(g);
      break;
    }
    case Method::kSrtm: {
      // 80/20 split: learn on the head, threshold against the tail.
      const int n_train =
          data.size() >= 5 ? static_cast<int>(std::lround(0.8 * data.size())) : data.size();
      std::vector<int> head(static_cast<std::size_t>(n_train)), tail;
      for (int i = 0; i < n_train; ++i) head[static_cast<std::size_t>(i)] = i;
      for (int i = n_train; i < data.size(); ++i) tail.push_back(i);
      const SnapshotDataset train = subset(data, head);
      const SnapshotDataset validation = tail.empty() ? data : subset(data, tail);
      const LearnedGenerator g = learn(train, dict, cfg.rtm_config(data.gamma_count));
      f.system = srtm_sparsify(g, validation, cfg.srtm_threshold, cfg.srtm_max_iters);
      f.cond_A = provenance_number(g, "cond_A");
      f.cond_D = provenance_number(g, "cond_D");
      f.model = identified_to_json(f.system);
      break;
    }
    case Method::kFdm:
    case Method::kKlm: {
      const KoopmanMatrix km = edmd_from_dataset(data, dict);
      const LearnedGenerator g = method == Method::kFdm ? fdm_learn(km) : klm_learn(km);
      f.imag_norm = g.imag_norm;
      f.system = recover_field(g);
      f.model = generator_to_json(g);
      break;
    }
    case Method::kSindy:
      f.system = sindy_from_dataset(data, dict, cfg.stlsq, cfg.derivative);
      f.model = identified_to_json(f.system);
      break;
  }
  return f;
}

CellResult run_cell(const BenchConfig& cfg, const SystemSpec& spec,
                    const std::shared_ptr<const Dictionary>& dict, const SnapshotDataset& data,
                    const EvaluationSet& eval, double gamma, Method method) {
  CellResult c;
  c.system = cfg.label;
  c.method = method;
  c.gamma = gamma;
  c.gamma_count = data.gamma_count;
  c.M = data.size();
  c.N = dict->size();
  const auto start = std::chrono::steady_clock::now();
  try {
    FittedModel f = fit_method(cfg, dict, data, method);
    const IdentifiedSystem& sys = f.system;
    c.cond_A = f.cond_A;
    c.cond_D = f.cond_D;
    c.imag_norm = f.imag_norm;
    c.model = std::move(f.model);
    if (const auto truth = maybe_true_weights(spec, *dict)) c.rmse_weights = rmse_weights(sys.theta, *truth);

    std::vector<Trajectory> predicted(eval.truth.size());
    parallel_for(static_cast<int>(eval.truth.size()), cfg.workers, [&](int m) {
      predicted[static_cast<std::size_t>(m)] =
          predict_flow(sys, eval.initial.row(m).transpose(), cfg.T_s, cfg.Gamma_s);
    });
    const FlowMetrics fm = evaluate_flow(eval.truth, predicted);
    c.rmse_flow = fm.rmse_flow;
    c.blowups = fm.blowups;
    c.model["metrics"] = {{"rmse_weights", c.rmse_weights ? json(*c.rmse_weights) : json()},
                          {"rmse_flow", fm.rmse_flow},
                          {"blowups", fm.blowups},
                          {"horizon", fm.horizon},
                          {"snapshot_count", fm.snapshot_count}};
  } catch (const std::exception& e) {
    c.status = sanitize(std::string("failed: ") + e.what());
    c.model = json();
  }
  c.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return c;
}

BenchResult run_bench(const BenchConfig& cfg, const RunOptions& opts) {
  const SystemSpec spec = cfg.system_spec();
  const auto dict = std::make_shared<const Dictionary>(cfg.dictionary.build(spec.dim));
  for (Method m : cfg.methods) {
    if (needs_coordinates(m) && !dict->has_all_coordinates()) {
      throw ConfigError("dictionary lacks coordinate observables required by " +
                        std::string(to_string(m)));
    }
  }
  const EvaluationSet eval = make_evaluation_set(cfg, spec);

  BenchResult result;
  for (double gamma : cfg.gammas) {
    const int gc = cfg.gamma_count(gamma);
    std::optional<SnapshotDataset> data;
    std::string data_error;
    try {
      data = make_training_data(cfg, spec, gc);
    } catch (const std::exception& e) {
      data_error = sanitize(std::string("failed: ") + e.what());
    }
    for (Method m : cfg.methods) {
      CellResult c;
      if (data) {
        c = run_cell(cfg, spec, dict, *data, eval, gamma, m);
      } else {
        c.system = cfg.label;
        c.method = m;
        c.gamma = gamma;
        c.gamma_count = gc;
        c.M = cfg.M;
        c.N = dict->size();
        c.status = data_error;
      }
      if (!opts.out_dir.empty() && opts.write_models && c.ok()) {
        json model = c.model;
        model["config_hash"] = cfg.hash;
        model["seed"] = cfg.seed;
        model["gamma"] = gamma;
        write_json_atomic(opts.out_dir / ("model_" + c.cell_name() + ".json"), model);
      }
      result.cells.push_back(std::move(c));
    }
  }
  if (!opts.out_dir.empty()) {
    write_text_atomic(opts.out_dir / "metrics.csv", metrics_csv(cfg, result, opts.timing));
  }
  return result;
}

std::string metrics_csv(const BenchConfig& cfg, const BenchResult& result, bool timing) {
  std::ostringstream os;
  os << "system,method,gamma,M,N,rmse_weights,rmse_flow,imag_norm,blowups,cond_A,wall_ms,"
        "cond_D,status,config_hash,seed\n";
  for (const auto& c : result.cells) {
    os << c.system << ',' << to_string(c.method) << ',' << short_num(c.gamma) << ',' << c.M << ','
       << c.N << ',' << num(c.rmse_weights) << ',' << num(c.rmse_flow) << ','
       << num(c.imag_norm) << ',' << c.blowups << ',' << num(c.cond_A) << ','
       << (timing ? num(c.wall_ms) : std::string()) << ',' << num(c.cond_D) << ',' << c.status
       << ',' << cfg.hash << ',' << cfg.seed << '\n';
  }
  return os.str();
}

std::vector<SweepRow> run_sweep_mu(const BenchConfig& cfg) {
  if (cfg.sweep_mu.empty()) throw ConfigError("sweep.mu must list at least one value");
  const SystemSpec spec = cfg.system_spec();
  const auto dict = std::make_shared<const Dictionary>(cfg.dictionary.build(spec.dim));
  if (!dict->has_all_coordinates()) {
    throw ConfigError("dictionary lacks coordinate observables required by RTM");
  }
  const auto truth = maybe_true_weights(spec, *dict);
  if (!truth) {
    throw ConfigError("sweep-mu scores weight RMSE and needs a polynomial system covered by "
                      "the dictionary");
  }
  std::vector<SweepRow> rows;
  for (double gamma : cfg.gammas) {
    const int gc = cfg.gamma_count(gamma);
    std::optional<SnapshotDataset> data;
    std::string data_error;
    try {
      data = make_training_data(cfg, spec, gc);
    } catch (const std::exception& e) {
      data_error = sanitize(std::string("failed: ") + e.what());
    }
    for (double mu : cfg.sweep_mu) {
      SweepRow r;
      r.gamma = gamma;
      r.mu = mu;
      if (!data) {
        r.status = data_error;
        rows.push_back(r);
        continue;
      }
      try {
        RtmConfig rc = cfg.rtm_config(gc);
        rc.mu = mu;
        const LearnedGenerator g = learn(*data, dict, rc);
        r.rmse_weights = rmse_weights(recover_field(g).theta, *truth);
        r.cond_A = provenance_number(g, "cond_A");
      } catch (const std::exception& e) {
        r.status = sanitize(std::string("failed: ") + e.what());
      }
      rows.push_back(r);
    }
  }
  return rows;
}

std::string sweep_csv(const BenchConfig& cfg, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "gamma,mu,rmse_weights,cond_A,status,config_hash,seed\n";
  for (const auto& r : rows) {
    os << short_num(r.gamma) << ',' << short_num(r.mu) << ',' << num(r.rmse_weights) << ','
       << num(r.cond_A) << ',' << r.status << ',' << cfg.hash << ',' << cfg.seed << '\n';
  }
  return os.str();
}

ZubovRun run_zubov(const BenchConfig& cfg) {
  const SystemSpec spec = cfg.system_spec();
  const auto dict = std::make_shared<const Dictionary>(cfg.dictionary.build(spec.dim));
  if (!dict->has_all_coordinates()) {
    throw ConfigError("zubov needs every coordinate x_j in the dictionary to locate the equilibrium");
  }
  const ZubovSettings& z = cfg.zubov;
  const Box box = z.box ? *z.box : spec.domain;
  const std::vector<int> colloc =
      z.collocation_counts.empty() ? std::vector<int>(static_cast<std::size_t>(spec.dim), 41)
                                   : z.collocation_counts;
  const std::vector<int> lattice =
      z.lattice_counts.empty() ? std::vector<int>(static_cast<std::size_t>(spec.dim), 101)
                               : z.lattice_counts;

  const double gamma = cfg.gammas.front();
  const SnapshotDataset data = make_training_data(cfg, spec, cfg.gamma_count(gamma));
  const LearnedGenerator gen = learn(data, dict, cfg.rtm_config(data.gamma_count));
  const IdentifiedSystem sys = recover_field(gen);

  ZubovRun run;
  const Vector start = z.newton_start ? *z.newton_start : Vector::Zero(spec.dim);
  if (start.size() != spec.dim) throw ConfigError("zubov.newton_start has the wrong dimension");
  run.equilibrium = find_equilibrium(sys, start);
  if (!box.contains({run.equilibrium.data(), static_cast<std::size_t>(spec.dim)})) {
    throw NumericalFailure("equilibrium estimate lies outside the Zubov box");
  }

  ZubovProblem prob;
  prob.alpha = z.alpha;
  prob.equilibrium = run.equilibrium;
  prob.collocation = lattice_collocation(box, colloc, run.equilibrium, z.exclusion_radius);
  if (z.boundary_per_axis > 0) prob.boundary = box_boundary_points(box, z.boundary_per_axis);
  prob.weights = z.weights;
  prob.epsilon = z.epsilon;
  prob.residual_ceiling = z.residual_ceiling;
  run.solution = zubov_solve(gen, prob);
  run.mask = roa_extract(run.solution, *dict, Lattice{box, lattice}, run.equilibrium, z.epsilon);

  std::vector<Eigen::Index> away;
  for (std::size_t i = 0; i < run.mask.inside.size(); ++i) {
    if (run.mask.inside[i] &&
        (run.mask.lattice.point(i) - run.equilibrium).norm() > z.exclusion_radius) {
      away.push_back(static_cast<Eigen::Index>(i));
    }
  }
  if (!away.empty()) {
    Matrix pts(static_cast<Eigen::Index>(away.size()), spec.dim);
    for (std::size_t i = 0; i < away.size(); ++i) {
      pts.row(static_cast<Eigen::Index>(i)) =
          run.mask.lattice.point(static_cast<std::size_t>(away[i])).transpose();
    }
    run.lie_max = lie_derivative_check(gen, run.solution.theta, pts);
  }

  std::vector<std::string> warnings = gen.warnings;
  warnings.insert(warnings.end(), run.solution.warnings.begin(), run.solution.warnings.end());
  const Vector& th = run.solution.theta;
  run.summary = {
      {"system", cfg.label},
      {"equilibrium", std::vector<double>(run.equilibrium.data(),
                                          run.equilibrium.data() + run.equilibrium.size())},
      {"u_at_equilibrium", run.solution.u_at_equilibrium},
      {"residual_rms", run.solution.residual_rms},
      {"level", run.solution.level},
      {"alpha", z.alpha},
      {"epsilon", z.epsilon},
      {"collocation_points", prob.collocation.rows()},
      {"boundary_points", prob.boundary.rows()},
      {"lattice_points", run.mask.lattice.size()},
      {"roa_points", run.mask.count()},
      {"roa_fraction", run.mask.fraction()},
      {"lie_derivative_max", run.lie_max},
      {"theta", std::vector<double>(th.data(), th.data() + th.size())},
      {"dictionary", dictionary_to_json(*dict)},
      {"generator_provenance", gen.provenance},
      {"warnings", warnings},
      {"config_hash", cfg.hash},
      {"seed", cfg.seed}};
  return run;
}

std::string zubov_csv(const ZubovRun& run) {
  std::ostringstream os;
  const int d = run.mask.lattice.box.dim();
  for (int j = 0; j < d; ++j) os << 'x' << (j + 1) << ',';
  os << "u,inside\n";
  for (std::size_t i = 0; i < run.mask.inside.size(); ++i) {
    const Vector p = run.mask.lattice.point(i);
    for (int j = 0; j < d; ++j) os << num(p(j)) << ',';
    os << num(run.mask.u(static_cast<Eigen::Index>(i))) << ',' << int(run.mask.inside[i]) << '\n';
  }
  return os.str();
}

std::string simulate_csv(const BenchConfig& cfg) {
  const SystemSpec spec = cfg.system_spec();
  const SnapshotDataset data = make_training_data(cfg, spec, cfg.gamma_count(cfg.gammas.front()));
  std::ostringstream os;
  os << "trajectory,t";
  for (int j = 0; j < spec.dim; ++j) os << ",x" << (j + 1);
  os << '\n';
  for (int m = 0; m < data.size(); ++m) {
    const Matrix& s = data.uniform_states[static_cast<std::size_t>(m)];
    for (Eigen::Index k = 0; k < s.rows(); ++k) {
      os << m << ',' << num(data.uniform_times[static_cast<std::size_t>(k)]);
      for (int j = 0; j < spec.dim; ++j) os << ',' << num(s(k, j));
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace koopgen::tools
