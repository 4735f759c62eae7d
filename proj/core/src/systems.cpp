#include "koopgen/systems.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "koopgen/error.hpp"
#include "koopgen/random.hpp"

namespace koopgen {

Box Box::cube(int dim, double lo, double hi) {
  return Box{Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
}

bool Box::contains(std::span<const double> x, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (x[static_cast<std::size_t>(i)] < lower(i) - tol ||
        x[static_cast<std::size_t>(i)] > upper(i) + tol) {
      return false;
    }
  }
  return true;
}

double recast_cutoff(const Box& domain, std::span<const double> x) {
  constexpr double kMargin = 0.05;
  double s = 1.0;
  for (int i = 0; i < domain.dim(); ++i) {
    const double half = 0.5 * (domain.upper(i) - domain.lower(i));
    const double c = 0.5 * (domain.upper(i) + domain.lower(i));
    const double r = std::abs(x[static_cast<std::size_t>(i)] - c) / half;
    const double u = std::clamp((1.0 - r) / kMargin, 0.0, 1.0);
    s *= u * u * (3.0 - 2.0 * u);
  }
  return s;
}

void SystemSpec::evaluate(std::span<const double> x, std::span<double> out) const {
  field(x, out);
  if (recast_boundary) {
    const double s = recast_cutoff(domain, x);
    for (double& v : out) v *= s;
  }
}

Vector SystemSpec::evaluate(const Vector& x) const {
  Vector out(dim);
  evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(dim)),
           std::span<double>(out.data(), static_cast<std::size_t>(dim)));
  return out;
}

VectorField SystemSpec::effective_field() const {
  if (!recast_boundary) return field;
  return [f = field, box = domain](std::span<const double> x, std::span<double> out) {
    f(x, out);
    const double s = recast_cutoff(box, x);
    for (double& v : out) v *= s;
  };
}

namespace {

// Validates user params against the builtin's defaults and merges them.
Params merge_params(std::string_view name, const Params& defaults, const Params& user) {
  Params merged = defaults;
  for (const auto& [key, value] : user) {
    auto it = merged.find(key);
    if (it == merged.end()) {
      throw InvalidArgument("system '" + std::string(name) + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) {
      throw InvalidArgument("system '" + std::string(name) + "': parameter '" + key +
                            "' is not finite");
    }
    it->second = value;
  }
  return merged;
}

int integer_param(std::string_view name, const Params& p, const std::string& key, int min) {
  const double v = p.at(key);
  if (v != std::floor(v) || v < min) {
    throw InvalidArgument("system '" + std::string(name) + "': parameter '" + key +
                          "' must be an integer >= " + std::to_string(min));
  }
  return static_cast<int>(v);
}

std::vector<int> unit_exponent(int dim, std::initializer_list<int> axes) {
  std::vector<int> e(static_cast<std::size_t>(dim), 0);
  for (int a : axes) e[static_cast<std::size_t>(a)] += 1;
  return e;
}

SystemSpec make_vdp(const Params& user) {
  SystemSpec s;
  s.name = "vdp";
  s.dim = 2;
  s.params = merge_params(s.name, {}, user);
  // Reversed Van der Pol oscillator.
  s.field = [](std::span<const double> x, std::span<double> dx) {
    dx[0] = -x[1];
    dx[1] = x[0] - (1.0 - x[0] * x[0]) * x[1];
  };
  s.domain = Box::cube(2, -1.0, 1.0);
  s.lipschitz_estimate = 4.0;
  s.polynomial_terms = {
      {0, -1.0, {0, 1}},
      {1, 1.0, {1, 0}},
      {1, -1.0, {0, 1}},
      {1, 1.0, {2, 1}},
  };
  return s;
}

SystemSpec make_lorenz63_scaled(const Params& user) {
  SystemSpec s;
  s.name = "lorenz63_scaled";
  s.dim = 3;
  s.params = merge_params(s.name,
                          {{"sigma", 10.0}, {"gamma", 0.28}, {"beta", 8.0 / 3.0}, {"eps", 0.1}},
                          user);
  const double sigma = s.params["sigma"], gamma = s.params["gamma"], beta = s.params["beta"],
               eps = s.params["eps"];
  if (eps <= 0.0) throw InvalidArgument("lorenz63_scaled: eps must be positive");
  s.field = [=](std::span<const double> x, std::span<double> dx) {
    dx[0] = sigma * (x[1] - eps * x[0]);
    dx[1] = x[0] * (gamma - x[2]) - eps * x[1];
    dx[2] = x[0] * x[1] - eps * beta * x[2];
  };
  s.domain = Box::cube(3, -1.0, 1.0);
  s.lipschitz_estimate = 10.5;
  s.polynomial_terms = {
      {0, sigma, {0, 1, 0}},  {0, -sigma * eps, {1, 0, 0}},
      {1, gamma, {1, 0, 0}},  {1, -1.0, {1, 0, 1}},
      {1, -eps, {0, 1, 0}},   {2, 1.0, {1, 1, 0}},
      {2, -eps * beta, {0, 0, 1}},
  };
  return s;
}

SystemSpec make_lorenz96(const Params& user) {
  SystemSpec s;
  s.name = "lorenz96";
  s.params = merge_params(s.name, {{"dim", 6.0}, {"forcing", 0.1}}, user);
  const int d = integer_param(s.name, s.params, "dim", 4);
  const double forcing = s.params["forcing"];
  s.dim = d;
  s.field = [d, forcing](std::span<const double> x, std::span<double> dx) {
    auto at = [&](int j) { return x[static_cast<std::size_t>(((j % d) + d) % d)]; };
    for (int j = 0; j < d; ++j) {
      dx[static_cast<std::size_t>(j)] =
          (at(j + 1) - at(j - 2)) * at(j - 1) - at(j) + forcing;
    }
  };
  s.domain = Box::cube(d, -1.0, 1.0);
  s.lipschitz_estimate = 5.0;
  auto wrap = [d](int j) { return ((j % d) + d) % d; };
  for (int j = 0; j < d; ++j) {
    s.polynomial_terms.push_back({j, -1.0, unit_exponent(d, {wrap(j - 2), wrap(j - 1)})});
    s.polynomial_terms.push_back({j, 1.0, unit_exponent(d, {wrap(j - 1), wrap(j + 1)})});
    s.polynomial_terms.push_back({j, -1.0, unit_exponent(d, {j})});
    if (forcing != 0.0) s.polynomial_terms.push_back({j, forcing, unit_exponent(d, {})});
  }
  return s;
}

SystemSpec make_yeast7(const Params& user) {
  SystemSpec s;
  s.name = "yeast7";
  s.dim = 7;
  s.params = merge_params(s.name,
                          {{"k_ex", 0.5},
                           {"G_ex", 0.5},
                           {"k1", 100.0},
                           {"k2", 6.0},
                           {"k3", 16.0},
                           {"k4", 100.0},
                           {"k5", 1.28},
                           {"k6", 12.0},
                           {"k", 1.8},
                           {"kappa", 13.0},
                           {"q", 4.0},
                           {"K1", 0.52},
                           {"psi", 0.1},
                           {"N", 1.0},
                           {"A", 4.0}},
                          user);
  const Params p = s.params;
  const double kex = p.at("k_ex"), gex = p.at("G_ex"), k1 = p.at("k1"), k2 = p.at("k2"),
               k3 = p.at("k3"), k4 = p.at("k4"), k5 = p.at("k5"), k6 = p.at("k6"), k = p.at("k"),
               kappa = p.at("kappa"), q = p.at("q"), big_k1 = p.at("K1"), psi = p.at("psi"),
               n_tot = p.at("N"), a_tot = p.at("A");
  s.field = [=](std::span<const double> x, std::span<double> dx) {
    const double s1 = x[0], s2 = x[1], s3 = x[2], s4 = x[3], s5 = x[4], s6 = x[5], s7 = x[6];
    // Denominator >= 1 for S6 >= 0; pow of a negative base with integer q stays real.
    const double v1 = k1 * s1 * s6 / (1.0 + std::pow(s6 / big_k1, q));
    const double v2 = k2 * s2 * (n_tot - s5);
    const double v3 = k3 * s3 * (a_tot - s6);
    dx[0] = kex * (gex - s1) - v1;
    dx[1] = 2.0 * v1 - v2 - k6 * s2 * s5;
    dx[2] = v2 - v3;
    dx[3] = v3 - k4 * s4 * s5 - kappa * (s4 - s7);
    dx[4] = v2 - k4 * s4 * s5 - k6 * s2 * s5;
    dx[5] = -2.0 * v1 + 2.0 * k2 * s3 * (a_tot - s6) - k5 * s6;
    dx[6] = psi * kappa * (s4 - s7) - k * s7;
  };
  s.domain = Box::cube(7, 0.0, 0.5);
  s.lipschitz_estimate = 300.0;
  return s;
}

SystemSpec make_rational2d(const Params& user) {
  SystemSpec s;
  s.name = "rational2d";
  s.dim = 2;
  s.params = merge_params(s.name, {}, user);
  s.field = [](std::span<const double> x, std::span<double> dx) {
    const double den = 1.0 + x[1] * x[1];
    dx[0] = -x[0] + 4.0 * x[1] / den;
    dx[1] = -x[1] - 4.0 * x[0] / den;
  };
  s.domain = Box::cube(2, -1.0, 1.0);
  s.lipschitz_estimate = 6.5;
  return s;
}

SystemSpec make_two_machine(const Params& user) {
  SystemSpec s;
  s.name = "two_machine";
  s.dim = 2;
  s.params = merge_params(s.name, {{"damping", 0.5}, {"delta", std::numbers::pi / 3.0}}, user);
  const double damping = s.params["damping"], delta = s.params["delta"];
  s.field = [=](std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = -damping * x[1] - (std::sin(x[0] + delta) - std::sin(delta));
  };
  s.domain = Box::cube(2, -1.0, 1.0);
  s.lipschitz_estimate = 1.5;
  return s;
}

SystemSpec make_cubic1d(const Params& user) {
  SystemSpec s;
  s.name = "cubic1d";
  s.dim = 1;
  s.params = merge_params(s.name, {}, user);
  s.field = [](std::span<const double> x, std::span<double> dx) { dx[0] = -x[0] * x[0] * x[0]; };
  s.domain = Box::cube(1, -1.0, 1.0);
  s.lipschitz_estimate = 3.0;
  s.polynomial_terms = {{0, -1.0, {3}}};
  s.exact_flow = [](double t, std::span<const double> x0, std::span<double> out) {
    out[0] = x0[0] / std::sqrt(1.0 + 2.0 * t * x0[0] * x0[0]);
  };
  return s;
}

SystemSpec make_linear(const Params& user) {
  SystemSpec s;
  s.name = "linear";
  s.params = merge_params(s.name, {{"a", -1.0}, {"dim", 1.0}}, user);
  const int d = integer_param(s.name, s.params, "dim", 1);
  const double a = s.params["a"];
  s.dim = d;
  s.field = [a](std::span<const double> x, std::span<double> dx) {
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = a * x[i];
  };
  s.domain = Box::cube(d, -1.0, 1.0);
  s.lipschitz_estimate = std::abs(a);
  for (int j = 0; j < d; ++j) s.polynomial_terms.push_back({j, a, unit_exponent(d, {j})});
  s.exact_flow = [a](double t, std::span<const double> x0, std::span<double> out) {
    const double g = std::exp(a * t);
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = g * x0[i];
  };
  return s;
}

}  // namespace

std::vector<std::string> builtin_system_names() {
  return {"vdp",         "lorenz63_scaled", "lorenz96", "yeast7",
          "rational2d",  "two_machine",     "cubic1d",  "linear"};
}

SystemSpec builtin_system(std::string_view name, const Params& params) {
  if (name == "vdp") return make_vdp(params);
  if (name == "lorenz63_scaled") return make_lorenz63_scaled(params);
  if (name == "lorenz96") return make_lorenz96(params);
  if (name == "yeast7") return make_yeast7(params);
  if (name == "rational2d") return make_rational2d(params);
  if (name == "two_machine") return make_two_machine(params);
  if (name == "cubic1d") return make_cubic1d(params);
  if (name == "linear") return make_linear(params);
  throw InvalidArgument("unknown system '" + std::string(name) + "'");
}

Trajectory integrate(const SystemSpec& spec, std::span<const double> x0,
                     std::span<const double> request_times, const IntegratorOptions& opts) {
  if (static_cast<int>(x0.size()) != spec.dim) {
    throw ShapeMismatch("integrate: initial state has " + std::to_string(x0.size()) +
                        " entries, system dimension is " + std::to_string(spec.dim));
  }
  const Box box = spec.domain;
  auto inside = [box](std::span<const double> x) { return box.contains(x, 1e-12); };
  OdeSolution sol = integrate_dopri5(spec.effective_field(), x0, request_times, opts, inside);

  Trajectory traj;
  traj.initial = Eigen::Map<const Vector>(x0.data(), spec.dim);
  traj.times = std::move(sol.times);
  traj.states = std::move(sol.states);
  traj.status = sol.status;
  traj.domain_exit = sol.left_region && !spec.recast_boundary;
  if (traj.domain_exit) traj.warnings.emplace_back("state left the closure of the domain");
  return traj;
}

Matrix sample_initial_conditions(const Box& domain, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const int d = domain.dim();
  Matrix out(static_cast<Eigen::Index>(count), d);
  for (Eigen::Index m = 0; m < out.rows(); ++m) {
    for (int i = 0; i < d; ++i) out(m, i) = rng.uniform(domain.lower(i), domain.upper(i));
  }
  return out;
}

SystemSpec recast_field(const SystemSpec& spec) {
  for (int i = 0; i < spec.domain.dim(); ++i) {
    if (!std::isfinite(spec.domain.lower(i)) || !std::isfinite(spec.domain.upper(i)) ||
        spec.domain.upper(i) <= spec.domain.lower(i)) {
      throw InvalidArgument("recast_field: domain must be a bounded nonempty box");
    }
  }
  SystemSpec out = spec;
  out.recast_boundary = true;
  out.exact_flow = nullptr;
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (int j = 0; j < traj.dim(); ++j) os << ",x" << (j + 1);
  os << '\n';
  os << std::setprecision(17);
  for (Eigen::Index k = 0; k < traj.states.rows(); ++k) {
    os << traj.times[static_cast<std::size_t>(k)];
    for (int j = 0; j < traj.dim(); ++j) os << ',' << traj.states(k, j);
    os << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("trajectory CSV: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "t") {
    throw InvalidArgument("trajectory CSV: header must be t,x1,...,xd");
  }
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw InvalidArgument("trajectory CSV: unexpected column '" + header[j] + "'");
    }
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  std::vector<double> times;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw InvalidArgument("trajectory CSV line " + std::to_string(lineno) +
                              ": bad number '" + cell + "'");
      }
    }
    if (static_cast<Eigen::Index>(row.size()) != d + 1) {
      throw InvalidArgument("trajectory CSV line " + std::to_string(lineno) +
                            ": expected " + std::to_string(d + 1) + " fields");
    }
    if (!times.empty() && row[0] < times.back()) {
      throw InvalidArgument("trajectory CSV line " + std::to_string(lineno) +
                            ": times must be ascending");
    }
    times.push_back(row[0]);
    values.insert(values.end(), row.begin() + 1, row.end());
  }
  if (times.empty()) throw InvalidArgument("trajectory CSV: no data rows");
  Trajectory traj;
  traj.times = std::move(times);
  traj.states = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(traj.times.size()), d);
  traj.initial = traj.states.row(0).transpose();
  return traj;
}

}  // namespace koopgen
