#include "koopgen_tools/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace koopgen::tools {

using nlohmann::json;

namespace {

// 1-based line of the first occurrence of "key" in the source text; 0 when
// the key does not appear (e.g. it came from a preset or a flag).
int key_line(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    const std::string leaf = field.substr(field.rfind('.') + 1);
    const int line = key_line(text_, leaf);
    std::ostringstream os;
    os << origin_;
    if (line > 0) os << ":" << line;
    os << ": field '" << field << "': " << what;
    throw ConfigError(os.str());
  }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
        fail(where.empty() ? k : where + "." + k, "unknown field");
      }
    }
  }

  double number(const json& obj, const std::string& where, const char* key, double fallback,
                bool positive = false) const {
    if (!obj.contains(key)) return fallback;
    const std::string f = join(where, key);
    const json& v = obj.at(key);
    if (!v.is_number()) fail(f, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(f, "must be finite");
    if (positive && !(x > 0.0)) fail(f, "must be positive");
    return x;
  }

  long long integer(const json& obj, const std::string& where, const char* key, long long fallback,
                    long long min_value) const {
    if (!obj.contains(key)) return fallback;
    const std::string f = join(where, key);
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(f, "expected an integer");
    const long long x = v.get<long long>();
    if (x < min_value) fail(f, "must be at least " + std::to_string(min_value));
    return x;
  }

  std::string string(const json& obj, const std::string& where, const char* key,
                     const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) fail(join(where, key), "expected a string");
    return obj.at(key).get<std::string>();
  }

  bool boolean(const json& obj, const std::string& where, const char* key, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) fail(join(where, key), "expected true or false");
    return obj.at(key).get<bool>();
  }

  std::vector<double> numbers(const json& obj, const std::string& where, const char* key) const {
    std::vector<double> out;
    if (!obj.contains(key)) return out;
    const json& v = obj.at(key);
    if (!v.is_array()) fail(join(where, key), "expected an array of numbers");
    for (const auto& e : v) {
      if (!e.is_number()) fail(join(where, key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const json& obj, const std::string& where, const char* key,
                            int min_value) const {
    std::vector<int> out;
    if (!obj.contains(key)) return out;
    const json& v = obj.at(key);
    if (!v.is_array()) fail(join(where, key), "expected an array of integers");
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < min_value) {
        fail(join(where, key), "expected integers >= " + std::to_string(min_value));
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  Box box(const json& obj, const std::string& where, const char* key) const {
    const std::string f = join(where, key);
    const json& v = obj.at(key);
    if (!v.is_array() || v.empty()) fail(f, "expected [[lo, hi], ...]");
    Box b{Vector(static_cast<Eigen::Index>(v.size())), Vector(static_cast<Eigen::Index>(v.size()))};
    for (std::size_t i = 0; i < v.size(); ++i) {
      const json& r = v[i];
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
        fail(f, "expected [[lo, hi], ...]");
      }
      b.lower(static_cast<Eigen::Index>(i)) = r[0].get<double>();
      b.upper(static_cast<Eigen::Index>(i)) = r[1].get<double>();
      if (!(b.lower(static_cast<Eigen::Index>(i)) < b.upper(static_cast<Eigen::Index>(i)))) {
        fail(f, "each interval needs lo < hi");
      }
    }
    return b;
  }

 private:
  static std::string join(const std::string& where, const char* key) {
    return where.empty() ? std::string(key) : where + "." + key;
  }

  const std::string& text_;
  std::string origin_;
};

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto begin = text.begin();
    const int line = 1 + static_cast<int>(std::count(begin, begin + static_cast<long>(upto), '\n'));
    const auto nl = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const std::size_t col = nl == std::string::npos ? upto + 1 : upto - nl;
    std::ostringstream os;
    os << origin << ":" << line << ":" << col << ": malformed JSON";
    throw ConfigError(os.str());
  }
}

DictionarySpec parse_dictionary(const Reader& r, const json& d) {
  r.check_keys(d, "dictionary",
               {"kind", "per_axis", "total_degree", "sigma", "seed", "scale_w", "scale_b", "append"});
  DictionarySpec s;
  s.kind = r.string(d, "dictionary", "kind", "monomial");
  if (s.kind == "monomial") {
    s.per_axis = r.integers(d, "dictionary", "per_axis", 1);
    s.total_degree = static_cast<int>(r.integer(d, "dictionary", "total_degree", -1, 0));
    if (s.per_axis.empty() == (s.total_degree < 0)) {
      r.fail("dictionary", "monomial dictionaries need exactly one of per_axis or total_degree");
    }
  } else if (s.kind == "tanh") {
    s.sigma = static_cast<int>(r.integer(d, "dictionary", "sigma", 0, 1));
    if (s.sigma == 0) r.fail("dictionary.sigma", "required for tanh dictionaries");
    s.seed = static_cast<std::uint64_t>(r.integer(d, "dictionary", "seed", 0, 0));
    s.scale_w = r.number(d, "dictionary", "scale_w", 1.0, true);
    s.scale_b = r.number(d, "dictionary", "scale_b", 1.0);
    if (s.scale_b < 0.0) r.fail("dictionary.scale_b", "must be nonnegative");
    s.append = r.boolean(d, "dictionary", "append", true);
  } else {
    r.fail("dictionary.kind", "expected 'monomial' or 'tanh'");
  }
  return s;
}

ZubovSettings parse_zubov(const Reader& r, const json& z) {
  r.check_keys(z, "zubov",
               {"alpha", "box", "collocation_counts", "exclusion_radius", "boundary_per_axis",
                "weights", "epsilon", "residual_ceiling", "lattice_counts", "newton_start"});
  ZubovSettings s;
  s.alpha = r.number(z, "zubov", "alpha", s.alpha, true);
  if (z.contains("box")) s.box = r.box(z, "zubov", "box");
  s.collocation_counts = r.integers(z, "zubov", "collocation_counts", 2);
  s.exclusion_radius = r.number(z, "zubov", "exclusion_radius", s.exclusion_radius);
  s.boundary_per_axis = static_cast<int>(r.integer(z, "zubov", "boundary_per_axis", 0, 0));
  if (s.boundary_per_axis == 1) r.fail("zubov.boundary_per_axis", "must be 0 or at least 2");
  if (z.contains("weights")) {
    const json& w = z.at("weights");
    r.check_keys(w, "zubov.weights", {"residual", "equilibrium", "boundary"});
    s.weights.residual = r.number(w, "zubov.weights", "residual", s.weights.residual);
    s.weights.equilibrium = r.number(w, "zubov.weights", "equilibrium", s.weights.equilibrium);
    s.weights.boundary = r.number(w, "zubov.weights", "boundary", s.weights.boundary);
  }
  s.epsilon = r.number(z, "zubov", "epsilon", s.epsilon);
  if (!(s.epsilon > 0.0 && s.epsilon < 1.0)) r.fail("zubov.epsilon", "must lie in (0, 1)");
  s.residual_ceiling = r.number(z, "zubov", "residual_ceiling", s.residual_ceiling, true);
  s.lattice_counts = r.integers(z, "zubov", "lattice_counts", 2);
  const auto start = r.numbers(z, "zubov", "newton_start");
  if (!start.empty()) s.newton_start = Eigen::Map<const Vector>(start.data(), static_cast<Eigen::Index>(start.size()));
  return s;
}

json apply_overrides(json doc, const Overrides& o, const Reader& r) {
  std::string preset = doc.value("preset", std::string());
  if (o.preset) preset = *o.preset;
  if (doc.contains("presets")) {
    const json presets = doc.at("presets");
    doc.erase("presets");
    if (!presets.is_object()) r.fail("presets", "expected an object of named presets");
    if (preset.empty() && presets.contains("desk")) preset = "desk";
    if (!preset.empty()) {
      if (!presets.contains(preset)) r.fail("preset", "no preset named '" + preset + "'");
      doc.merge_patch(presets.at(preset));
    }
  } else if (o.preset) {
    r.fail("preset", "config defines no presets");
  }
  doc["preset"] = preset;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.methods) doc["methods"] = *o.methods;
  if (o.gammas) doc["gamma"] = *o.gammas;
  if (o.workers) doc["workers"] = *o.workers;
  return doc;
}

}  // namespace

Dictionary DictionarySpec::build(int dim) const {
  if (kind == "tanh") return Dictionary::tanh_random(dim, sigma, seed, scale_w, scale_b, append);
  if (!per_axis.empty()) {
    if (static_cast<int>(per_axis.size()) != dim) {
      throw ConfigError("dictionary.per_axis has " + std::to_string(per_axis.size()) +
                        " entries but the system has dimension " + std::to_string(dim));
    }
    return Dictionary::monomial_per_axis(per_axis);
  }
  return Dictionary::monomial_total_degree(dim, total_degree);
}

int BenchConfig::gamma_count(double gamma) const {
  const double g = gamma * T;
  const double r = std::round(g);
  if (std::abs(g - r) > 1e-9 * std::max(1.0, g) || r < 1.0) {
    throw ConfigError("gamma * T must be a positive integer (gamma = " + std::to_string(gamma) +
                      ", T = " + std::to_string(T) + ")");
  }
  return static_cast<int>(r);
}

SystemSpec BenchConfig::system_spec() const {
  SystemSpec spec = builtin_system(system, params);
  if (domain) {
    if (domain->dim() != spec.dim) throw ConfigError("domain dimension does not match the system");
    spec.domain = *domain;
  }
  spec.recast_boundary = recast;
  return spec;
}

RtmConfig BenchConfig::rtm_config(int gamma_count) const {
  RtmConfig c;
  c.mu = mu;
  c.lambda = lambda;
  c.T = T;
  c.gamma_count = gamma_count;
  c.delta = delta;
  c.quadrature_mode = quadrature_mode;
  c.workers = workers;
  return c;
}

BenchConfig parse_config(const std::string& text, const std::string& origin,
                         const Overrides& overrides) {
  const Reader r(text, origin);
  const json doc = apply_overrides(parse_json(text, origin), overrides, r);
  r.check_keys(doc, "",
               {"label", "system", "domain", "recast", "dictionary", "M", "gamma", "T", "T_s",
                "Gamma_s", "methods", "rtm", "srtm", "sindy", "eval_trajectories", "seed",
                "workers", "sweep", "zubov", "preset"});

  BenchConfig c;
  c.preset = doc.value("preset", std::string());
  if (!doc.contains("system")) r.fail("system", "required");
  const json& sys = doc.at("system");
  if (sys.is_string()) {
    c.system = sys.get<std::string>();
  } else {
    r.check_keys(sys, "system", {"name", "params"});
    c.system = r.string(sys, "system", "name", "");
    if (sys.contains("params")) {
      const json& p = sys.at("params");
      if (!p.is_object()) r.fail("system.params", "expected an object of numbers");
      for (const auto& [k, v] : p.items()) {
        if (!v.is_number()) r.fail("system.params." + k, "expected a number");
        c.params[k] = v.get<double>();
      }
    }
  }
  const auto names = builtin_system_names();
  if (std::find(names.begin(), names.end(), c.system) == names.end()) {
    r.fail("system.name", "unknown system '" + c.system + "'");
  }
  c.label = r.string(doc, "", "label", c.system);
  if (doc.contains("domain")) c.domain = r.box(doc, "", "domain");
  c.recast = r.boolean(doc, "", "recast", false);

  if (!doc.contains("dictionary")) r.fail("dictionary", "required");
  c.dictionary = parse_dictionary(r, doc.at("dictionary"));

  c.M = static_cast<int>(r.integer(doc, "", "M", c.M, 1));
  if (doc.contains("gamma")) {
    c.gammas = r.numbers(doc, "", "gamma");
    if (c.gammas.empty()) r.fail("gamma", "needs at least one value");
  }
  c.T = r.number(doc, "", "T", c.T, true);
  for (double g : c.gammas) {
    try {
      (void)c.gamma_count(g);
    } catch (const ConfigError& e) {
      r.fail("gamma", e.what());
    }
  }
  c.T_s = r.number(doc, "", "T_s", c.T_s, true);
  c.Gamma_s = static_cast<int>(r.integer(doc, "", "Gamma_s", c.Gamma_s, 1));

  if (doc.contains("methods")) {
    const json& m = doc.at("methods");
    if (!m.is_array() || m.empty()) r.fail("methods", "expected a nonempty array");
    c.methods.clear();
    for (const auto& e : m) {
      if (!e.is_string()) r.fail("methods", "expected method names");
      try {
        const Method method = method_from_string(e.get<std::string>());
        if (std::find(c.methods.begin(), c.methods.end(), method) == c.methods.end()) {
          c.methods.push_back(method);
        }
      } catch (const InvalidArgument&) {
        r.fail("methods", "unknown method '" + e.get<std::string>() + "'");
      }
    }
  }

  if (doc.contains("rtm")) {
    const json& rt = doc.at("rtm");
    r.check_keys(rt, "rtm", {"mu", "lambda", "delta", "quadrature"});
    c.mu = r.number(rt, "rtm", "mu", c.mu, true);
    c.lambda = r.number(rt, "rtm", "lambda", c.lambda, true);
    c.delta = r.number(rt, "rtm", "delta", c.delta);
    if (c.delta < 0.0) r.fail("rtm.delta", "must be nonnegative");
    if (!(c.lambda > c.mu)) r.fail("rtm.lambda", "must exceed rtm.mu");
    if (rt.contains("quadrature")) {
      try {
        c.quadrature_mode = quadrature_mode_from_string(r.string(rt, "rtm", "quadrature", ""));
      } catch (const InvalidArgument& e) {
        r.fail("rtm.quadrature", e.what());
      }
    }
  }
  if (doc.contains("srtm")) {
    const json& s = doc.at("srtm");
    r.check_keys(s, "srtm", {"threshold", "max_iters"});
    c.srtm_threshold = r.number(s, "srtm", "threshold", c.srtm_threshold);
    if (c.srtm_threshold < 0.0) r.fail("srtm.threshold", "must be nonnegative");
    c.srtm_max_iters = static_cast<int>(r.integer(s, "srtm", "max_iters", c.srtm_max_iters, 1));
  }
  if (doc.contains("sindy")) {
    const json& s = doc.at("sindy");
    r.check_keys(s, "sindy", {"threshold", "max_iters", "derivative"});
    c.stlsq.threshold = r.number(s, "sindy", "threshold", c.stlsq.threshold);
    if (c.stlsq.threshold < 0.0) r.fail("sindy.threshold", "must be nonnegative");
    c.stlsq.max_iters = static_cast<int>(r.integer(s, "sindy", "max_iters", c.stlsq.max_iters, 1));
    if (s.contains("derivative")) {
      try {
        c.derivative = derivative_scheme_from_string(r.string(s, "sindy", "derivative", ""));
      } catch (const InvalidArgument& e) {
        r.fail("sindy.derivative", e.what());
      }
    }
  }
  c.eval_trajectories =
      static_cast<int>(r.integer(doc, "", "eval_trajectories", c.eval_trajectories, 1));
  if (doc.contains("seed")) {
    const json& sd = doc.at("seed");
    if (sd.is_number_unsigned()) {
      c.seed = sd.get<std::uint64_t>();
    } else {
      c.seed = static_cast<std::uint64_t>(r.integer(doc, "", "seed", 1, 0));
    }
  }
  c.workers = static_cast<int>(r.integer(doc, "", "workers", 0, 0));
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    r.check_keys(s, "sweep", {"mu"});
    c.sweep_mu = r.numbers(s, "sweep", "mu");
    for (double m : c.sweep_mu) {
      if (!(m > 0.0)) r.fail("sweep.mu", "values must be positive");
    }
  }
  if (doc.contains("zubov")) c.zubov = parse_zubov(r, doc.at("zubov"));

  // Validate the dictionary against the system now so errors surface before any compute.
  try {
    const SystemSpec spec = c.system_spec();
    const Dictionary dict = c.dictionary.build(spec.dim);
    (void)dict;
    if (c.zubov.box && c.zubov.box->dim() != spec.dim) r.fail("zubov.box", "dimension mismatch");
    for (const auto* counts : {&c.zubov.collocation_counts, &c.zubov.lattice_counts}) {
      if (!counts->empty() && static_cast<int>(counts->size()) != spec.dim) {
        r.fail("zubov", "lattice counts need one entry per axis");
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    r.fail("system", e.what());
  }

  c.resolved = doc;
  c.hash = json_hash(doc);
  return c;
}

BenchConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), overrides);
}

}  // namespace koopgen::tools
