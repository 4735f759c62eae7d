#include "koopgen/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "koopgen/error.hpp"

namespace koopgen {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  try {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw InvalidArgument("matrix json: data length does not match rows x cols");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)];
    }
    return m;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("matrix json: ") + e.what());
  }
}

json dictionary_to_json(const Dictionary& dict) {
  if (dict.kind() == DictionaryKind::kMonomial) {
    return {{"kind", "monomial"},
            {"dim", dict.dim()},
            {"layout", dict.layout()},
            {"exponents", dict.exponents()}};
  }
  Vector b = dict.bias();
  return {{"kind", "tanh_random"},
          {"dim", dict.dim()},
          {"seed", dict.seed()},
          {"scale_w", dict.scale_w()},
          {"scale_b", dict.scale_b()},
          {"W", matrix_to_json(dict.weights())},
          {"b", std::vector<double>(b.data(), b.data() + b.size())},
          {"slots", dict.slots()}};
}

namespace {

// Rebuilds a monomial dictionary through its factory when the layout names
// one, so labels survive a round trip.
Dictionary monomial_from_layout(int dim, const std::string& layout,
                                std::vector<std::vector<int>> exps) {
  if (layout.rfind("deg<=", 0) == 0) {
    Dictionary d = Dictionary::monomial_total_degree(dim, std::stoi(layout.substr(5)));
    if (d.exponents() == exps) return d;
  } else if (!layout.empty() && layout != "custom") {
    std::vector<int> caps;
    std::stringstream ss(layout);
    std::string part;
    while (std::getline(ss, part, 'x')) caps.push_back(std::stoi(part));
    Dictionary d = Dictionary::monomial_per_axis(caps);
    if (d.exponents() == exps) return d;
  }
  return Dictionary::monomial_from_exponents(dim, std::move(exps));
}

}  // namespace

Dictionary dictionary_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("dictionary json: expected an object");
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const int dim = j.at("dim").get<int>();
    if (kind == "monomial") {
      return monomial_from_layout(dim, j.value("layout", std::string("custom")),
                                  j.at("exponents").get<std::vector<std::vector<int>>>());
    }
    if (kind == "tanh_random") {
      const auto b = j.at("b").get<std::vector<double>>();
      Dictionary d = Dictionary::tanh_from_parts(
          matrix_from_json(j.at("W")), Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size())),
          j.at("slots").get<std::vector<int>>(), j.at("seed").get<std::uint64_t>(),
          j.at("scale_w").get<double>(), j.at("scale_b").get<double>());
      if (d.dim() != dim) throw InvalidArgument("dictionary json: dim does not match W");
      return d;
    }
    throw InvalidArgument("dictionary json: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("dictionary json: ") + e.what());
  }
}

json generator_to_json(const LearnedGenerator& gen) {
  if (!gen.dictionary) throw InvalidArgument("generator json: no dictionary");
  return {{"method", std::string(to_string(gen.method))},
          {"dictionary", dictionary_to_json(*gen.dictionary)},
          {"L", matrix_to_json(gen.L)},
          {"imag_norm", gen.imag_norm},
          {"provenance", gen.provenance},
          {"warnings", gen.warnings}};
}

LearnedGenerator generator_from_json(const json& j) {
  try {
    LearnedGenerator g;
    g.method = method_from_string(j.at("method").get<std::string>());
    g.dictionary = std::make_shared<const Dictionary>(dictionary_from_json(j.at("dictionary")));
    g.L = matrix_from_json(j.at("L"));
    if (g.L.rows() != g.dictionary->size() || g.L.cols() != g.dictionary->size()) {
      throw InvalidArgument("generator json: L does not match the dictionary size");
    }
    g.imag_norm = j.value("imag_norm", 0.0);
    g.provenance = j.value("provenance", json::object());
    g.warnings = j.value("warnings", std::vector<std::string>{});
    return g;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("generator json: ") + e.what());
  }
}

json identified_to_json(const IdentifiedSystem& sys) {
  json terms = json::array();
  for (int j = 0; j < sys.dim(); ++j) {
    json row = json::object();
    for (int i = 0; i < sys.theta.cols(); ++i) {
      if (sys.theta(j, i) != 0.0) row[sys.dictionary->slot_name(i)] = sys.theta(j, i);
    }
    terms.push_back(row);
  }
  return {{"method", std::string(to_string(sys.method))},
          {"dictionary", dictionary_to_json(*sys.dictionary)},
          {"theta", matrix_to_json(sys.theta)},
          {"terms", terms}};
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

std::string json_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace koopgen
