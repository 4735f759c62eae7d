#include "koopgen/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "koopgen/error.hpp"
#include "koopgen/random.hpp"

namespace koopgen {

namespace {

// All exponent vectors of total degree exactly `deg` on `dim` axes, in
// descending lexicographic order.
void degree_shell(int dim, int deg, std::vector<int>& cur, int axis,
                  std::vector<std::vector<int>>& out) {
  if (axis == dim - 1) {
    cur[static_cast<std::size_t>(axis)] = deg;
    out.push_back(cur);
    return;
  }
  for (int e = deg; e >= 0; --e) {
    cur[static_cast<std::size_t>(axis)] = e;
    degree_shell(dim, deg - e, cur, axis + 1, out);
  }
}

}  // namespace

Dictionary Dictionary::monomial_per_axis(std::vector<int> caps) {
  if (caps.empty()) throw InvalidArgument("monomial dictionary: need at least one axis");
  for (int c : caps) {
    if (c < 1) throw InvalidArgument("monomial dictionary: per-axis caps must be >= 1");
  }
  const int dim = static_cast<int>(caps.size());
  std::size_t total = 1;
  for (int c : caps) total *= static_cast<std::size_t>(c);
  std::vector<std::vector<int>> exps;
  exps.reserve(total);
  std::vector<int> cur(caps.size(), 0);
  for (std::size_t i = 0; i < total; ++i) {
    exps.push_back(cur);
    for (std::size_t a = 0; a < caps.size(); ++a) {
      if (++cur[a] < caps[a]) break;
      cur[a] = 0;
    }
  }
  Dictionary d = monomial_from_exponents(dim, std::move(exps));
  d.layout_ = "";
  for (std::size_t a = 0; a < caps.size(); ++a) {
    d.layout_ += (a ? "x" : "") + std::to_string(caps[a]);
  }
  return d;
}

Dictionary Dictionary::monomial_total_degree(int dim, int max_degree) {
  if (dim < 1) throw InvalidArgument("monomial dictionary: dim must be >= 1");
  if (max_degree < 0) throw InvalidArgument("monomial dictionary: degree cap must be >= 0");
  std::vector<std::vector<int>> exps;
  std::vector<int> cur(static_cast<std::size_t>(dim), 0);
  for (int deg = 0; deg <= max_degree; ++deg) degree_shell(dim, deg, cur, 0, exps);
  Dictionary d = monomial_from_exponents(dim, std::move(exps));
  d.layout_ = "deg<=" + std::to_string(max_degree);
  return d;
}

Dictionary Dictionary::monomial_from_exponents(int dim, std::vector<std::vector<int>> exponents) {
  if (dim < 1) throw InvalidArgument("monomial dictionary: dim must be >= 1");
  if (exponents.empty()) throw InvalidArgument("monomial dictionary: empty exponent list");
  std::set<std::vector<int>> seen;
  Dictionary d;
  d.kind_ = DictionaryKind::kMonomial;
  d.dim_ = dim;
  d.max_power_.assign(static_cast<std::size_t>(dim), 0);
  for (const auto& e : exponents) {
    if (static_cast<int>(e.size()) != dim) {
      throw InvalidArgument("monomial dictionary: exponent of wrong length");
    }
    for (std::size_t a = 0; a < e.size(); ++a) {
      if (e[a] < 0) throw InvalidArgument("monomial dictionary: negative exponent");
      d.max_power_[a] = std::max(d.max_power_[a], e[a]);
    }
    if (!seen.insert(e).second) {
      throw InvalidArgument("monomial dictionary: duplicate exponent");
    }
  }
  d.exponents_ = std::move(exponents);
  d.layout_ = "custom";
  d.index_coordinates();
  return d;
}

Dictionary Dictionary::tanh_random(int dim, int sigma, std::uint64_t seed, double scale_w,
                                   double scale_b, bool append_coordinates) {
  if (dim < 1) throw InvalidArgument("tanh dictionary: dim must be >= 1");
  if (sigma < 1) throw InvalidArgument("tanh dictionary: sigma must be >= 1");
  if (!(scale_w >= 0.0) || !(scale_b >= 0.0)) {
    throw InvalidArgument("tanh dictionary: scales must be nonnegative");
  }
  Rng rng(seed);
  Matrix w(sigma, dim);
  for (int k = 0; k < sigma; ++k) {
    for (int j = 0; j < dim; ++j) w(k, j) = scale_w * rng.normal();
  }
  Vector b(sigma);
  for (int k = 0; k < sigma; ++k) b(k) = scale_b == 0.0 ? 0.0 : rng.uniform(-scale_b, scale_b);
  std::vector<int> slots(static_cast<std::size_t>(sigma + (append_coordinates ? dim : 0)));
  std::iota(slots.begin(), slots.end(), 0);
  return tanh_from_parts(std::move(w), std::move(b), std::move(slots), seed, scale_w, scale_b);
}

Dictionary Dictionary::tanh_from_parts(Matrix weights, Vector bias, std::vector<int> slots,
                                       std::uint64_t seed, double scale_w, double scale_b) {
  const auto sigma = static_cast<int>(weights.rows());
  const auto dim = static_cast<int>(weights.cols());
  if (sigma < 1 || dim < 1) throw InvalidArgument("tanh dictionary: empty weight matrix");
  if (bias.size() != sigma) throw ShapeMismatch("tanh dictionary: bias length != rows of W");
  if (!weights.allFinite() || !bias.allFinite()) {
    throw InvalidArgument("tanh dictionary: non-finite weights");
  }
  std::set<int> seen;
  for (int s : slots) {
    if (s < 0 || s >= sigma + dim) throw InvalidArgument("tanh dictionary: slot out of range");
    if (!seen.insert(s).second) throw InvalidArgument("tanh dictionary: duplicate slot");
  }
  if (slots.empty()) throw InvalidArgument("tanh dictionary: no slots");
  Dictionary d;
  d.kind_ = DictionaryKind::kTanhRandom;
  d.dim_ = dim;
  d.weights_ = std::move(weights);
  d.bias_ = std::move(bias);
  d.slots_ = std::move(slots);
  d.seed_ = seed;
  d.scale_w_ = scale_w;
  d.scale_b_ = scale_b;
  d.index_coordinates();
  return d;
}

int Dictionary::size() const {
  return kind_ == DictionaryKind::kMonomial ? static_cast<int>(exponents_.size())
                                            : static_cast<int>(slots_.size());
}

void Dictionary::index_coordinates() {
  coordinate_slot_.assign(static_cast<std::size_t>(dim_), -1);
  for (int i = 0; i < size(); ++i) {
    int axis = -1;
    if (kind_ == DictionaryKind::kMonomial) {
      const auto& e = exponents_[static_cast<std::size_t>(i)];
      if (std::accumulate(e.begin(), e.end(), 0) == 1) {
        axis = static_cast<int>(std::find(e.begin(), e.end(), 1) - e.begin());
      }
    } else {
      const int raw = slots_[static_cast<std::size_t>(i)];
      if (raw >= weights_.rows()) axis = raw - static_cast<int>(weights_.rows());
    }
    if (axis >= 0 && coordinate_slot_[static_cast<std::size_t>(axis)] < 0) {
      coordinate_slot_[static_cast<std::size_t>(axis)] = i;
    }
  }
}

void Dictionary::evaluate(std::span<const double> x, std::span<double> out) const {
  const int n = size();
  if (kind_ == DictionaryKind::kMonomial) {
    // Power table pw[a][p] = x_a^p, shared by every slot.
    const int maxp = *std::max_element(max_power_.begin(), max_power_.end());
    const auto stride = static_cast<std::size_t>(maxp + 1);
    double stack[64];
    std::vector<double> heap;
    double* pw = stack;
    if (static_cast<std::size_t>(dim_) * stride > 64) {
      heap.resize(static_cast<std::size_t>(dim_) * stride);
      pw = heap.data();
    }
    for (int a = 0; a < dim_; ++a) {
      double* row = pw + static_cast<std::size_t>(a) * stride;
      row[0] = 1.0;
      for (int p = 1; p <= max_power_[static_cast<std::size_t>(a)]; ++p) {
        row[p] = row[p - 1] * x[static_cast<std::size_t>(a)];
      }
    }
    for (int i = 0; i < n; ++i) {
      const auto& e = exponents_[static_cast<std::size_t>(i)];
      double v = 1.0;
      for (int a = 0; a < dim_; ++a) {
        const int p = e[static_cast<std::size_t>(a)];
        if (p) v *= pw[static_cast<std::size_t>(a) * stride + static_cast<std::size_t>(p)];
      }
      out[static_cast<std::size_t>(i)] = v;
    }
    return;
  }
  const auto sigma = static_cast<int>(weights_.rows());
  for (int i = 0; i < n; ++i) {
    const int raw = slots_[static_cast<std::size_t>(i)];
    double v;
    if (raw < sigma) {
      double s = bias_(raw);
      for (int a = 0; a < dim_; ++a) s += weights_(raw, a) * x[static_cast<std::size_t>(a)];
      v = std::tanh(s);
    } else {
      v = x[static_cast<std::size_t>(raw - sigma)];
    }
    out[static_cast<std::size_t>(i)] = v;
  }
}

Vector Dictionary::evaluate(const Vector& x) const {
  if (x.size() != dim_) throw ShapeMismatch("dictionary: point has wrong dimension");
  Vector out(size());
  evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(dim_)),
           std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Matrix Dictionary::evaluate_batch(const Matrix& points) const {
  if (points.cols() != dim_) {
    throw ShapeMismatch("dictionary: points have " + std::to_string(points.cols()) +
                        " columns, expected " + std::to_string(dim_));
  }
  if (!points.allFinite()) throw InvalidArgument("dictionary: non-finite evaluation point");
  // Row-major scratch keeps each output row contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(points.rows(),
                                                                             size());
  std::vector<double> x(static_cast<std::size_t>(dim_));
  for (Eigen::Index m = 0; m < points.rows(); ++m) {
    for (int a = 0; a < dim_; ++a) x[static_cast<std::size_t>(a)] = points(m, a);
    evaluate(x, std::span<double>(out.row(m).data(), static_cast<std::size_t>(size())));
  }
  return out;
}

bool Dictionary::has_coordinate(int axis) const {
  return axis >= 0 && axis < dim_ && coordinate_slot_[static_cast<std::size_t>(axis)] >= 0;
}

bool Dictionary::has_all_coordinates() const {
  for (int a = 0; a < dim_; ++a) {
    if (!has_coordinate(a)) return false;
  }
  return true;
}

int Dictionary::coordinate_index(int axis) const {
  if (axis < 0 || axis >= dim_) throw InvalidArgument("coordinate_index: axis out of range");
  if (!has_coordinate(axis)) {
    throw MissingCoordinate("dictionary " + label() + " does not contain x" +
                            std::to_string(axis + 1));
  }
  return coordinate_slot_[static_cast<std::size_t>(axis)];
}

Dictionary Dictionary::permuted(const std::vector<int>& perm) const {
  const int n = size();
  if (static_cast<int>(perm.size()) != n) throw InvalidArgument("permuted: wrong length");
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (int p : perm) {
    if (p < 0 || p >= n || used[static_cast<std::size_t>(p)]) {
      throw InvalidArgument("permuted: not a permutation");
    }
    used[static_cast<std::size_t>(p)] = 1;
  }
  if (kind_ == DictionaryKind::kMonomial) {
    std::vector<std::vector<int>> e;
    e.reserve(perm.size());
    for (int p : perm) e.push_back(exponents_[static_cast<std::size_t>(p)]);
    Dictionary d = monomial_from_exponents(dim_, std::move(e));
    d.layout_ = "custom";
    return d;
  }
  std::vector<int> s;
  s.reserve(perm.size());
  for (int p : perm) s.push_back(slots_[static_cast<std::size_t>(p)]);
  return tanh_from_parts(weights_, bias_, std::move(s), seed_, scale_w_, scale_b_);
}

std::string Dictionary::label() const {
  if (kind_ == DictionaryKind::kMonomial) {
    if (layout_ == "custom") return "monomial[" + std::to_string(size()) + "]";
    return "monomial[" + layout_ + "]";
  }
  const int coords = static_cast<int>(
      std::count_if(slots_.begin(), slots_.end(), [&](int s) { return s >= weights_.rows(); }));
  return "tanh[" + std::to_string(size() - coords) + "+" + std::to_string(coords) + "]";
}

std::string Dictionary::slot_name(int i) const {
  if (i < 0 || i >= size()) throw InvalidArgument("slot_name: index out of range");
  if (kind_ == DictionaryKind::kMonomial) {
    const auto& e = exponents_[static_cast<std::size_t>(i)];
    std::string s;
    for (int a = 0; a < dim_; ++a) {
      const int p = e[static_cast<std::size_t>(a)];
      if (!p) continue;
      if (!s.empty()) s += '*';
      s += "x" + std::to_string(a + 1);
      if (p > 1) s += "^" + std::to_string(p);
    }
    return s.empty() ? "1" : s;
  }
  const int raw = slots_[static_cast<std::size_t>(i)];
  if (raw >= weights_.rows()) return "x" + std::to_string(raw - weights_.rows() + 1);
  return "tanh_" + std::to_string(raw);
}

}  // namespace koopgen
