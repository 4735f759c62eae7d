#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "koopgen/linalg.hpp"

namespace koopgen {

enum class DictionaryKind { kMonomial, kTanhRandom };

/// Ordered family of observables z_0, ..., z_{N-1} on R^d.
///
/// Monomial dictionaries hold one exponent vector per slot. Tanh dictionaries
/// hold sigma random features tanh(W x + b), optionally followed by the raw
/// coordinates. Immutable once built.
class Dictionary {
 public:
  /// Full tensor grid with exponents 0..caps[j]-1 on axis j, enumerated in
  /// mixed-radix order with the axis-0 exponent varying fastest.
  static Dictionary monomial_per_axis(std::vector<int> caps);

  /// All exponents with total degree <= max_degree, ordered by degree and
  /// then descending lexicographically (1, x1, x2, x1^2, x1 x2, x2^2, ...).
  static Dictionary monomial_total_degree(int dim, int max_degree);

  /// Monomials with an explicit exponent list (must be distinct).
  static Dictionary monomial_from_exponents(int dim, std::vector<std::vector<int>> exponents);

  /// W ~ N(0, scale_w^2), b ~ U(-scale_b, scale_b), drawn from `seed`.
  static Dictionary tanh_random(int dim, int sigma, std::uint64_t seed, double scale_w = 1.0,
                                double scale_b = 1.0, bool append_coordinates = true);

  /// Tanh dictionary with given weights; `slots` lists, for every output
  /// position, a raw feature index (< sigma: tanh row, >= sigma: coordinate).
  static Dictionary tanh_from_parts(Matrix weights, Vector bias, std::vector<int> slots,
                                    std::uint64_t seed, double scale_w, double scale_b);

  DictionaryKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int size() const;
  /// "PxQx..." for per-axis grids, "deg<=n" for total degree, otherwise
  /// "custom" (monomial) or empty (tanh).
  const std::string& layout() const { return layout_; }

  const std::vector<std::vector<int>>& exponents() const { return exponents_; }
  const Matrix& weights() const { return weights_; }
  const Vector& bias() const { return bias_; }
  const std::vector<int>& slots() const { return slots_; }
  std::uint64_t seed() const { return seed_; }
  double scale_w() const { return scale_w_; }
  double scale_b() const { return scale_b_; }

  /// Writes Z(x) into `out` (length size()).
  void evaluate(std::span<const double> x, std::span<double> out) const;
  Vector evaluate(const Vector& x) const;

  /// Row m of the result is Z(points.row(m))^T.
  Matrix evaluate_batch(const Matrix& points) const;

  bool has_coordinate(int axis) const;
  bool has_all_coordinates() const;
  /// Slot i with z_i(x) = x_axis (axis is 0-based). Throws MissingCoordinate.
  int coordinate_index(int axis) const;

  /// Dictionary whose slot i is this dictionary's slot perm[i].
  Dictionary permuted(const std::vector<int>& perm) const;

  /// Short human-readable label, e.g. "monomial[3x3]" or "tanh[100+2]".
  std::string label() const;
  /// Name of slot i, e.g. "x1^2*x2" or "tanh_17".
  std::string slot_name(int i) const;

 private:
  Dictionary() = default;
  void index_coordinates();

  DictionaryKind kind_ = DictionaryKind::kMonomial;
  int dim_ = 0;
  std::string layout_;

  std::vector<std::vector<int>> exponents_;
  std::vector<int> max_power_;

  Matrix weights_;
  Vector bias_;
  std::vector<int> slots_;
  std::uint64_t seed_ = 0;
  double scale_w_ = 1.0;
  double scale_b_ = 1.0;

  std::vector<int> coordinate_slot_;  // -1 when absent
};

}  // namespace koopgen
