#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nmr/autodiff/tensor.hpp"

namespace nmr::enc {

struct HashGridConfig {
  int levels = 16;
  int features = 2;
  int log2_table_size = 15;
  int base_resolution = 16;
  int max_resolution = 2048;
  double bound = 1.5;  // encoded domain is [-bound, bound]^3
};

/// Geometric level resolutions N_l = floor(N_0 * b^l), b = (N_max/N_0)^(1/(L-1)).
std::vector<int> level_resolutions(const HashGridConfig& cfg);

/// Multi-resolution hash encoding.  Each level maps a point to its lattice,
/// fetches the 8 corner entries (direct index when the lattice fits in the
/// table, spatial hash otherwise) and interpolates trilinearly.  Output row
/// layout is level-major: [l * F + f].
template <typename T>
class HashGrid {
 public:
  explicit HashGrid(HashGridConfig cfg = {}, std::uint64_t seed = 0);

  const HashGridConfig& config() const { return cfg_; }
  const std::vector<int>& resolutions() const { return res_; }
  std::size_t output_dim() const { return std::size_t(cfg_.levels) * cfg_.features; }
  std::size_t table_size() const { return std::size_t(1) << cfg_.log2_table_size; }
  bool level_is_hashed(int level) const;

  /// All levels' tables stacked: shape (L * T, F), trainable.
  ad::Tensor<T>& table() { return table_; }
  const ad::Tensor<T>& table() const { return table_; }

  /// Uniform in [-1e-4, 1e-4].
  void init(std::uint64_t seed);

  /// Row of table() holding lattice corner c of level l.
  std::uint32_t entry_row(int level, const std::array<std::uint32_t, 3>& c) const;

  /// (n, 3) points -> (n, L * F).  Differentiable w.r.t. the table and the
  /// points; points outside the domain are clamped (zero point gradient).
  ad::Tensor<T> encode(const ad::Tensor<T>& x) const;

 private:
  HashGridConfig cfg_;
  std::vector<int> res_;
  ad::Tensor<T> table_;
};

namespace reference {
/// Per-point, per-level serial evaluation of the same encoding (values only).
template <typename T>
std::vector<T> hash_encode(const HashGrid<T>& grid, const std::vector<std::array<double, 3>>& x);
}  // namespace reference

}  // namespace nmr::enc
