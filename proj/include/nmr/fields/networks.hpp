#pragma once

#include <cstdint>

#include "nmr/encodings/hash_grid.hpp"
#include "nmr/fields/layers.hpp"
#include "nmr/mesh/mesh.hpp"

namespace nmr::fields {

inline constexpr std::size_t kFeatureDim = 64;

template <typename T>
struct GeometryOutput {
  ad::Tensor<T> offset;   // (n, 3)
  ad::Tensor<T> feature;  // (n, feature_dim), undefined without a feature head
  ad::Tensor<T> diffuse;  // (n, 3) in (0, 1), undefined without a diffuse head
};

struct GeometryFieldConfig {
  std::size_t hidden = 256;
  std::size_t feature_dim = kFeatureDim;  // 0 removes the feature head
  bool diffuse_head = true;
  enc::HashGridConfig hash;
};

/// Deformation field g(x, e(x)) -> (d, z, c^d): input projection to `hidden`,
/// one residual block of two ReLU layers, then linear heads.  The deformation
/// head starts at exactly zero.
template <typename T>
class GeometryField {
 public:
  GeometryField(const GeometryFieldConfig& cfg, std::uint64_t seed);

  GeometryOutput<T> operator()(const ad::Tensor<T>& x) const { return heads(trunk(x)); }
  /// Shared hidden features h(x, e(x)) after the residual block.
  ad::Tensor<T> trunk(const ad::Tensor<T>& x) const;
  GeometryOutput<T> heads(const ad::Tensor<T>& h) const;
  const GeometryFieldConfig& config() const { return cfg_; }
  enc::HashGrid<T>& hash() { return hash_; }
  const enc::HashGrid<T>& hash() const { return hash_; }

  /// "geometry/..." for the MLP and "hash/table" for the encoding.
  void collect(ParamList<T>& out) const;
  /// The diffuse head alone (swapped by specular+diffuse transfer).
  void collect_diffuse_head(ParamList<T>& out) const;

  Linear<T> input, res1, res2, deform_head, feature_head, diffuse_head;

 private:
  GeometryFieldConfig cfg_;
  enc::HashGrid<T> hash_;
};

/// Per-pixel shader MLP: `in_dim` -> hidden -> hidden -> 3 with sigmoid.  The
/// last bias starts at `out_bias` so a specular shader begins near zero.
template <typename T>
class AppearanceShader {
 public:
  AppearanceShader() = default;
  AppearanceShader(std::size_t in_dim, std::size_t hidden, double out_bias, std::uint64_t seed);
  ad::Tensor<T> operator()(const ad::Tensor<T>& input) const { return mlp_(input); }
  std::size_t in_dim() const { return mlp_.in_dim(); }
  bool defined() const { return mlp_.defined(); }
  void collect(const std::string& prefix, ParamList<T>& out) const { mlp_.collect(prefix, out); }

 private:
  Mlp<T> mlp_;
};

/// p(x, z) -> unit normal: (3 + feature_dim) -> hidden -> hidden -> 3, then
/// L2 normalization.
template <typename T>
class NormalPredictor {
 public:
  NormalPredictor() = default;
  NormalPredictor(std::size_t feature_dim, std::size_t hidden, std::uint64_t seed);
  ad::Tensor<T> operator()(const ad::Tensor<T>& x, const ad::Tensor<T>& z) const;
  bool defined() const { return mlp_.defined(); }
  void collect(ParamList<T>& out) const { mlp_.collect("normalnet/mlp", out); }

 private:
  Mlp<T> mlp_;
};

/// Evaluates the field at the mesh vertices: V' = V + d(V), with features,
/// baked diffuse colors and recomputed vertex normals attached.  Faces are
/// copied unchanged.
template <typename T>
mesh::TriangleMesh deform_mesh(const GeometryField<T>& field, const mesh::TriangleMesh& initial);

/// (n, 3) tensor from mesh positions.
template <typename T>
ad::Tensor<T> positions_tensor(const std::vector<mesh::Vec3>& v, bool requires_grad = false);

}  // namespace nmr::fields
