#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nmr/autodiff/ops.hpp"
#include "nmr/fields/checkpoint.hpp"
#include "nmr/fields/networks.hpp"
#include "nmr/mesh/tensor_ops.hpp"
#include "nmr/raster/render.hpp"

namespace nmr::train {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which modules of the pipeline are active.  The five named settings:
///   a: none (raw per-vertex offsets, appearance MLP on hash-encoded positions)
///   b: geometry MLP + baking
///   c: b + features
///   d: c + feature regularization (the full method)
///   e: d without baking; diffuse comes from an extra per-pixel MLP branch
struct AblationFlags {
  bool use_geometry_mlp = true;
  bool use_features = true;
  bool use_baking = true;
  bool use_feature_reg = true;

  /// Features, baking and the feature regularizer need the geometry MLP;
  /// the regularizer also needs features.  Throws ConfigError.
  void validate() const;
  static AblationFlags setting(char name);
  /// 'a'..'e' when the flags match a named setting, '?' otherwise.
  char setting_name() const;
  bool operator==(const AblationFlags&) const = default;
};

struct ModelDims {
  std::size_t geometry_hidden = 256;
  std::size_t feature_dim = fields::kFeatureDim;
  std::size_t shader_hidden = 64;
  std::size_t normal_hidden = 256;
  double shader_bias = -3.0;  // initial pre-sigmoid bias of the specular output
  enc::HashGridConfig hash;
};

/// Trainable scene: initial mesh, deformation (field or raw offsets), the
/// appearance networks and the normal predictor, wired per AblationFlags.
/// Tensors are float; gradients flow when a tape is active.
class SceneModel {
 public:
  SceneModel(mesh::TriangleMesh initial, const AblationFlags& flags, const ModelDims& dims, std::uint64_t seed);

  /// Rebuilds a model from a checkpoint written by checkpoint().  Throws
  /// fields::CheckpointError on missing or inconsistent sections.
  static SceneModel from_checkpoint(const fields::Checkpoint& ckpt);
  fields::Checkpoint checkpoint() const;

  const AblationFlags& flags() const { return flags_; }
  const ModelDims& dims() const { return dims_; }
  const mesh::TriangleMesh& initial() const { return initial_; }
  const std::vector<mesh::Face>& faces() const { return initial_.faces; }
  const mesh::FaceCorners& corners() const { return corners_; }
  const ad::CsrMatrix& laplacian() const { return laplacian_; }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& face_pairs() const { return pairs_; }
  const raster::FaceNeighbors& neighbors() const { return neighbors_; }
  /// Feature width carried on the surface (0 without features).
  std::size_t feature_dim() const { return flags_.use_features ? dims_.feature_dim : 0; }

  /// (V, 3) offsets at the initial vertices.
  ad::Tensor<float> offsets() const;
  /// Deformed positions, vertex normals, features and baked diffuse.
  raster::SurfaceAttributes<float> surface() const { return surface(nullptr); }
  /// Same, plus the per-vertex features seen by the feature regularizer:
  /// the feature head applied to the detached trunk, so that term trains the
  /// head and the normal predictor but not the shared deformation trunk.
  raster::SurfaceAttributes<float> surface(ad::Tensor<float>* regularizer_features) const;
  /// Surface of an edited mesh: its own positions and normals, its
  /// per-vertex features and colors (as baked diffuse).  Throws ConfigError
  /// when the mesh lacks features or colors the shader needs.
  raster::SurfaceAttributes<float> surface_from_mesh(const mesh::TriangleMesh& m) const;

  /// The per-pixel color term for raster::render / shade_pixels.
  raster::PixelShader<float> shader() const;
  /// n' = p(x, z); requires the feature regularizer.
  ad::Tensor<float> predict_normals(const ad::Tensor<float>& x, const ad::Tensor<float>& z) const;
  bool has_normal_predictor() const { return normals_.defined(); }

  /// Full-frame render of the model's own surface, composited over black.
  raster::RenderOutput<float> render(const raster::Camera& cam) const;
  /// Same with an edited mesh in place of the deformed one.
  raster::RenderOutput<float> render_mesh(const raster::Camera& cam, const mesh::TriangleMesh& m) const;

  /// Deformed mesh with vertex normals, features and diffuse colors.
  mesh::TriangleMesh export_mesh() const;

  /// Geometry side {theta, phi, eta, raw offsets}; appearance side {sigma}.
  fields::ParamList<float> geometry_params() const;
  fields::ParamList<float> appearance_params() const;

  /// Loop-subdivides the initial mesh `rounds` times.  The field is simply
  /// re-evaluated on the new vertices; raw offsets are subdivided with the
  /// same stencils.  Replaces the offsets tensor (see geometry_params()).
  void upsample(int rounds);

 private:
  void rebuild_topology();
  ad::Tensor<float> appearance_input(const raster::PixelAttributes<float>& px, const ad::Tensor<float>& diffuse) const;
  ad::Tensor<float> diffuse_branch(const raster::PixelAttributes<float>& px) const;
  ad::Tensor<float> diffuse_branch(const ad::Tensor<float>& x, const ad::Tensor<float>& z,
                                   const ad::Tensor<float>& n) const;

  AblationFlags flags_;
  ModelDims dims_;
  mesh::TriangleMesh initial_;
  ad::Tensor<float> x0_;  // initial vertices, constant
  mesh::FaceCorners corners_;
  ad::CsrMatrix laplacian_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
  raster::FaceNeighbors neighbors_;

  std::shared_ptr<fields::GeometryField<float>> field_;  // settings b..e
  std::shared_ptr<enc::HashGrid<float>> hash_;           // setting a
  ad::Tensor<float> raw_offsets_;                        // setting a
  fields::AppearanceShader<float> shader_;
  fields::AppearanceShader<float> diffuse_net_;  // baking off
  fields::NormalPredictor<float> normals_;
};

}  // namespace nmr::train
