#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nmr::mesh {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::uint32_t, 3>;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Indexed triangle mesh.  Faces wind counter-clockwise seen from outside.
/// Per-vertex attributes are optional; when present they hold one entry per
/// vertex (features are row-major, feature_dim floats per vertex).
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec3> normals;
  std::vector<Vec3> colors;  // diffuse RGB in [0, 1]
  std::vector<float> features;
  std::size_t feature_dim = 0;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }
  bool has_normals() const { return !normals.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_features() const { return feature_dim > 0 && !features.empty(); }

  /// Checks index ranges and attribute lengths; throws MeshError naming the
  /// first offending face or attribute.
  void validate() const;
};

}  // namespace nmr::mesh
