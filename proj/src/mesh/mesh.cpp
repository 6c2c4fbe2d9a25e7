#include "nmr/mesh/mesh.hpp"

#include <string>

namespace nmr::mesh {

void TriangleMesh::validate() const {
  const auto nv = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto idx : faces[f]) {
      if (idx >= nv) {
        throw MeshError("face " + std::to_string(f) + " references vertex " +
                        std::to_string(idx) + " but the mesh has " + std::to_string(nv) +
                        " vertices");
      }
    }
  }
  if (!normals.empty() && normals.size() != nv) {
    throw MeshError("normals: " + std::to_string(normals.size()) + " entries for " +
                    std::to_string(nv) + " vertices");
  }
  if (!colors.empty() && colors.size() != nv) {
    throw MeshError("colors: " + std::to_string(colors.size()) + " entries for " +
                    std::to_string(nv) + " vertices");
  }
  if (!features.empty() && features.size() != nv * feature_dim) {
    throw MeshError("features: " + std::to_string(features.size()) + " values for " +
                    std::to_string(nv) + " vertices of dimension " + std::to_string(feature_dim));
  }
}

}  // namespace nmr::mesh
