#pragma once

#include <cstdint>
#include <vector>

#include "nmr/autodiff/ops.hpp"
#include "nmr/mesh/mesh.hpp"
#include "nmr/mesh/topology.hpp"

namespace nmr::mesh {

inline constexpr int kMaxIcosphereLevel = 8;

/// Unit icosphere: the icosahedron refined `level` times by edge-midpoint
/// splitting with re-projection onto the sphere.  10 * 4^level + 2 vertices.
TriangleMesh make_icosphere(int level);

/// One round of Loop subdivision.  Old vertices come first (smoothed with
/// Loop's beta one-ring rule), then one new vertex per edge in EdgeTopology
/// order (3/8, 3/8, 1/8, 1/8 stencil).  Colors and features are carried with
/// the same stencils; normals are dropped.  Throws MeshError unless the
/// input is a closed edge-manifold.
TriangleMesh loop_subdivide(const TriangleMesh& mesh);

/// Same stencils applied to an arbitrary per-vertex attribute array (row
/// major, `width` values per vertex).
std::vector<double> loop_subdivide_attribute(const TriangleMesh& mesh, const EdgeTopology& topo,
                                             const std::vector<double>& values, std::size_t width);

struct NormalResult {
  std::vector<Vec3> normals;
  std::size_t degenerate = 0;  // vertices whose incident faces all have zero area
};

/// Area-weighted vertex normals.  Degenerate vertices get a zero normal and
/// are counted.
NormalResult vertex_normals(const TriangleMesh& mesh);

/// Unit face normals (zero for degenerate faces).
std::vector<Vec3> face_normals(const TriangleMesh& mesh);

/// Uniform graph-Laplacian differential coordinates v_i - mean(neighbours).
/// Throws MeshError for a vertex with no neighbours.
std::vector<Vec3> laplacian_deltas(const TriangleMesh& mesh);

/// The uniform Laplacian I - D^-1 A as a sparse matrix, for use on tensors.
ad::CsrMatrix uniform_laplacian(const EdgeTopology& topo, std::size_t vertex_count);

std::vector<double> face_areas(const TriangleMesh& mesh);
double surface_area(const TriangleMesh& mesh);

}  // namespace nmr::mesh
