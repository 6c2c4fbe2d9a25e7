#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "nmr/mesh/mesh.hpp"

namespace nmr::mesh {

inline constexpr std::uint32_t kNoFace = 0xffffffffu;

/// Edge-level connectivity of a triangle mesh.
struct EdgeTopology {
  /// Unique undirected edges, endpoints sorted (first < second), in order of
  /// first appearance while walking faces.
  std::vector<std::array<std::uint32_t, 2>> edges;
  /// The (up to two) faces adjacent to each edge; kNoFace when missing.
  std::vector<std::array<std::uint32_t, 2>> edge_faces;
  /// face_edges[f][k] is the edge from corner k to corner (k + 1) % 3.
  std::vector<std::array<std::uint32_t, 3>> face_edges;
  /// One-ring neighbours in CSR form.
  std::vector<std::uint32_t> neighbor_offsets;
  std::vector<std::uint32_t> neighbors;

  std::size_t edge_count() const { return edges.size(); }
  std::size_t valence(std::uint32_t v) const {
    return neighbor_offsets[v + 1] - neighbor_offsets[v];
  }
  /// True when every edge has exactly two faces.
  bool closed() const;

  /// Throws MeshError if an edge is shared by more than two faces.
  static EdgeTopology build(const TriangleMesh& mesh);
};

/// Neighbouring face pairs: one pair per edge with two adjacent faces.
std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacent_face_pairs(const TriangleMesh& mesh);
std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacent_face_pairs(const EdgeTopology& topo);

}  // namespace nmr::mesh
