#include "nmr/mesh/topology.hpp"

#include <string>
#include <unordered_map>

namespace nmr::mesh {

bool EdgeTopology::closed() const {
  for (const auto& ef : edge_faces) {
    if (ef[0] == kNoFace || ef[1] == kNoFace) return false;
  }
  return true;
}

EdgeTopology EdgeTopology::build(const TriangleMesh& mesh) {
  mesh.validate();
  EdgeTopology topo;
  const auto nf = mesh.faces.size();
  const auto nv = mesh.vertices.size();
  topo.face_edges.resize(nf);
  std::unordered_map<std::uint64_t, std::uint32_t> lookup;
  lookup.reserve(nf * 2);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      std::uint32_t a = tri[k], b = tri[(k + 1) % 3];
      if (a == b) throw MeshError("face " + std::to_string(f) + " has a repeated vertex");
      if (a > b) std::swap(a, b);
      const std::uint64_t key = (std::uint64_t(a) << 32) | b;
      auto [it, inserted] = lookup.try_emplace(key, static_cast<std::uint32_t>(topo.edges.size()));
      if (inserted) {
        topo.edges.push_back({a, b});
        topo.edge_faces.push_back({static_cast<std::uint32_t>(f), kNoFace});
      } else {
        auto& ef = topo.edge_faces[it->second];
        if (ef[1] != kNoFace) {
          throw MeshError("non-manifold edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") shared by more than two faces (third is face " + std::to_string(f) +
                          ")");
        }
        ef[1] = static_cast<std::uint32_t>(f);
      }
      topo.face_edges[f][k] = it->second;
    }
  }
  topo.neighbor_offsets.assign(nv + 1, 0);
  for (const auto& e : topo.edges) {
    ++topo.neighbor_offsets[e[0] + 1];
    ++topo.neighbor_offsets[e[1] + 1];
  }
  for (std::size_t v = 0; v < nv; ++v) topo.neighbor_offsets[v + 1] += topo.neighbor_offsets[v];
  topo.neighbors.resize(topo.neighbor_offsets[nv]);
  std::vector<std::uint32_t> fill(topo.neighbor_offsets.begin(), topo.neighbor_offsets.end() - 1);
  for (const auto& e : topo.edges) {
    topo.neighbors[fill[e[0]]++] = e[1];
    topo.neighbors[fill[e[1]]++] = e[0];
  }
  return topo;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacent_face_pairs(const EdgeTopology& topo) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(topo.edge_faces.size());
  for (const auto& ef : topo.edge_faces) {
    if (ef[0] != kNoFace && ef[1] != kNoFace) pairs.emplace_back(ef[0], ef[1]);
  }
  return pairs;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacent_face_pairs(const TriangleMesh& mesh) {
  return adjacent_face_pairs(EdgeTopology::build(mesh));
}

}  // namespace nmr::mesh
