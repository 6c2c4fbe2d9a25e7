#include "nmr/mesh/operations.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nmr::mesh {
namespace {

TriangleMesh icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

std::uint32_t opposite(const Face& f, const std::array<std::uint32_t, 2>& e) {
  for (auto v : f) {
    if (v != e[0] && v != e[1]) return v;
  }
  return f[0];
}

std::vector<Face> split_faces(const TriangleMesh& mesh, const EdgeTopology& topo) {
  const auto nv = static_cast<std::uint32_t>(mesh.vertices.size());
  std::vector<Face> out;
  out.reserve(mesh.faces.size() * 4);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    const auto mab = nv + topo.face_edges[f][0];
    const auto mbc = nv + topo.face_edges[f][1];
    const auto mca = nv + topo.face_edges[f][2];
    out.push_back({tri[0], mab, mca});
    out.push_back({tri[1], mbc, mab});
    out.push_back({tri[2], mca, mbc});
    out.push_back({mab, mbc, mca});
  }
  return out;
}

double loop_beta(std::size_t n) {
  const double c = 3.0 / 8.0 + 0.25 * std::cos(2.0 * std::numbers::pi / static_cast<double>(n));
  return (5.0 / 8.0 - c * c) / static_cast<double>(n);
}

}  // namespace

TriangleMesh make_icosphere(int level) {
  if (level < 0 || level > kMaxIcosphereLevel) {
    throw MeshError("icosphere level " + std::to_string(level) + " outside [0, " +
                    std::to_string(kMaxIcosphereLevel) + "]");
  }
  TriangleMesh m = icosahedron();
  for (int l = 0; l < level; ++l) {
    const auto topo = EdgeTopology::build(m);
    TriangleMesh next;
    next.vertices = m.vertices;
    next.vertices.reserve(m.vertices.size() + topo.edge_count());
    for (const auto& e : topo.edges) {
      next.vertices.push_back((m.vertices[e[0]] + m.vertices[e[1]]).normalized());
    }
    next.faces = split_faces(m, topo);
    m = std::move(next);
  }
  return m;
}

std::vector<double> loop_subdivide_attribute(const TriangleMesh& mesh, const EdgeTopology& topo,
                                             const std::vector<double>& values, std::size_t width) {
  const auto nv = mesh.vertices.size();
  std::vector<double> out((nv + topo.edge_count()) * width, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    const auto n = topo.valence(static_cast<std::uint32_t>(v));
    const double beta = loop_beta(n);
    const double self = 1.0 - static_cast<double>(n) * beta;
    double* dst = out.data() + v * width;
    for (std::size_t j = 0; j < width; ++j) dst[j] = self * values[v * width + j];
    for (auto k = topo.neighbor_offsets[v]; k < topo.neighbor_offsets[v + 1]; ++k) {
      const double* src = values.data() + topo.neighbors[k] * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += beta * src[j];
    }
  }
  for (std::size_t e = 0; e < topo.edge_count(); ++e) {
    const auto& ed = topo.edges[e];
    const auto c = opposite(mesh.faces[topo.edge_faces[e][0]], ed);
    const auto d = opposite(mesh.faces[topo.edge_faces[e][1]], ed);
    double* dst = out.data() + (nv + e) * width;
    for (std::size_t j = 0; j < width; ++j) {
      dst[j] = 0.375 * (values[ed[0] * width + j] + values[ed[1] * width + j]) +
               0.125 * (values[c * width + j] + values[d * width + j]);
    }
  }
  return out;
}

TriangleMesh loop_subdivide(const TriangleMesh& mesh) {
  const auto topo = EdgeTopology::build(mesh);
  if (!topo.closed()) {
    throw MeshError("loop subdivision requires a closed edge-manifold mesh (found a boundary edge)");
  }
  const auto nv = mesh.vertices.size();
  TriangleMesh out;
  {
    std::vector<double> pos(nv * 3);
    for (std::size_t v = 0; v < nv; ++v)
      for (int j = 0; j < 3; ++j) pos[v * 3 + j] = mesh.vertices[v][j];
    auto sub = loop_subdivide_attribute(mesh, topo, pos, 3);
    out.vertices.resize(sub.size() / 3);
    for (std::size_t v = 0; v < out.vertices.size(); ++v)
      out.vertices[v] = {sub[v * 3], sub[v * 3 + 1], sub[v * 3 + 2]};
  }
  if (mesh.has_colors()) {
    std::vector<double> col(nv * 3);
    for (std::size_t v = 0; v < nv; ++v)
      for (int j = 0; j < 3; ++j) col[v * 3 + j] = mesh.colors[v][j];
    auto sub = loop_subdivide_attribute(mesh, topo, col, 3);
    out.colors.resize(sub.size() / 3);
    for (std::size_t v = 0; v < out.colors.size(); ++v)
      out.colors[v] = {sub[v * 3], sub[v * 3 + 1], sub[v * 3 + 2]};
  }
  if (mesh.has_features()) {
    std::vector<double> feat(mesh.features.begin(), mesh.features.end());
    auto sub = loop_subdivide_attribute(mesh, topo, feat, mesh.feature_dim);
    out.features.assign(sub.begin(), sub.end());
    out.feature_dim = mesh.feature_dim;
  }
  out.faces = split_faces(mesh, topo);
  return out;
}

std::vector<double> face_areas(const TriangleMesh& mesh) {
  std::vector<double> a(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    const Vec3& p0 = mesh.vertices[t[0]];
    a[f] = 0.5 * (mesh.vertices[t[1]] - p0).cross(mesh.vertices[t[2]] - p0).norm();
  }
  return a;
}

double surface_area(const TriangleMesh& mesh) {
  double s = 0.0;
  for (double a : face_areas(mesh)) s += a;
  return s;
}

NormalResult vertex_normals(const TriangleMesh& mesh) {
  mesh.validate();
  NormalResult r;
  r.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (const auto& t : mesh.faces) {
    const Vec3& p0 = mesh.vertices[t[0]];
    const Vec3 n = (mesh.vertices[t[1]] - p0).cross(mesh.vertices[t[2]] - p0);
    for (auto v : t) r.normals[v] += n;
  }
  for (auto& n : r.normals) {
    const double len = n.norm();
    if (len > 0.0) {
      n /= len;
    } else {
      n.setZero();
      ++r.degenerate;
    }
  }
  return r;
}

std::vector<Vec3> face_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> out(mesh.faces.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& t = mesh.faces[f];
    const Vec3& p0 = mesh.vertices[t[0]];
    Vec3 n = (mesh.vertices[t[1]] - p0).cross(mesh.vertices[t[2]] - p0);
    const double len = n.norm();
    out[f] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
  return out;
}

std::vector<Vec3> laplacian_deltas(const TriangleMesh& mesh) {
  const auto topo = EdgeTopology::build(mesh);
  std::vector<Vec3> d(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto n = topo.valence(static_cast<std::uint32_t>(v));
    if (n == 0) throw MeshError("vertex " + std::to_string(v) + " is isolated (no neighbours)");
    Vec3 acc = Vec3::Zero();
    for (auto k = topo.neighbor_offsets[v]; k < topo.neighbor_offsets[v + 1]; ++k)
      acc += mesh.vertices[topo.neighbors[k]];
    d[v] = mesh.vertices[v] - acc / static_cast<double>(n);
  }
  return d;
}

ad::CsrMatrix uniform_laplacian(const EdgeTopology& topo, std::size_t vertex_count) {
  ad::CsrMatrix m;
  m.rows = m.cols = vertex_count;
  m.row_ptr.reserve(vertex_count + 1);
  m.row_ptr.push_back(0);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    const auto n = topo.valence(static_cast<std::uint32_t>(v));
    if (n == 0) throw MeshError("vertex " + std::to_string(v) + " is isolated (no neighbours)");
    m.col.push_back(static_cast<std::uint32_t>(v));
    m.val.push_back(1.0);
    const double w = -1.0 / static_cast<double>(n);
    for (auto k = topo.neighbor_offsets[v]; k < topo.neighbor_offsets[v + 1]; ++k) {
      m.col.push_back(topo.neighbors[k]);
      m.val.push_back(w);
    }
    m.row_ptr.push_back(static_cast<std::uint32_t>(m.col.size()));
  }
  return m;
}

}  // namespace nmr::mesh
