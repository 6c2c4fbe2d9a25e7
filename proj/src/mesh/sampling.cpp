#include "nmr/mesh/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nmr/mesh/operations.hpp"

namespace nmr::mesh {

std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed) {
  mesh.validate();
  if (n == 0) throw MeshError("sample_surface: n must be at least 1");
  const auto areas = face_areas(mesh);
  std::vector<double> cdf(areas.size());
  double total = 0.0;
  for (std::size_t f = 0; f < areas.size(); ++f) {
    total += areas[f];
    cdf[f] = total;
  }
  if (!(total > 0.0)) throw MeshError("sample_surface: mesh has zero total area");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<SurfaceSample> out(n);
  for (auto& s : out) {
    const double r = uni(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    if (it == cdf.end()) --it;
    s.face = static_cast<std::uint32_t>(it - cdf.begin());
    const double r1 = std::sqrt(uni(rng));
    const double r2 = uni(rng);
    s.bary[0] = 1.0 - r1;
    s.bary[1] = r1 * (1.0 - r2);
    s.bary[2] = r1 * r2;
    const auto& t = mesh.faces[s.face];
    s.point = s.bary[0] * mesh.vertices[t[0]] + s.bary[1] * mesh.vertices[t[1]] +
              s.bary[2] * mesh.vertices[t[2]];
  }
  return out;
}

std::vector<Vec3> sample_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  auto s = sample_surface(mesh, n, seed);
  std::vector<Vec3> pts(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) pts[i] = s[i].point;
  return pts;
}

PointGrid::PointGrid(const std::vector<Vec3>& points) : points_(points) {
  if (points.empty()) throw MeshError("PointGrid: empty point set");
  Vec3 lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 extent = (hi - lo).cwiseMax(Vec3::Constant(1e-9));
  const double cells_per_axis = std::max(1.0, std::cbrt(static_cast<double>(points.size()) / 2.0));
  cell_ = std::max(extent.maxCoeff() / cells_per_axis, 1e-9);
  origin_ = lo;
  for (int a = 0; a < 3; ++a) {
    dims_[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / cell_)));
  }
  const std::size_t ncells = std::size_t(dims_[0]) * dims_[1] * dims_[2];
  std::vector<std::uint32_t> key(points.size());
  cell_start_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 g = (points[i] - origin_) / cell_;
    int c[3];
    for (int a = 0; a < 3; ++a) c[a] = std::clamp(static_cast<int>(g[a]), 0, dims_[a] - 1);
    key[i] = static_cast<std::uint32_t>(cell_key(c[0], c[1], c[2]));
    ++cell_start_[key[i] + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) cell_start_[c + 1] += cell_start_[c];
  order_.resize(points.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) order_[fill[key[i]]++] = static_cast<std::uint32_t>(i);
}

std::int64_t PointGrid::cell_key(int x, int y, int z) const {
  return (std::int64_t(z) * dims_[1] + y) * dims_[0] + x;
}

double PointGrid::nearest_distance(const Vec3& q) const {
  const Vec3 g = (q - origin_) / cell_;
  int c[3];
  for (int a = 0; a < 3; ++a) {
    c[a] = std::clamp(static_cast<int>(std::floor(g[a])), 0, dims_[a] - 1);
  }
  const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
  double best2 = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= max_ring; ++r) {
    for (int z = c[2] - r; z <= c[2] + r; ++z) {
      if (z < 0 || z >= dims_[2]) continue;
      for (int y = c[1] - r; y <= c[1] + r; ++y) {
        if (y < 0 || y >= dims_[1]) continue;
        const bool yz_shell = std::abs(z - c[2]) == r || std::abs(y - c[1]) == r;
        for (int x = c[0] - r; x <= c[0] + r; x += (yz_shell || r == 0) ? 1 : 2 * r) {
          if (x < 0 || x >= dims_[0]) continue;
          const auto k = cell_key(x, y, z);
          for (auto i = cell_start_[k]; i < cell_start_[k + 1]; ++i) {
            best2 = std::min(best2, (points_[order_[i]] - q).squaredNorm());
          }
        }
      }
    }
    // Every cell at ring r+1 or beyond is at least r cells away from q.
    const double bound = r * cell_;
    if (best2 <= bound * bound) break;
  }
  return std::sqrt(best2);
}

double mean_nearest_distance(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets) {
  if (queries.empty()) return 0.0;
  PointGrid grid(targets);
  std::vector<double> d(queries.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (long long i = 0; i < static_cast<long long>(queries.size()); ++i) {
    d[i] = grid.nearest_distance(queries[i]);
  }
  double s = 0.0;
  for (double v : d) s += v;
  return s / static_cast<double>(queries.size());
}

double chamfer_points(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  return 0.5 * (mean_nearest_distance(a, b) + mean_nearest_distance(b, a));
}

double chamfer_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n,
                        std::uint64_t seed) {
  const auto pa = sample_points(a, n, seed);
  const auto pb = sample_points(b, n, seed);
  return chamfer_points(pa, pb);
}

namespace reference {

double mean_nearest_distance(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets) {
  if (queries.empty()) return 0.0;
  double s = 0.0;
  for (const auto& q : queries) {
    double best2 = std::numeric_limits<double>::infinity();
    for (const auto& p : targets) best2 = std::min(best2, (p - q).squaredNorm());
    s += std::sqrt(best2);
  }
  return s / static_cast<double>(queries.size());
}

}  // namespace reference
}  // namespace nmr::mesh
