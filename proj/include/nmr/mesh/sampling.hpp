#pragma once

#include <cstdint>
#include <vector>

#include "nmr/mesh/mesh.hpp"

namespace nmr::mesh {

struct SurfaceSample {
  Vec3 point;
  std::uint32_t face;
  double bary[3];
};

/// n points uniformly distributed by area: faces drawn with probability
/// proportional to area, then uniform barycentrics.  Deterministic per seed.
/// Throws MeshError if the total area is zero.
std::vector<SurfaceSample> sample_surface(const TriangleMesh& mesh, std::size_t n,
                                          std::uint64_t seed);
std::vector<Vec3> sample_points(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Uniform-grid nearest-neighbour index over a fixed point set.
class PointGrid {
 public:
  explicit PointGrid(const std::vector<Vec3>& points);
  /// Distance from q to the closest indexed point.
  double nearest_distance(const Vec3& q) const;

 private:
  std::int64_t cell_key(int x, int y, int z) const;
  const std::vector<Vec3>& points_;
  Vec3 origin_;
  double cell_ = 1.0;
  int dims_[3] = {1, 1, 1};
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> order_;
};

/// Mean over `queries` of the distance to the nearest point of `targets`.
/// Queries are processed in parallel; the sum is formed in index order.
double mean_nearest_distance(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets);

/// Symmetric chamfer distance between two point sets:
/// 0.5 * (mean_a min_b |a-b| + mean_b min_a |a-b|).
double chamfer_points(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

/// Chamfer distance between two meshes over n area-uniform samples each.
/// Both meshes are sampled with the same seed.
double chamfer_distance(const TriangleMesh& a, const TriangleMesh& b, std::size_t n,
                        std::uint64_t seed);

namespace reference {
/// Brute-force O(n m) version of mean_nearest_distance.
double mean_nearest_distance(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets);
}  // namespace reference

}  // namespace nmr::mesh
