#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmr/mesh/mesh.hpp"
#include "nmr/raster/camera.hpp"
#include "nmr/raster/image_io.hpp"

namespace nmr::data {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct View {
  std::string name;
  raster::Camera camera;
  raster::Image image;  // RGB in [0, 1]
  raster::Image mask;   // 1 channel, 0 or 1
};

/// x_normalized = scale * x + translation.
struct Normalization {
  double scale = 1.0;
  mesh::Vec3 translation = mesh::Vec3::Zero();
  mesh::Vec3 apply(const mesh::Vec3& x) const { return scale * x + translation; }
  mesh::Vec3 invert(const mesh::Vec3& y) const { return (y - translation) / scale; }
};

struct Dataset {
  std::vector<View> views;
  std::optional<mesh::TriangleMesh> gt_mesh;
  Normalization normalization;

  /// Throws DatasetError naming the view when an image, mask and camera
  /// disagree in size or the camera is invalid.
  void validate() const;
  const View& view(const std::string& name) const;
  std::vector<std::string> names() const;
};

enum class Shape { Sphere, DisplacedSphere, BoxBlob };
Shape parse_shape(const std::string& s);
std::string shape_name(Shape s);

struct SyntheticOptions {
  Shape shape = Shape::DisplacedSphere;
  int views = 24;
  int width = 128;
  int height = 128;
  std::uint64_t seed = 0;
  int mesh_level = 6;  // icosphere level of the target mesh
};

/// Analytic target inside the origin-centered 0.9-radius sphere, with a
/// smooth per-vertex albedo in `colors`.
mesh::TriangleMesh synthetic_target(Shape shape, int level);

/// Cameras on a ring plus the upper hemisphere at radius 2.5 looking at the
/// origin, world z up.  The seed jitters the azimuths.
std::vector<raster::Camera> synthetic_cameras(int views, int width, int height, std::uint64_t seed);

/// Renders the target with the fixed shading oracle (Lambert plus ambient
/// plus Blinn-Phong, exponent 32, strength 0.3), black background, hard masks.
raster::Image shade_oracle(const mesh::TriangleMesh& target, const raster::Camera& cam, raster::Image* mask);

Dataset generate_synthetic(const SyntheticOptions& opt);

void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// 10 log10(1 / MSE) over all pixels and channels after compositing both
/// images onto black with the reference mask; 99 when MSE < 1e-10.
double psnr(const raster::Image& rendered, const raster::Image& reference, const raster::Image& reference_mask);
double psnr(const raster::Image& rendered, const raster::Image& reference);

/// Views held out for evaluation: every 8th (indices 7, 15, ...).
bool is_holdout(std::size_t view_index);

}  // namespace nmr::data
