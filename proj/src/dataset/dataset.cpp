#include "nmr/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "nmr/autodiff/ops.hpp"
#include "nmr/fields/networks.hpp"
#include "nmr/mesh/io.hpp"
#include "nmr/mesh/operations.hpp"
#include "nmr/raster/render.hpp"

namespace nmr::data {

namespace fs = std::filesystem;
using mesh::Vec3;
using json = nlohmann::json;

namespace {

constexpr double kTargetRadius = 0.9;
constexpr double kCameraRadius = 2.5;
constexpr double kFocalScale = 1.0;  // times the shorter image side

Vec3 albedo(const Vec3& x) {
  return Vec3(0.55 + 0.3 * std::sin(2.1 * x.x() + 0.3), 0.5 + 0.3 * std::sin(1.7 * x.y() + 1.1),
              0.45 + 0.3 * std::sin(2.3 * x.z() + 2.0));
}

const Vec3& light_dir() {
  static const Vec3 l = Vec3(0.4, -0.5, 0.75).normalized();
  return l;
}

void check_image(const View& v, const raster::Image& img, int channels, const char* what) {
  if (img.width != v.camera.width || img.height != v.camera.height || img.channels != channels ||
      img.data.size() != img.pixel_count() * channels)
    throw DatasetError("view '" + v.name + "': " + what + " is " + std::to_string(img.width) + "x" +
                       std::to_string(img.height) + "x" + std::to_string(img.channels) + ", camera expects " +
                       std::to_string(v.camera.width) + "x" + std::to_string(v.camera.height) + "x" +
                       std::to_string(channels));
}

std::vector<double> json_numbers(const json& j, const std::string& key, std::size_t n, const std::string& view) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != n)
    throw DatasetError("cameras.json: view '" + view + "': field '" + key + "' must be an array of " +
                       std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& x : j[key]) {
    if (!x.is_number()) throw DatasetError("cameras.json: view '" + view + "': field '" + key + "' is not numeric");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

void Dataset::validate() const {
  if (views.empty()) throw DatasetError("dataset has no views");
  for (const auto& v : views) {
    try {
      v.camera.validate();
    } catch (const raster::CameraError& e) {
      throw DatasetError("view '" + v.name + "': " + e.what());
    }
    check_image(v, v.image, 3, "image");
    check_image(v, v.mask, 1, "mask");
  }
  if (!(normalization.scale > 0) || !std::isfinite(normalization.scale))
    throw DatasetError("normalization scale must be positive");
}

const View& Dataset::view(const std::string& name) const {
  for (const auto& v : views)
    if (v.name == name) return v;
  std::string list;
  for (const auto& v : views) list += (list.empty() ? "" : ", ") + v.name;
  throw DatasetError("unknown view '" + name + "'; available: " + list);
}

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> n;
  for (const auto& v : views) n.push_back(v.name);
  return n;
}

Shape parse_shape(const std::string& s) {
  if (s == "sphere") return Shape::Sphere;
  if (s == "displaced_sphere") return Shape::DisplacedSphere;
  if (s == "box_blob") return Shape::BoxBlob;
  throw DatasetError("unknown shape '" + s + "' (sphere, displaced_sphere, box_blob)");
}

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::Sphere: return "sphere";
    case Shape::DisplacedSphere: return "displaced_sphere";
    case Shape::BoxBlob: return "box_blob";
  }
  return "?";
}

mesh::TriangleMesh synthetic_target(Shape shape, int level) {
  auto m = mesh::make_icosphere(level);
  for (auto& v : m.vertices) {
    const Vec3 d = v.normalized();
    double r = 1.0;
    if (shape == Shape::DisplacedSphere) {
      const double theta = std::acos(std::clamp(d.z(), -1.0, 1.0));
      const double phi = std::atan2(d.y(), d.x());
      r = 1.0 + 0.15 * std::sin(4 * theta) * std::cos(3 * phi);
    } else if (shape == Shape::BoxBlob) {
      // Rounded box with one smooth bump.
      r = std::pow(std::pow(d.x(), 4) + std::pow(d.y(), 4) + std::pow(d.z(), 4), -0.25);
      const Vec3 bump = Vec3(0.5, -0.4, 0.77).normalized();
      r += 0.25 * std::exp(-(d - bump).squaredNorm() / 0.08);
    }
    v = r * d;
  }
  double rmax = 0;
  for (const auto& v : m.vertices) rmax = std::max(rmax, v.norm());
  for (auto& v : m.vertices) v *= kTargetRadius / rmax;
  m.colors.resize(m.vertex_count());
  for (std::size_t i = 0; i < m.vertex_count(); ++i) m.colors[i] = albedo(m.vertices[i]);
  m.normals = mesh::vertex_normals(m).normals;
  return m;
}

std::vector<raster::Camera> synthetic_cameras(int views, int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.15, 0.15);
  const int ring = (views + 1) / 2, upper = views - ring;
  const double focal = kFocalScale * std::min(width, height);
  std::vector<raster::Camera> cams;
  auto add = [&](double azimuth, double elevation) {
    const Vec3 eye = kCameraRadius * Vec3(std::cos(elevation) * std::cos(azimuth),
                                          std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
    cams.push_back(raster::Camera::look_at(eye, Vec3::Zero(), Vec3(0, 0, 1), width, height, focal));
  };
  for (int k = 0; k < ring; ++k) add(2 * std::numbers::pi * k / ring + jitter(rng), 0.12);
  for (int k = 0; k < upper; ++k) {
    const double elevation = 0.45 + 0.75 * (k + 0.5) / upper;
    add(k * 2.399963229728653 + jitter(rng), elevation);  // golden angle
  }
  return cams;
}

raster::Image shade_oracle(const mesh::TriangleMesh& target, const raster::Camera& cam, raster::Image* mask) {
  using TD = ad::Tensor<double>;
  raster::SurfaceAttributes<double> s;
  s.positions = fields::positions_tensor<double>(target.vertices);
  s.normals = fields::positions_tensor<double>(target.has_normals() ? target.normals : mesh::vertex_normals(target).normals);
  s.features = fields::positions_tensor<double>(target.colors);  // albedo rides in the feature slot
  const Vec3 L = light_dir();
  raster::PixelShader<double> shader = [&](const raster::PixelAttributes<double>& px) {
    const std::size_t P = px.pixels.size();
    std::vector<double> out(P * 3);
    const auto n = px.normals.data(), v = px.view_dirs.data(), a = px.features.data();
    for (std::size_t i = 0; i < P; ++i) {
      const Vec3 ni(n[i * 3], n[i * 3 + 1], n[i * 3 + 2]), vi(v[i * 3], v[i * 3 + 1], v[i * 3 + 2]);
      const double lambert = 0.25 + 0.75 * std::max(0.0, ni.dot(L));
      const double spec = 0.3 * std::pow(std::max(0.0, ni.dot((L + vi).normalized())), 32.0);
      for (int c = 0; c < 3; ++c) out[i * 3 + c] = a[i * 3 + c] * lambert + spec;
    }
    return TD({P, 3}, std::move(out));
  };
  const auto r = raster::render(cam, s, target.faces, raster::face_neighbors(target.faces), shader, Vec3::Zero());
  raster::Image img = raster::tensor_image(r.image, cam.width, cam.height);
  if (mask) {
    *mask = raster::Image(cam.width, cam.height, 1);
    for (std::size_t p = 0; p < mask->pixel_count(); ++p) mask->data[p] = r.gbuffer.frame.covered(p) ? 1.0f : 0.0f;
  }
  return img;
}

Dataset generate_synthetic(const SyntheticOptions& opt) {
  if (opt.views < 2) throw DatasetError("generate: at least 2 views are required, got " + std::to_string(opt.views));
  if (opt.width <= 0 || opt.height <= 0) throw DatasetError("generate: image size must be positive");
  Dataset ds;
  ds.gt_mesh = synthetic_target(opt.shape, opt.mesh_level);
  const auto cams = synthetic_cameras(opt.views, opt.width, opt.height, opt.seed);
  for (std::size_t i = 0; i < cams.size(); ++i) {
    View v;
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03zu", i);
    v.name = name;
    v.camera = cams[i];
    v.image = shade_oracle(*ds.gt_mesh, v.camera, &v.mask);
    ds.views.push_back(std::move(v));
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  json cams = json::array();
  for (const auto& v : ds.views) {
    json j;
    j["name"] = v.name;
    j["width"] = v.camera.width;
    j["height"] = v.camera.height;
    std::vector<double> K, R;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) K.push_back(v.camera.K(r, c)), R.push_back(v.camera.R(r, c));
    j["K"] = K;
    j["R"] = R;
    j["t"] = {v.camera.t.x(), v.camera.t.y(), v.camera.t.z()};
    cams.push_back(j);
    raster::save_png(v.image, dir / "images" / (v.name + ".png"));
    raster::save_png(v.mask, dir / "masks" / (v.name + ".png"));
  }
  std::ofstream(dir / "cameras.json") << cams.dump(2) << "\n";
  if (ds.normalization.scale != 1.0 || !ds.normalization.translation.isZero()) {
    json n;
    n["scale"] = ds.normalization.scale;
    n["translation"] = {ds.normalization.translation.x(), ds.normalization.translation.y(),
                        ds.normalization.translation.z()};
    std::ofstream(dir / "normalization.json") << n.dump(2) << "\n";
  }
  if (ds.gt_mesh) mesh::save_ply(*ds.gt_mesh, dir / "gt_mesh.ply");
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError("dataset directory '" + dir.string() + "' does not exist");
  const fs::path cam_path = dir / "cameras.json";
  std::ifstream in(cam_path);
  if (!in) throw DatasetError("missing " + cam_path.string());
  json cams;
  try {
    in >> cams;
  } catch (const json::parse_error& e) {
    throw DatasetError(cam_path.string() + ": " + e.what());
  }
  if (!cams.is_array() || cams.empty()) throw DatasetError(cam_path.string() + ": expected a non-empty array");
  Dataset ds;
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const json& j = cams[i];
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
      throw DatasetError("cameras.json: entry " + std::to_string(i) + " has no name");
    View v;
    v.name = j["name"].get<std::string>();
    if (!j.contains("width") || !j.contains("height") || !j["width"].is_number_integer() ||
        !j["height"].is_number_integer())
      throw DatasetError("cameras.json: view '" + v.name + "': width/height missing");
    v.camera.width = j["width"].get<int>();
    v.camera.height = j["height"].get<int>();
    const auto K = json_numbers(j, "K", 9, v.name), R = json_numbers(j, "R", 9, v.name),
               t = json_numbers(j, "t", 3, v.name);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) v.camera.K(r, c) = K[r * 3 + c], v.camera.R(r, c) = R[r * 3 + c];
    v.camera.t = Vec3(t[0], t[1], t[2]);
    const fs::path ip = dir / "images" / (v.name + ".png"), mp = dir / "masks" / (v.name + ".png");
    if (!fs::exists(ip)) throw DatasetError("view '" + v.name + "': missing image " + ip.string());
    if (!fs::exists(mp)) throw DatasetError("view '" + v.name + "': missing mask " + mp.string());
    try {
      v.image = raster::load_png(ip, 3);
      v.mask = raster::load_png(mp, 1);
    } catch (const raster::ImageError& e) {
      throw DatasetError("view '" + v.name + "': " + e.what());
    }
    for (auto& m : v.mask.data) m = m > 127.5f / 255.0f ? 1.0f : 0.0f;
    ds.views.push_back(std::move(v));
  }
  if (fs::exists(dir / "normalization.json")) {
    json n;
    std::ifstream(dir / "normalization.json") >> n;
    ds.normalization.scale = n.at("scale").get<double>();
    const auto tr = n.at("translation").get<std::vector<double>>();
    if (tr.size() != 3) throw DatasetError("normalization.json: translation needs 3 values");
    ds.normalization.translation = Vec3(tr[0], tr[1], tr[2]);
  }
  if (fs::exists(dir / "gt_mesh.ply")) ds.gt_mesh = mesh::load_mesh(dir / "gt_mesh.ply");
  ds.validate();
  return ds;
}

double psnr(const raster::Image& rendered, const raster::Image& reference, const raster::Image& reference_mask) {
  if (rendered.width != reference.width || rendered.height != reference.height ||
      rendered.channels != reference.channels || rendered.data.size() != reference.data.size())
    throw DatasetError("psnr: image sizes differ");
  if (reference_mask.pixel_count() != reference.pixel_count() || reference_mask.channels != 1)
    throw DatasetError("psnr: mask size differs from the image");
  double se = 0;
  const int C = reference.channels;
  for (std::size_t p = 0; p < reference.pixel_count(); ++p) {
    const double m = reference_mask.data[p] > 0.5f ? 1.0 : 0.0;
    for (int c = 0; c < C; ++c) {
      const double d = m * (double(rendered.at(p, c)) - double(reference.at(p, c)));
      se += d * d;
    }
  }
  const double mse = se / double(reference.data.size());
  if (mse < 1e-10) return 99.0;
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const raster::Image& rendered, const raster::Image& reference) {
  raster::Image ones(reference.width, reference.height, 1, 1.0f);
  return psnr(rendered, reference, ones);
}

bool is_holdout(std::size_t view_index) { return view_index % 8 == 7; }

}  // namespace nmr::data
