#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nmr/dataset/dataset.hpp"
#include "nmr/raster/rasterize.hpp"

using namespace nmr;
using data::Dataset;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("nmr_test_dataset_" + tag);
  fs::remove_all(p);
  return p;
}

data::SyntheticOptions small_options() {
  data::SyntheticOptions o;
  o.views = 8;
  o.width = 48;
  o.height = 40;
  o.mesh_level = 4;
  o.seed = 3;
  return o;
}

}  // namespace

TEST_CASE("psnr examples") {
  raster::Image a(4, 4, 3, 0.5f), b(4, 4, 3, 0.5f);
  CHECK(data::psnr(a, b) == 99.0);
  for (auto& x : b.data) x = 0.6f;  // MSE 0.01
  CHECK(data::psnr(a, b) == doctest::Approx(20.0).epsilon(1e-4));
  CHECK(data::psnr(a, b) == doctest::Approx(data::psnr(b, a)));

  raster::Image mask(4, 4, 1, 0.0f);
  CHECK(data::psnr(a, b, mask) == 99.0);  // everything composited to black
  for (int p = 0; p < 8; ++p) mask.data[p] = 1.0f;
  CHECK(data::psnr(a, b, mask) == doctest::Approx(10 * std::log10(1 / 0.005)).epsilon(1e-4));

  raster::Image wrong(3, 4, 3);
  CHECK_THROWS_AS(data::psnr(a, wrong), data::DatasetError);
}

TEST_CASE("shape names round trip") {
  for (auto s : {data::Shape::Sphere, data::Shape::DisplacedSphere, data::Shape::BoxBlob})
    CHECK(data::parse_shape(data::shape_name(s)) == s);
  CHECK_THROWS_AS(data::parse_shape("teapot"), data::DatasetError);
}

TEST_CASE("synthetic targets fit the unit sphere") {
  for (auto s : {data::Shape::Sphere, data::Shape::DisplacedSphere, data::Shape::BoxBlob}) {
    const auto m = data::synthetic_target(s, 3);
    m.validate();
    double rmax = 0, rmin = 1e9;
    for (const auto& v : m.vertices) rmax = std::max(rmax, v.norm()), rmin = std::min(rmin, v.norm());
    CHECK(rmax == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(rmin > 0.3);
    REQUIRE(m.colors.size() == m.vertex_count());
    for (const auto& c : m.colors) CHECK((c.minCoeff() >= 0 && c.maxCoeff() <= 1));
    if (s == data::Shape::Sphere) CHECK(rmin == doctest::Approx(0.9).epsilon(1e-12));
    else CHECK(rmax - rmin > 0.05);
  }
}

TEST_CASE("synthetic cameras are rigid and see the whole target") {
  const auto target = data::synthetic_target(data::Shape::DisplacedSphere, 4);
  for (int n : {2, 8, 24, 31}) {
    const auto cams = data::synthetic_cameras(n, 64, 48, 11);
    REQUIRE(int(cams.size()) == n);
    for (const auto& c : cams) {
      c.validate();
      CHECK((c.R * c.R.transpose() - raster::Mat3::Identity()).norm() < 1e-10);
      CHECK(c.R.determinant() == doctest::Approx(1.0));
      CHECK(c.center().norm() == doctest::Approx(2.5));
      const auto proj = raster::project_vertices(c, target.vertices);
      bool inside = true;
      for (std::size_t k = 0; k < proj.screen.size(); ++k) {
        const auto& s = proj.screen[k];
        inside = inside && proj.valid[k] && s.x() > 0 && s.x() < c.width && s.y() > 0 && s.y() < c.height;
      }
      CHECK(inside);
    }
  }
  // Same seed, same rig; different seed, different azimuths.
  const auto a = data::synthetic_cameras(8, 32, 32, 5), b = data::synthetic_cameras(8, 32, 32, 5),
             c = data::synthetic_cameras(8, 32, 32, 6);
  CHECK(a[3].R == b[3].R);
  CHECK(!(a[3].R == c[3].R));
}

TEST_CASE("shading oracle: mask matches coverage, background black, lit pixels bounded") {
  const auto target = data::synthetic_target(data::Shape::Sphere, 4);
  const auto cam = data::synthetic_cameras(4, 48, 48, 0)[1];
  raster::Image mask;
  const auto img = data::shade_oracle(target, cam, &mask);
  const auto frame = raster::rasterize(cam, target.vertices, target.faces);
  std::size_t fg = 0;
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    CHECK(mask.data[p] == (frame.covered(p) ? 1.0f : 0.0f));
    if (frame.covered(p)) ++fg;
    for (int ch = 0; ch < 3; ++ch) CHECK((img.at(p, ch) >= 0.0f && img.at(p, ch) <= 1.0f));
  }
  CHECK(fg > img.pixel_count() / 10);
  CHECK(img.at(0, 0) == 0.0f);
  // Interior pixels are brighter than zero: ambient term.
  const std::size_t centre = 24 * 48 + 24;
  REQUIRE(frame.covered(centre));
  CHECK(img.at(centre, 0) > 0.05f);
}

TEST_CASE("generate, save and load round trip") {
  const auto dir = temp_dir("roundtrip");
  const Dataset ds = data::generate_synthetic(small_options());
  REQUIRE(ds.views.size() == 8);
  REQUIRE(ds.gt_mesh.has_value());
  data::save_dataset(ds, dir);
  std::ofstream(dir / "README.txt") << "extra files are ignored\n";
  std::ofstream(dir / "images" / "notes.md") << "x\n";

  const Dataset back = data::load_dataset(dir);
  REQUIRE(back.views.size() == ds.views.size());
  for (std::size_t i = 0; i < ds.views.size(); ++i) {
    const auto &a = ds.views[i], &b = back.views[i];
    CHECK(a.name == b.name);
    CHECK(a.camera.K == b.camera.K);
    CHECK(a.camera.R == b.camera.R);
    CHECK(a.camera.t == b.camera.t);
    CHECK(a.camera.width == b.camera.width);
    double worst = 0;
    for (std::size_t k = 0; k < a.image.data.size(); ++k)
      worst = std::max(worst, double(std::abs(a.image.data[k] - b.image.data[k])));
    CHECK(worst <= 0.5 / 255 + 1e-6);
    CHECK(a.mask.data == b.mask.data);
  }
  REQUIRE(back.gt_mesh.has_value());
  CHECK(back.gt_mesh->vertex_count() == ds.gt_mesh->vertex_count());
  CHECK(back.gt_mesh->faces == ds.gt_mesh->faces);
  CHECK(back.view("view_002").name == "view_002");
  CHECK_THROWS_AS(back.view("nope"), data::DatasetError);
  fs::remove_all(dir);
}

TEST_CASE("generation is deterministic per seed") {
  const Dataset a = data::generate_synthetic(small_options());
  const Dataset b = data::generate_synthetic(small_options());
  for (std::size_t i = 0; i < a.views.size(); ++i) CHECK(a.views[i].image.data == b.views[i].image.data);
}

TEST_CASE("load errors name the offending view") {
  const auto dir = temp_dir("errors");
  data::SyntheticOptions o = small_options();
  o.views = 3;
  data::save_dataset(data::generate_synthetic(o), dir);

  fs::remove(dir / "masks" / "view_001.png");
  try {
    data::load_dataset(dir);
    FAIL("expected an error");
  } catch (const data::DatasetError& e) {
    CHECK(std::string(e.what()).find("view_001") != std::string::npos);
  }

  CHECK_THROWS_AS(data::load_dataset(dir / "missing"), data::DatasetError);
  std::ofstream(dir / "cameras.json") << "[{\"name\": \"view_000\", \"width\": 48}]";
  try {
    data::load_dataset(dir);
    FAIL("expected an error");
  } catch (const data::DatasetError& e) {
    CHECK(std::string(e.what()).find("view_000") != std::string::npos);
  }
  std::ofstream(dir / "cameras.json") << "{ not json";
  CHECK_THROWS_AS(data::load_dataset(dir), data::DatasetError);
  fs::remove_all(dir);
}

TEST_CASE("masks are thresholded at 127") {
  const auto dir = temp_dir("threshold");
  data::SyntheticOptions o = small_options();
  o.views = 2;
  Dataset ds = data::generate_synthetic(o);
  data::save_dataset(ds, dir);
  raster::Image m(o.width, o.height, 1, 0.0f);
  m.data[0] = 127.0f / 255;
  m.data[1] = 128.0f / 255;
  raster::save_png(m, dir / "masks" / "view_000.png");
  const Dataset back = data::load_dataset(dir);
  CHECK(back.views[0].mask.data[0] == 0.0f);
  CHECK(back.views[0].mask.data[1] == 1.0f);
  fs::remove_all(dir);
}

TEST_CASE("validate rejects mismatched sizes") {
  Dataset ds = data::generate_synthetic(small_options());
  ds.views[2].mask = raster::Image(10, 10, 1);
  try {
    ds.validate();
    FAIL("expected an error");
  } catch (const data::DatasetError& e) {
    CHECK(std::string(e.what()).find(ds.views[2].name) != std::string::npos);
  }
  CHECK_THROWS_AS(Dataset{}.validate(), data::DatasetError);
}

TEST_CASE("holdout is every eighth view") {
  CHECK(!data::is_holdout(0));
  CHECK(data::is_holdout(7));
  CHECK(data::is_holdout(15));
  std::size_t n = 0;
  for (std::size_t i = 0; i < 24; ++i) n += data::is_holdout(i);
  CHECK(n == 3);
}
