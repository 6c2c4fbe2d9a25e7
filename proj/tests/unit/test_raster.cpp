#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <Eigen/Geometry>

#include "nmr/autodiff/ops.hpp"
#include "nmr/fields/networks.hpp"
#include "nmr/mesh/operations.hpp"
#include "nmr/raster/image_io.hpp"
#include "nmr/raster/render.hpp"
#include "support/gradcheck.hpp"
#include "support/raster_oracle.hpp"

using namespace nmr;
using raster::Camera;
using raster::Vec2;
using raster::Vec3;
using TD = ad::Tensor<double>;
using namespace nmr::testing;

namespace {

void expect_grad_ok(const testing::GradCheckReport& r, double tol = 1e-5) {
  INFO(r.worst);
  INFO(r.worst_small);
  CHECK(r.compared > 0);
  CHECK(r.max_rel_error < tol);
  CHECK(r.max_abs_error_small < 1e-7);
}

}  // namespace

TEST_CASE("camera projection examples") {
  const Camera c = axis_camera(64, 48, 50);
  const std::vector<Vec3> pts = {{0, 0, 1}, {0.1, -0.2, 1}, {0, 0, 2}, {0, 0, 0.005}};
  const auto p = raster::project_vertices(c, pts);
  CHECK(p.screen[0].x() == doctest::Approx(32));
  CHECK(p.screen[0].y() == doctest::Approx(24));
  CHECK(p.depth[2] == 2.0);
  CHECK(p.valid[3] == 0);
  CHECK(p.valid[0] == 1);
  // Doubling the focal length doubles the offset from the principal point.
  const Camera c2 = axis_camera(64, 48, 100);
  const auto p2 = raster::project_vertices(c2, pts);
  CHECK((p2.screen[1] - Vec2(32, 24)).x() == doctest::Approx(2 * (p.screen[1] - Vec2(32, 24)).x()));
  CHECK((p2.screen[1] - Vec2(32, 24)).y() == doctest::Approx(2 * (p.screen[1] - Vec2(32, 24)).y()));

  // Analytic Jacobian vs central differences.
  const Camera lc = Camera::look_at({2, -1, 1.5}, {0, 0, 0}, {0, 0, 1}, 64, 48, 60);
  const Vec3 x(0.2, 0.3, -0.1);
  const auto J = raster::projection_jacobian(lc, x);
  for (int a = 0; a < 3; ++a) {
    Vec3 dx = Vec3::Zero();
    dx[a] = 1e-6;
    const std::vector<Vec3> pp = {x + dx, x - dx};
    const auto q = raster::project_vertices(lc, pp);
    const Vec2 fd = (q.screen[0] - q.screen[1]) / 2e-6;
    CHECK(J(0, a) == doctest::Approx(fd.x()).epsilon(1e-6));
    CHECK(J(1, a) == doctest::Approx(fd.y()).epsilon(1e-6));
  }
}

TEST_CASE("camera validation and look_at") {
  Camera c = axis_camera(8, 8, 10);
  CHECK_NOTHROW(c.validate());
  c.R(0, 1) = 0.01;
  CHECK_THROWS_AS(c.validate(), raster::CameraError);
  c = axis_camera(8, 8, 10);
  c.R = -Eigen::Matrix3d::Identity();  // determinant -1
  CHECK_THROWS_AS(c.validate(), raster::CameraError);
  c = axis_camera(8, 8, -10);
  CHECK_THROWS_AS(c.validate(), raster::CameraError);
  c = axis_camera(0, 8, 10);
  CHECK_THROWS_AS(c.validate(), raster::CameraError);

  const Vec3 eye(2.5, 0.3, 1.0);
  const Camera l = Camera::look_at(eye, Vec3::Zero(), {0, 0, 1}, 32, 32, 35);
  CHECK_NOTHROW(l.validate());
  CHECK((l.center() - eye).norm() < 1e-12);
  const std::vector<Vec3> o = {Vec3::Zero()};
  const auto p = raster::project_vertices(l, o);
  CHECK(p.screen[0].x() == doctest::Approx(16));
  CHECK(p.screen[0].y() == doctest::Approx(16));
  // World up maps to screen up (decreasing y).
  const std::vector<Vec3> up = {Vec3(0, 0, 0.1)};
  CHECK(raster::project_vertices(l, up).screen[0].y() < 16);
  const Vec3 d = l.ray_direction(16, 16).normalized();
  CHECK((d - (-eye).normalized()).norm() < 1e-12);
}

TEST_CASE("rasterize: full-screen triangle, depth order, ties, empty mesh") {
  const Camera cam = axis_camera(16, 16, 16);
  {
    std::vector<Vec3> v = {unproject(cam, -40, -40, 2), unproject(cam, 80, -40, 2), unproject(cam, -40, 80, 2)};
    std::vector<mesh::Face> f = {facing(v, {0, 1, 2})};
    const auto fr = raster::rasterize(cam, v, f);
    CHECK(fr.covered_count() == 256);
    // Unit attributes interpolate to exactly 1 (up to rounding).
    const TD ones({3, 2}, std::vector<double>(6, 1.0));
    const auto px = fr.covered_pixels();
    const auto a = raster::interpolate(ones, tensor_of<double>(v), f, fr, cam, px);
    for (double x : a.data()) REQUIRE(std::abs(x - 1.0) < 1e-12);
    for (std::size_t p = 0; p < 256; ++p) REQUIRE(std::abs(fr.depth[p] - 2.0) < 1e-12);
  }
  {
    // Two stacked near-identical triangles: the nearer owns every pixel.
    std::vector<Vec3> v;
    for (double z : {3.0, 2.0})
      for (auto s : {Vec2(1, 1), Vec2(15, 2), Vec2(3, 15)}) v.push_back(unproject(cam, s.x(), s.y(), z));
    std::vector<mesh::Face> f = {facing(v, {0, 1, 2}), facing(v, {3, 4, 5})};
    const auto fr = raster::rasterize(cam, v, f);
    REQUIRE(fr.covered_count() > 20);
    for (std::size_t p = 0; p < fr.pixel_count(); ++p)
      if (fr.covered(p)) REQUIRE(fr.tri[p] == 1);
  }
  {
    // Identical triangles at equal depth: the lower index wins.
    std::vector<Vec3> v = {unproject(cam, 1, 1, 2), unproject(cam, 15, 2, 2), unproject(cam, 3, 15, 2)};
    std::vector<mesh::Face> f = {facing(v, {0, 1, 2}), facing(v, {0, 1, 2})};
    const auto fr = raster::rasterize(cam, v, f);
    for (std::size_t p = 0; p < fr.pixel_count(); ++p)
      if (fr.covered(p)) REQUIRE(fr.tri[p] == 0);
    // Back face: not drawn.
    std::vector<mesh::Face> back = {{f[0][0], f[0][2], f[0][1]}};
    CHECK(raster::rasterize(cam, v, back).covered_count() == 0);
  }
  {
    const auto fr = raster::rasterize(cam, std::vector<Vec3>{}, {});
    CHECK(fr.covered_count() == 0);
    CHECK(fr.pixel_count() == 256);
  }
}

TEST_CASE("rasterize matches brute-force oracles on 200 random scenes") {
  const Camera cam = axis_camera(32, 32, 30);
  std::mt19937_64 rng(2024);
  std::size_t covered_total = 0;
  for (int scene = 0; scene < 200; ++scene) {
    std::vector<mesh::Face> faces;
    const auto v = random_scene(rng, cam, 1 + scene % 24, faces);
    const auto fast = raster::rasterize(cam, v, faces);
    const auto ref = raster::reference::rasterize(cam, v, faces);
    REQUIRE(fast.tri == ref.tri);
    REQUIRE(fast.u == ref.u);
    REQUIRE(fast.v == ref.v);
    REQUIRE(fast.depth == ref.depth);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const std::size_t p = std::size_t(y) * 32 + x;
        const auto hits = oracle_pixel(cam, v, faces, x, y);
        if (hits.empty()) {
          REQUIRE(fast.tri[p] == raster::kNoTriangle);
          continue;
        }
        ++covered_total;
        REQUIRE(fast.tri[p] == hits[0].id);
        REQUIRE(fast.u[p] == hits[0].u);
        REQUIRE(fast.v[p] == hits[0].v);
        REQUIRE(fast.depth[p] == hits[0].depth);
      }
    }
  }
  CHECK(covered_total > 20000);
}

TEST_CASE("barycentric invariants on covered pixels") {
  const Camera cam = Camera::look_at({0.3, -2.4, 0.9}, {0, 0, 0}, {0, 0, 1}, 48, 48, 50);
  const auto ico = mesh::make_icosphere(3);
  const auto fr = raster::rasterize(cam, ico.vertices, ico.faces);
  REQUIRE(fr.covered_count() > 200);
  const Vec3 o = cam.center();
  for (std::size_t p = 0; p < fr.pixel_count(); ++p) {
    if (!fr.covered(p)) {
      REQUIRE(fr.u[p] == 0);
      REQUIRE(fr.depth[p] == 0);
      continue;
    }
    const double u = fr.u[p], v = fr.v[p];
    REQUIRE(u >= -1e-6);
    REQUIRE(v >= -1e-6);
    REQUIRE(u + v <= 1 + 1e-6);
    REQUIRE(std::abs(u + v + (1 - u - v) - 1.0) < 1e-6);
    // Perspective-corrected weights agree with the ray intersection.
    const auto& f = ico.faces[std::size_t(fr.tri[p])];
    const auto w = raster::ray_barycentrics(o, cam.ray_direction(p % 48 + 0.5, double(p / 48) + 0.5),
                                            ico.vertices[f[0]], ico.vertices[f[1]], ico.vertices[f[2]]);
    REQUIRE(std::abs(w[0] - fr.pu[p]) < 1e-9);
    REQUIRE(std::abs(w[1] - fr.pv[p]) < 1e-9);
    REQUIRE(w[0] >= -1e-6);
    REQUIRE(w[1] >= -1e-6);
    REQUIRE(w[2] >= -1e-6);
  }
}

TEST_CASE("ray barycentrics: corners and centroid") {
  const Vec3 a(0, 0, 2), b(1, 0, 2.5), c(0, 1, 3);
  const Vec3 o(0.1, 0.2, -1);
  auto w = raster::ray_barycentrics(o, a - o, a, b, c);
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(std::abs(w[1]) < 1e-12);
  const Vec3 g = (a + b + c) / 3;
  w = raster::ray_barycentrics(o, g - o, a, b, c);
  for (double x : w) CHECK(x == doctest::Approx(1.0 / 3));
}

TEST_CASE("interpolation gradients match finite differences") {
  const Camera cam = Camera::look_at({0.4, -2.5, 0.7}, {0, 0, 0}, {0, 0, 1}, 20, 20, 22);
  const auto ico = mesh::make_icosphere(1);
  const auto fr = raster::rasterize(cam, ico.vertices, ico.faces);
  const auto px = fr.covered_pixels();
  REQUIRE(px.size() > 50);
  const std::size_t V = ico.vertex_count();
  TD attr({V, 4}, testing::uniform_values(V * 4, 3, -1, 1));
  TD pos = tensor_of<double>(ico.vertices);
  SUBCASE("attributes: gradient equals barycentric weight") {
    // Single-pixel loss: d a_p / d a_vertex is exactly the weight.
    const std::vector<std::uint32_t> one = {px[px.size() / 2]};
    attr.set_requires_grad(true);
    {
      ad::Tape<double> tape;
      ad::Tape<double>::Scope s(tape);
      tape.backward(ad::sum(ad::columns(raster::interpolate(attr, pos, ico.faces, fr, cam, one), 0, 1)));
    }
    const auto& f = ico.faces[std::size_t(fr.tri[one[0]])];
    const double w[3] = {fr.pu[one[0]], fr.pv[one[0]], 1 - fr.pu[one[0]] - fr.pv[one[0]]};
    for (int k = 0; k < 3; ++k) CHECK(attr.grad()[f[k] * 4] == doctest::Approx(w[k]).epsilon(1e-9));
    attr.set_requires_grad(false);
    attr.clear_grad();
  }
  SUBCASE("attributes and positions, finite differences") {
    auto r = testing::check_gradients({attr, pos}, [&] {
      return testing::contract(raster::interpolate(attr, pos, ico.faces, fr, cam, px), 21);
    });
    expect_grad_ok(r);
  }
  SUBCASE("positions feeding both inputs") {
    auto r = testing::check_gradients({pos}, [&] {
      return testing::contract(raster::interpolate(pos, pos, ico.faces, fr, cam, px), 22);
    });
    expect_grad_ok(r);
  }
  CHECK_THROWS(raster::interpolate(attr, pos, ico.faces, fr, cam, std::vector<std::uint32_t>{0}));
}

TEST_CASE("antialias coverage band examples") {
  const Camera cam = axis_camera(32, 32, 16);
  auto row_coverage = [&](double xe) {
    const auto s = edge_scene(cam, xe, xe);
    const auto fr = raster::rasterize(cam, s.v, s.f);
    const auto m = raster::soft_mask(tensor_of<double>(s.v), s.f, raster::face_neighbors(s.f), fr, cam);
    std::vector<double> row(32);
    for (int x = 0; x < 32; ++x) row[x] = m.at(16 * 32 + x);
    return row;
  };
  auto r = row_coverage(10.5);  // exactly on the center of pixel 10
  CHECK(r[10] == doctest::Approx(0.5));
  CHECK(r[9] == 1.0);
  CHECK(r[11] == 0.0);
  for (int x = 0; x < 9; ++x) CHECK(r[x] == 1.0);
  r = row_coverage(10.8);
  CHECK(r[10] == doctest::Approx(0.8));
  CHECK(r[11] == 0.0);
  r = row_coverage(11.2);
  CHECK(r[10] == 1.0);
  CHECK(r[11] == doctest::Approx(0.2));
  r = row_coverage(11.0);  // 0.5 inside pixel 10, 0.5 outside 11
  CHECK(r[10] == doctest::Approx(1.0));
  CHECK(r[11] == doctest::Approx(0.0));
}

TEST_CASE("soft mask stays in [0,1] and equals the hard mask off the band") {
  const Camera cam = Camera::look_at({0.3, -2.4, 1.2}, {0, 0, 0}, {0, 0, 1}, 48, 40, 45);
  auto ico = mesh::make_icosphere(2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> j(-0.08, 0.08);
  for (auto& v : ico.vertices) v += Vec3(j(rng), j(rng), j(rng));
  const auto fr = raster::rasterize(cam, ico.vertices, ico.faces);
  const auto m = raster::soft_mask(tensor_of<double>(ico.vertices), ico.faces, raster::face_neighbors(ico.faces), fr, cam);
  const int W = 48, H = 40;
  std::size_t band = 0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t p = std::size_t(y) * W + x;
      const double s = m.at(p);
      REQUIRE(s >= 0.0);
      REQUIRE(s <= 1.0);
      const double hard = fr.covered(p) ? 1.0 : 0.0;
      if (s == hard) continue;
      ++band;
      // Differs only next to a pixel of different coverage.
      bool edge = false;
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        const int xx = x + dx, yy = y + dy;
        if (xx < 0 || yy < 0 || xx >= W || yy >= H) continue;
        if (fr.covered(std::size_t(yy) * W + xx) != fr.covered(p)) edge = true;
      }
      REQUIRE(edge);
    }
  }
  CHECK(band > 20);
  // Parallel and serial passes agree bitwise.
  std::vector<double> hard(fr.pixel_count());
  for (std::size_t p = 0; p < hard.size(); ++p) hard[p] = fr.covered(p);
  const TD hm({hard.size(), 1}, hard);
  const auto nb = raster::face_neighbors(ico.faces);
  const auto a = raster::antialias(hm, tensor_of<double>(ico.vertices), ico.faces, nb, fr, cam);
  const auto b = raster::reference::antialias(hm, tensor_of<double>(ico.vertices), ico.faces, nb, fr, cam);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST_CASE("silhouette: mask-sum derivative under translation") {
  const Camera cam = axis_camera(64, 64, 64);
  // Slanted right edge spanning the full frame height.
  const auto s = edge_scene(cam, 30.3, 37.9);
  const double z = 2.0;
  const Vec3 px_dir(z / cam.K(0, 0), 0, 0);  // world shift of one pixel at depth z
  auto shifted = [&](double pixels) {
    auto v = s.v;
    for (auto& x : v) x += pixels * px_dir;
    return v;
  };
  const double fd = (soft_mask_sum(cam, shifted(0.25), s.f) - soft_mask_sum(cam, shifted(-0.25), s.f)) / 0.5;
  // Expected rate: the edge's vertical extent inside the frame.
  CHECK(fd == doctest::Approx(64.0).epsilon(0.05));
  // Analytic gradient along the translation.
  TD pos = tensor_of<double>(s.v, true);
  const auto fr = raster::rasterize(cam, s.v, s.f);
  {
    ad::Tape<double> tape;
    ad::Tape<double>::Scope sc(tape);
    tape.backward(ad::sum(raster::soft_mask(pos, s.f, raster::face_neighbors(s.f), fr, cam)));
  }
  double analytic = 0;
  for (std::size_t v = 0; v < s.v.size(); ++v) analytic += pos.grad()[v * 3] * px_dir.x();
  CHECK(analytic == doctest::Approx(fd).epsilon(0.05));
  // A +0.25 px shift grows the mask by about 0.25 x edge extent.
  const double grow = soft_mask_sum(cam, shifted(0.25), s.f) - soft_mask_sum(cam, s.v, s.f);
  CHECK(grow == doctest::Approx(0.25 * 64).epsilon(0.05));
}

TEST_CASE("antialias gradients match finite differences") {
  const Camera cam = Camera::look_at({0.4, -2.5, 0.8}, {0, 0, 0}, {0, 0, 1}, 24, 24, 24);
  const auto ico = mesh::make_icosphere(1);
  const auto fr = raster::rasterize(cam, ico.vertices, ico.faces);
  const auto nb = raster::face_neighbors(ico.faces);
  const std::size_t N = fr.pixel_count();
  TD img({N, 3}, testing::uniform_values(N * 3, 4, 0, 1));
  TD pos = tensor_of<double>(ico.vertices);
  testing::GradCheckOptions opt;
  opt.max_entries_per_param = 150;
  auto r = testing::check_gradients(
      {img, pos}, [&] { return testing::contract(raster::antialias(img, pos, ico.faces, nb, fr, cam), 9); }, opt);
  expect_grad_ok(r);
  // Positions alone: the silhouette vertices carry non-trivial gradients.
  opt.max_entries_per_param = 126;
  auto rp = testing::check_gradients(
      {pos}, [&] { return testing::contract(raster::antialias(img, pos, ico.faces, nb, fr, cam), 9); }, opt);
  expect_grad_ok(rp);
  CHECK(rp.compared >= 10);
}

TEST_CASE("render: zero shader gives the diffuse map, background elsewhere") {
  const Camera cam = Camera::look_at({0.2, -2.5, 0.6}, {0, 0, 0}, {0, 0, 1}, 32, 32, 30);
  const auto ico = mesh::make_icosphere(2);
  const std::size_t V = ico.vertex_count();
  raster::SurfaceAttributes<float> surf;
  surf.positions = tensor_of<float>(ico.vertices);
  surf.normals = tensor_of<float>(mesh::vertex_normals(ico).normals);
  const auto dv = testing::uniform_values(V * 3, 6, 0.2, 0.8);
  surf.diffuse = ad::Tensor<float>({V, 3}, std::vector<float>(dv.begin(), dv.end()));
  const auto fv = testing::uniform_values(V * 8, 7, -1, 1);
  surf.features = ad::Tensor<float>({V, 8}, std::vector<float>(fv.begin(), fv.end()));
  fields::AppearanceShader<float> shader(6, 8, -30.0, 3);
  raster::PixelShader<float> sh = [&](const raster::PixelAttributes<float>& p) {
    return shader(ad::concat<float>({p.normals, p.view_dirs}));
  };
  const Vec3 bg(0.1, 0.2, 0.3);
  const auto out = raster::render(cam, surf, ico.faces, raster::face_neighbors(ico.faces), sh, bg);
  const auto& gb = out.gbuffer;
  const std::size_t N = gb.frame.pixel_count();
  std::size_t interior = 0;
  for (std::size_t p = 0; p < N; ++p) {
    if (!gb.frame.covered(p)) {
      for (int a = 0; a < 3; ++a) REQUIRE(gb.position[p * 3 + a] == 0.0);
      for (int a = 0; a < 8; ++a) REQUIRE(gb.feature[p * 8 + a] == 0.0);
      if (gb.coverage[p] == 0.0)
        for (int a = 0; a < 3; ++a) REQUIRE(out.image.at(p * 3 + a) == doctest::Approx(bg[a]).epsilon(1e-6));
      continue;
    }
    // Unit normals in the g-buffer.
    const Vec3 n(gb.normal[p * 3], gb.normal[p * 3 + 1], gb.normal[p * 3 + 2]);
    REQUIRE(std::abs(n.norm() - 1) < 1e-5);
    if (gb.coverage[p] == 1.0) {
      ++interior;
      for (int a = 0; a < 3; ++a) REQUIRE(std::abs(out.image.at(p * 3 + a) - gb.diffuse[p * 3 + a]) < 1e-6);
    }
  }
  CHECK(interior > 200);
  CHECK(gb.feature_dim == 8);
}

TEST_CASE("render: sum(image) vertex gradient matches re-rendered finite differences") {
  const Camera cam = Camera::look_at({0.3, -2.2, 0.5}, {0, 0, 0}, {0, 0, 1}, 16, 16, 14);
  const auto ico = mesh::make_icosphere(1);
  const std::size_t V = ico.vertex_count();
  const auto dv = testing::uniform_values(V * 3, 8, 0.1, 0.6);
  const ad::Tensor<float> diffuse({V, 3}, std::vector<float>(dv.begin(), dv.end()));
  fields::AppearanceShader<float> shader(6, 8, -1.0, 4);
  raster::PixelShader<float> sh = [&](const raster::PixelAttributes<float>& p) {
    return ad::scale(shader(ad::concat<float>({p.normals, p.view_dirs})), 0.3f);
  };
  const mesh::FaceCorners corners(ico.faces);
  const auto nb = raster::face_neighbors(ico.faces);
  auto image_sum = [&](const ad::Tensor<float>& pos) {
    raster::SurfaceAttributes<float> s;
    s.positions = pos;
    s.normals = mesh::vertex_normals(pos, corners);
    s.diffuse = diffuse;
    const auto out = raster::render(cam, s, ico.faces, nb, sh, Vec3(0.0, 0.0, 0.0));
    return out.image;
  };
  // Pick the front-most vertex: it moves interior pixels and the silhouette.
  std::size_t vid = 0;
  double best = 1e9;
  for (std::size_t v = 0; v < V; ++v) {
    const double d = (ico.vertices[v] - cam.center()).norm();
    if (d < best) best = d, vid = v;
  }
  auto pos = tensor_of<float>(ico.vertices, true);
  {
    ad::Tape<float> tape;
    ad::Tape<float>::Scope s(tape);
    tape.backward(ad::sum(image_sum(pos)));
  }
  const double h = 1e-3;
  for (int a = 0; a < 3; ++a) {
    auto eval = [&](double delta) {
      auto v = ico.vertices;
      v[vid][a] += delta;
      const auto img = image_sum(tensor_of<float>(v));
      double s = 0;
      for (float x : img.data()) s += x;
      return s;
    };
    const double fd = (eval(h) - eval(-h)) / (2 * h);
    const double an = pos.grad()[vid * 3 + a];
    INFO("axis " << a << " analytic " << an << " fd " << fd);
    CHECK(std::abs(an - fd) <= 1e-3 * std::max(std::abs(fd), 1.0));
  }
}

TEST_CASE("png round trip") {
  raster::Image img(5, 3, 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = float(i) / float(img.data.size());
  const auto path = std::filesystem::temp_directory_path() / "nmr_test_rt.png";
  raster::save_png(img, path);
  const auto back = raster::load_png(path, 3);
  REQUIRE(back.width == 5);
  REQUIRE(back.height == 3);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(std::round(img.data[i] * 255) / 255).epsilon(1e-6));
  raster::Image mask(4, 4, 1, 0.5f);
  raster::save_png(mask, path);
  CHECK(raster::load_png(path, 1).data[0] == doctest::Approx(128 / 255.0));
  CHECK_THROWS_AS(raster::load_png(std::filesystem::temp_directory_path() / "nmr_missing.png", 3), raster::ImageError);
  std::filesystem::remove(path);
}
