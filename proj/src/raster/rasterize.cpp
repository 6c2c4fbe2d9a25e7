#include "nmr/raster/rasterize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "nmr/kernels/parallel.hpp"

namespace nmr::raster {

namespace {

constexpr int kTileRows = 8;

struct FaceSetup {
  Vec2 a, b, c;
  double za = 0, zb = 0, zc = 0;
  double area = 0;
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bbox
  bool active = false;
};

inline double edge(const Vec2& p, const Vec2& q, const Vec2& r) {
  return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
}

struct Sample {
  double u, v, pu, pv, depth;
};

inline bool sample(const FaceSetup& f, double px, double py, Sample& s) {
  const Vec2 p(px, py);
  const double w0 = edge(f.b, f.c, p);
  const double w1 = edge(f.c, f.a, p);
  const double w2 = edge(f.a, f.b, p);
  const bool inside = f.area > 0 ? (w0 >= 0 && w1 >= 0 && w2 >= 0) : (w0 <= 0 && w1 <= 0 && w2 <= 0);
  if (!inside) return false;
  s.u = w0 / f.area;
  s.v = w1 / f.area;
  const double w = 1.0 - s.u - s.v;
  const double ia = s.u / f.za, ib = s.v / f.zb, ic = w / f.zc;
  const double iz = ia + ib + ic;
  s.depth = 1.0 / iz;
  s.pu = ia / iz;
  s.pv = ib / iz;
  return true;
}

inline bool nearer(double d, std::int32_t id, double best_d, std::int32_t best_id) {
  return d < best_d || (d == best_d && id < best_id);
}

std::vector<FaceSetup> setup_faces(const Camera& cam, const std::vector<mesh::Face>& faces,
                                   const Projection& proj, const std::vector<std::uint8_t>& visible) {
  std::vector<FaceSetup> out(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!visible[f]) continue;
    FaceSetup& s = out[f];
    const auto& fc = faces[f];
    s.a = proj.screen[fc[0]];
    s.b = proj.screen[fc[1]];
    s.c = proj.screen[fc[2]];
    s.za = proj.depth[fc[0]];
    s.zb = proj.depth[fc[1]];
    s.zc = proj.depth[fc[2]];
    s.area = edge(s.a, s.b, s.c);
    if (s.area == 0 || !std::isfinite(s.area)) continue;
    const double minx = std::min({s.a.x(), s.b.x(), s.c.x()});
    const double maxx = std::max({s.a.x(), s.b.x(), s.c.x()});
    const double miny = std::min({s.a.y(), s.b.y(), s.c.y()});
    const double maxy = std::max({s.a.y(), s.b.y(), s.c.y()});
    // Pixel centers i + 0.5 inside [min, max].
    const double lo_x = std::ceil(minx - 0.5), hi_x = std::floor(maxx - 0.5);
    const double lo_y = std::ceil(miny - 0.5), hi_y = std::floor(maxy - 0.5);
    if (hi_x < 0 || hi_y < 0 || lo_x > cam.width - 1 || lo_y > cam.height - 1) continue;
    s.x0 = static_cast<int>(std::max(lo_x, 0.0));
    s.x1 = static_cast<int>(std::min(hi_x, double(cam.width - 1)));
    s.y0 = static_cast<int>(std::max(lo_y, 0.0));
    s.y1 = static_cast<int>(std::min(hi_y, double(cam.height - 1)));
    s.active = s.x0 <= s.x1 && s.y0 <= s.y1;
  }
  return out;
}

RasterFrame empty_frame(const Camera& cam) {
  RasterFrame fr;
  fr.width = cam.width;
  fr.height = cam.height;
  const std::size_t n = cam.pixel_count();
  fr.tri.assign(n, kNoTriangle);
  fr.u.assign(n, 0.0);
  fr.v.assign(n, 0.0);
  fr.pu.assign(n, 0.0);
  fr.pv.assign(n, 0.0);
  fr.depth.assign(n, 0.0);
  return fr;
}

inline void write(RasterFrame& fr, std::size_t p, std::int32_t id, const Sample& s) {
  fr.tri[p] = id;
  fr.u[p] = s.u;
  fr.v[p] = s.v;
  fr.pu[p] = s.pu;
  fr.pv[p] = s.pv;
  fr.depth[p] = s.depth;
}

void prepare(RasterFrame& fr, const Camera& cam, std::span<const Vec3> vertices,
             const std::vector<mesh::Face>& faces) {
  for (const auto& f : faces)
    for (auto v : f)
      if (v >= vertices.size()) throw CameraError("rasterize: face references a missing vertex");
  fr.projection = project_vertices(cam, vertices);
  fr.face_visible = visible_faces(cam, vertices, faces, fr.projection);
}

}  // namespace

std::size_t RasterFrame::covered_count() const {
  return static_cast<std::size_t>(std::count_if(tri.begin(), tri.end(), [](std::int32_t t) { return t != kNoTriangle; }));
}

std::vector<std::uint32_t> RasterFrame::covered_pixels() const {
  std::vector<std::uint32_t> out;
  for (std::size_t p = 0; p < tri.size(); ++p)
    if (tri[p] != kNoTriangle) out.push_back(static_cast<std::uint32_t>(p));
  return out;
}

std::vector<std::uint8_t> visible_faces(const Camera& cam, std::span<const Vec3> vertices,
                                        const std::vector<mesh::Face>& faces, const Projection& proj) {
  const Vec3 eye = cam.center();
  std::vector<std::uint8_t> vis(faces.size(), 0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& fc = faces[f];
    if (!proj.valid[fc[0]] || !proj.valid[fc[1]] || !proj.valid[fc[2]]) continue;
    const Vec3& a = vertices[fc[0]];
    const Vec3 n = (vertices[fc[1]] - a).cross(vertices[fc[2]] - a);
    vis[f] = n.dot(eye - a) > 0 ? 1 : 0;
  }
  return vis;
}

RasterFrame rasterize(const Camera& cam, std::span<const Vec3> vertices, const std::vector<mesh::Face>& faces) {
  cam.validate();
  RasterFrame fr = empty_frame(cam);
  prepare(fr, cam, vertices, faces);
  const auto setup = setup_faces(cam, faces, fr.projection, fr.face_visible);

  const int tiles = (cam.height + kTileRows - 1) / kTileRows;
  std::vector<std::vector<std::uint32_t>> bins(tiles);
  for (std::size_t f = 0; f < setup.size(); ++f) {
    if (!setup[f].active) continue;
    for (int t = setup[f].y0 / kTileRows; t <= setup[f].y1 / kTileRows; ++t) bins[t].push_back(std::uint32_t(f));
  }

  kernels::parallel_for_coarse(static_cast<std::size_t>(tiles), [&](std::size_t t) {
    const int r0 = int(t) * kTileRows, r1 = std::min(cam.height, r0 + kTileRows) - 1;
    std::vector<double> best(std::size_t(kTileRows) * cam.width, std::numeric_limits<double>::infinity());
    for (std::uint32_t f : bins[t]) {
      const FaceSetup& s = setup[f];
      const auto id = static_cast<std::int32_t>(f);
      for (int y = std::max(r0, s.y0); y <= std::min(r1, s.y1); ++y) {
        for (int x = s.x0; x <= s.x1; ++x) {
          Sample smp;
          if (!sample(s, x + 0.5, y + 0.5, smp)) continue;
          const std::size_t p = std::size_t(y) * cam.width + x;
          double& b = best[std::size_t(y - r0) * cam.width + x];
          if (nearer(smp.depth, id, b, fr.tri[p])) {
            b = smp.depth;
            write(fr, p, id, smp);
          }
        }
      }
    }
  });
  return fr;
}

namespace reference {

RasterFrame rasterize(const Camera& cam, std::span<const Vec3> vertices, const std::vector<mesh::Face>& faces) {
  cam.validate();
  RasterFrame fr = empty_frame(cam);
  prepare(fr, cam, vertices, faces);
  const auto setup = setup_faces(cam, faces, fr.projection, fr.face_visible);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const std::size_t p = std::size_t(y) * cam.width + x;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t f = 0; f < setup.size(); ++f) {
        const FaceSetup& s = setup[f];
        // The pixel-center bounding box is part of the coverage test.
        if (!s.active || x < s.x0 || x > s.x1 || y < s.y0 || y > s.y1) continue;
        Sample smp;
        if (!sample(s, x + 0.5, y + 0.5, smp)) continue;
        if (nearer(smp.depth, std::int32_t(f), best, fr.tri[p])) {
          best = smp.depth;
          write(fr, p, std::int32_t(f), smp);
        }
      }
    }
  }
  return fr;
}

}  // namespace reference

}  // namespace nmr::raster
