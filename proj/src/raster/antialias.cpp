#include "nmr/raster/antialias.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <tuple>

#include "nmr/kernels/parallel.hpp"
#include "nmr/mesh/topology.hpp"

namespace nmr::raster {

FaceNeighbors face_neighbors(const std::vector<mesh::Face>& faces) {
  FaceNeighbors nb(faces.size(), {mesh::kNoFace, mesh::kNoFace, mesh::kNoFace});
  std::vector<std::tuple<std::uint64_t, std::uint32_t, int>> half;
  half.reserve(faces.size() * 3);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const std::uint64_t a = faces[f][k], b = faces[f][(k + 1) % 3];
      half.emplace_back(std::min(a, b) << 32 | std::max(a, b), std::uint32_t(f), k);
    }
  }
  std::sort(half.begin(), half.end());
  for (std::size_t i = 0; i < half.size();) {
    std::size_t j = i;
    while (j < half.size() && std::get<0>(half[j]) == std::get<0>(half[i])) ++j;
    if (j - i == 2) {
      const auto& [ka, fa, ea] = half[i];
      const auto& [kb, fb, eb] = half[i + 1];
      nb[fa][ea] = fb;
      nb[fb][eb] = fa;
    }
    i = j;
  }
  return nb;
}

namespace {

struct Event {
  std::uint32_t in, out;
  std::uint32_t va, vb;  // edge endpoints (vertex ids)
  double alpha;
  double r;
  double sign;
  bool horizontal;
};

// Finds the silhouette crossing between adjacent pixels p and q.
bool find_event(std::uint32_t p, std::uint32_t q, bool horizontal, const RasterFrame& fr,
                const std::vector<Vec2>& screen, const std::vector<mesh::Face>& faces, const FaceNeighbors& nb,
                Event& e) {
  const std::int32_t tp = fr.tri[p], tq = fr.tri[q];
  if (tp == tq) return false;
  bool p_in;
  if (tp == kNoTriangle) p_in = false;
  else if (tq == kNoTriangle) p_in = true;
  else p_in = fr.depth[p] < fr.depth[q] || (fr.depth[p] == fr.depth[q] && tp < tq);
  const std::uint32_t in = p_in ? p : q, out = p_in ? q : p;
  const auto f = static_cast<std::uint32_t>(fr.tri[in]);
  const unsigned W = static_cast<unsigned>(fr.width);
  const double xc = (in % W) + 0.5, yc = (in / W) + 0.5;
  const double sign = p_in ? 1.0 : -1.0;  // q is to the right of / below p
  for (int k = 0; k < 3; ++k) {
    const std::uint32_t other = nb[f][k];
    if (other != mesh::kNoFace && fr.face_visible[other]) continue;
    const std::uint32_t va = faces[f][k], vb = faces[f][(k + 1) % 3];
    const Vec2& a = screen[va];
    const Vec2& b = screen[vb];
    const double dx = b.x() - a.x(), dy = b.y() - a.y();
    double r, alpha;
    if (horizontal) {
      if (std::abs(dy) < std::abs(dx) || dy == 0) continue;
      r = (yc - a.y()) / dy;
      if (r < 0 || r > 1) continue;
      alpha = sign * (a.x() + r * dx - xc);
    } else {
      if (std::abs(dx) <= std::abs(dy)) continue;
      r = (xc - a.x()) / dx;
      if (r < 0 || r > 1) continue;
      alpha = sign * (a.y() + r * dy - yc);
    }
    if (alpha < 0 || alpha > 1) continue;
    e = {in, out, va, vb, alpha, r, sign, horizontal};
    return true;
  }
  return false;
}

template <typename T>
void apply(const Event& e, const T* c, std::size_t C, std::vector<T>& delta) {
  if (e.alpha < 0.5) {
    const double k = 0.5 - e.alpha;
    for (std::size_t j = 0; j < C; ++j)
      delta[e.in * C + j] += static_cast<T>(k * (double(c[e.out * C + j]) - double(c[e.in * C + j])));
  } else {
    const double k = e.alpha - 0.5;
    for (std::size_t j = 0; j < C; ++j)
      delta[e.out * C + j] += static_cast<T>(k * (double(c[e.in * C + j]) - double(c[e.out * C + j])));
  }
}

template <typename T>
ad::Tensor<T> antialias_impl(const ad::Tensor<T>& image, const ad::Tensor<T>& positions,
                             const std::vector<mesh::Face>& faces, const FaceNeighbors& nb, const RasterFrame& fr,
                             const Camera& cam, bool parallel) {
  const std::size_t N = fr.pixel_count();
  if (image.rank() != 2 || image.rows() != N) throw ad::ShapeError("antialias: image must be (H*W, C)");
  if (positions.rank() != 2 || positions.cols() != 3) throw ad::ShapeError("antialias: positions must be (V, 3)");
  if (nb.size() != faces.size()) throw std::invalid_argument("antialias: neighbor table does not match faces");
  const std::size_t C = image.cols();
  const int W = fr.width, H = fr.height;
  const T* c = image.node()->value.data();
  // Edge geometry comes from the positions tensor; ownership and visibility
  // stay as rasterized.
  std::vector<Vec3> pts(positions.rows());
  const auto& pv = positions.node()->value;
  for (std::size_t v = 0; v < pts.size(); ++v)
    pts[v] = Vec3(static_cast<double>(pv[v * 3]), static_cast<double>(pv[v * 3 + 1]), static_cast<double>(pv[v * 3 + 2]));
  auto screen = std::make_shared<std::vector<Vec2>>(project_vertices(cam, pts).screen);

  std::vector<T> dh(N * C, T(0)), dv(N * C, T(0));
  std::vector<std::vector<Event>> row_events(H), col_events(W);
  auto rows = [&](std::size_t y) {
    for (int x = 0; x + 1 < W; ++x) {
      const auto p = std::uint32_t(y * W + x);
      Event e;
      if (find_event(p, p + 1, true, fr, *screen, faces, nb, e)) {
        apply(e, c, C, dh);
        row_events[y].push_back(e);
      }
    }
  };
  auto cols = [&](std::size_t x) {
    for (int y = 0; y + 1 < H; ++y) {
      const auto p = std::uint32_t(y * W + x);
      Event e;
      if (find_event(p, p + W, false, fr, *screen, faces, nb, e)) {
        apply(e, c, C, dv);
        col_events[x].push_back(e);
      }
    }
  };
  if (parallel) {
    kernels::parallel_for_coarse(std::size_t(H), rows);
    kernels::parallel_for_coarse(std::size_t(W), cols);
  } else {
    for (int y = 0; y < H; ++y) rows(y);
    for (int x = 0; x < W; ++x) cols(x);
  }

  std::vector<T> out(N * C);
  for (std::size_t i = 0; i < N * C; ++i) out[i] = c[i] + dh[i] + dv[i];

  auto events = std::make_shared<std::vector<Event>>();
  for (auto& v : row_events) events->insert(events->end(), v.begin(), v.end());
  for (auto& v : col_events) events->insert(events->end(), v.begin(), v.end());
  auto in_node = image.node();
  auto pos_node = positions.node();

  return ad::record_op<T>(
      "antialias", {N, C}, std::move(out), {image, positions},
      [in_node, pos_node, events, screen, cam, C](const ad::Node<T>& o) {
        const T* g = o.grad.data();
        const T* c = in_node->value.data();
        if (in_node->requires_grad) {
          in_node->ensure_grad();
          T* gc = in_node->grad.data();
          for (std::size_t i = 0; i < o.grad.size(); ++i) gc[i] += g[i];
          for (const Event& e : *events) {
            const bool to_in = e.alpha < 0.5;
            const std::uint32_t tgt = to_in ? e.in : e.out, src = to_in ? e.out : e.in;
            const double k = to_in ? 0.5 - e.alpha : e.alpha - 0.5;
            for (std::size_t j = 0; j < C; ++j) {
              const double gj = double(g[tgt * C + j]);
              gc[tgt * C + j] -= static_cast<T>(k * gj);
              gc[src * C + j] += static_cast<T>(k * gj);
            }
          }
        }
        if (pos_node->requires_grad) {
          std::vector<Vec2> gs(screen->size(), Vec2::Zero());
          std::vector<std::uint8_t> touched(screen->size(), 0);
          for (const Event& e : *events) {
            const bool to_in = e.alpha < 0.5;
            const std::uint32_t tgt = to_in ? e.in : e.out;
            // d(target)/d(alpha) = in - out in both branches.
            double galpha = 0;
            for (std::size_t j = 0; j < C; ++j)
              galpha += double(g[tgt * C + j]) * (double(c[e.in * C + j]) - double(c[e.out * C + j]));
            if (galpha == 0) continue;
            const double gcross = e.sign * galpha;
            const Vec2& a = (*screen)[e.va];
            const Vec2& b = (*screen)[e.vb];
            // Crossing coordinate along the pair axis, as a function of the
            // endpoints; (i, j) = (pair axis, other axis).
            const int i = e.horizontal ? 0 : 1, jx = 1 - i;
            const double D = b[jx] - a[jx];
            const double span = b[i] - a[i];
            gs[e.va][i] += gcross * (1 - e.r);
            gs[e.vb][i] += gcross * e.r;
            gs[e.va][jx] += gcross * span * (e.r - 1) / D;
            gs[e.vb][jx] += gcross * (-e.r * span / D);
            touched[e.va] = touched[e.vb] = 1;
          }
          pos_node->ensure_grad();
          T* gp = pos_node->grad.data();
          const auto& pos = pos_node->value;
          for (std::size_t v = 0; v < gs.size(); ++v) {
            if (!touched[v]) continue;
            const Vec3 x(static_cast<double>(pos[v * 3]), static_cast<double>(pos[v * 3 + 1]), static_cast<double>(pos[v * 3 + 2]));
            const Vec3 gw = projection_jacobian(cam, x).transpose() * gs[v];
            for (int ax = 0; ax < 3; ++ax) gp[v * 3 + ax] += static_cast<T>(gw[ax]);
          }
        }
      });
}

}  // namespace

template <typename T>
ad::Tensor<T> antialias(const ad::Tensor<T>& image, const ad::Tensor<T>& positions,
                        const std::vector<mesh::Face>& faces, const FaceNeighbors& neighbors,
                        const RasterFrame& frame, const Camera& cam) {
  return antialias_impl(image, positions, faces, neighbors, frame, cam, true);
}

namespace reference {
template <typename T>
ad::Tensor<T> antialias(const ad::Tensor<T>& image, const ad::Tensor<T>& positions,
                        const std::vector<mesh::Face>& faces, const FaceNeighbors& neighbors,
                        const RasterFrame& frame, const Camera& cam) {
  return antialias_impl(image, positions, faces, neighbors, frame, cam, false);
}
template ad::Tensor<float> antialias(const ad::Tensor<float>&, const ad::Tensor<float>&,
                                     const std::vector<mesh::Face>&, const FaceNeighbors&, const RasterFrame&,
                                     const Camera&);
template ad::Tensor<double> antialias(const ad::Tensor<double>&, const ad::Tensor<double>&,
                                      const std::vector<mesh::Face>&, const FaceNeighbors&, const RasterFrame&,
                                      const Camera&);
}  // namespace reference

template ad::Tensor<float> antialias(const ad::Tensor<float>&, const ad::Tensor<float>&,
                                     const std::vector<mesh::Face>&, const FaceNeighbors&, const RasterFrame&,
                                     const Camera&);
template ad::Tensor<double> antialias(const ad::Tensor<double>&, const ad::Tensor<double>&,
                                      const std::vector<mesh::Face>&, const FaceNeighbors&, const RasterFrame&,
                                      const Camera&);

}  // namespace nmr::raster
