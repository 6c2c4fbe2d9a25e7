#include "nmr/raster/render.hpp"

#include "nmr/autodiff/ops.hpp"

namespace nmr::raster {

namespace {

template <typename T>
ad::Tensor<T> clamp_unit(const ad::Tensor<T>& x) {
  // 1 + min(0, x - 1), then max(0, .)
  return ad::relu(ad::add_scalar(ad::min_zero(ad::add_scalar(x, T(-1))), T(1)));
}

template <typename T>
ad::Tensor<T> repeat_row(const Vec3& v, std::size_t n) {
  std::vector<T> d(n * 3);
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) d[i * 3 + a] = static_cast<T>(v[a]);
  return ad::Tensor<T>({n, 3}, std::move(d));
}

std::vector<double> scatter_rows(std::span<const std::uint32_t> pixels, std::size_t N, std::span<const double> rows,
                                 std::size_t C) {
  std::vector<double> out(N * C, 0.0);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    for (std::size_t k = 0; k < C; ++k) out[pixels[i] * C + k] = rows[i * C + k];
  return out;
}

template <typename T>
std::vector<double> as_double(const ad::Tensor<T>& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

}  // namespace

template <typename T>
std::vector<Vec3> tensor_points(const ad::Tensor<T>& t) {
  if (t.rank() != 2 || t.cols() != 3) throw ad::ShapeError("tensor_points: expected (n, 3)");
  std::vector<Vec3> out(t.rows());
  const auto d = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Vec3(double(d[i * 3]), double(d[i * 3 + 1]), double(d[i * 3 + 2]));
  return out;
}

template <typename T>
PixelAttributes<T> gather_pixels(const SurfaceAttributes<T>& surface, const std::vector<mesh::Face>& faces,
                                 const RasterFrame& frame, const Camera& cam, std::vector<std::uint32_t> pixels) {
  std::vector<ad::Tensor<T>> parts = {surface.positions, surface.normals};
  if (surface.features.defined()) parts.push_back(surface.features);
  if (surface.diffuse.defined()) parts.push_back(surface.diffuse);
  const auto all = interpolate(ad::concat(parts), surface.positions, faces, frame, cam, pixels);
  PixelAttributes<T> px;
  std::size_t col = 0;
  px.positions = ad::columns(all, 0, 3);
  px.normals = ad::l2_normalize(ad::columns(all, 3, 6));
  col = 6;
  if (surface.features.defined()) {
    px.features = ad::columns(all, col, col + surface.features.cols());
    col += surface.features.cols();
  }
  if (surface.diffuse.defined()) px.diffuse = ad::columns(all, col, col + 3);
  px.view_dirs = ad::l2_normalize(ad::sub(repeat_row<T>(cam.center(), pixels.size()), px.positions));
  px.pixels = std::move(pixels);
  return px;
}

template <typename T>
ad::Tensor<T> shade_pixels(const PixelAttributes<T>& attrs, const PixelShader<T>& shader) {
  auto c = shader(attrs);
  if (attrs.diffuse.defined()) c = ad::add(attrs.diffuse, c);
  return clamp_unit(c);
}

template <typename T>
ad::Tensor<T> soft_mask(const ad::Tensor<T>& positions, const std::vector<mesh::Face>& faces,
                        const FaceNeighbors& neighbors, const RasterFrame& frame, const Camera& cam) {
  const std::size_t n = frame.pixel_count();
  std::vector<T> hard(n);
  for (std::size_t p = 0; p < n; ++p) hard[p] = frame.covered(p) ? T(1) : T(0);
  const ad::Tensor<T> m({n, 1}, std::move(hard));
  return clamp_unit(antialias(m, positions, faces, neighbors, frame, cam));
}

template <typename T>
RenderOutput<T> render(const Camera& cam, const SurfaceAttributes<T>& surface, const std::vector<mesh::Face>& faces,
                       const FaceNeighbors& neighbors, const PixelShader<T>& shader, const Vec3& background) {
  RenderOutput<T> out;
  GBuffer& gb = out.gbuffer;
  gb.frame = rasterize(cam, tensor_points(surface.positions), faces);
  const RasterFrame& fr = gb.frame;
  const std::size_t N = fr.pixel_count();
  const auto pixels = fr.covered_pixels();

  std::vector<T> bg(N * 3, T(0));
  for (std::size_t p = 0; p < N; ++p)
    if (!fr.covered(p))
      for (int a = 0; a < 3; ++a) bg[p * 3 + a] = static_cast<T>(background[a]);
  ad::Tensor<T> full({N, 3}, std::move(bg));

  gb.position.assign(N * 3, 0.0);
  gb.normal.assign(N * 3, 0.0);
  gb.diffuse.assign(N * 3, 0.0);
  if (!pixels.empty()) {
    const auto px = gather_pixels(surface, faces, fr, cam, pixels);
    full = ad::add(full, ad::scatter_add(shade_pixels(px, shader), pixels, N));
    gb.position = scatter_rows(pixels, N, as_double(px.positions), 3);
    gb.normal = scatter_rows(pixels, N, as_double(px.normals), 3);
    if (px.diffuse.defined()) gb.diffuse = scatter_rows(pixels, N, as_double(px.diffuse), 3);
    if (px.features.defined()) {
      gb.feature_dim = px.features.cols();
      gb.feature = scatter_rows(pixels, N, as_double(px.features), gb.feature_dim);
    }
  }
  out.image = clamp_unit(antialias(full, surface.positions, faces, neighbors, fr, cam));
  out.mask = soft_mask(surface.positions, faces, neighbors, fr, cam);
  gb.coverage = as_double(out.mask);
  return out;
}

#define NMR_RENDER_INSTANTIATE(T)                                                                                 \
  template std::vector<Vec3> tensor_points(const ad::Tensor<T>&);                                                 \
  template PixelAttributes<T> gather_pixels(const SurfaceAttributes<T>&, const std::vector<mesh::Face>&,          \
                                            const RasterFrame&, const Camera&, std::vector<std::uint32_t>);       \
  template ad::Tensor<T> shade_pixels(const PixelAttributes<T>&, const PixelShader<T>&);                          \
  template ad::Tensor<T> soft_mask(const ad::Tensor<T>&, const std::vector<mesh::Face>&, const FaceNeighbors&,    \
                                   const RasterFrame&, const Camera&);                                            \
  template RenderOutput<T> render(const Camera&, const SurfaceAttributes<T>&, const std::vector<mesh::Face>&,     \
                                  const FaceNeighbors&, const PixelShader<T>&, const Vec3&);

NMR_RENDER_INSTANTIATE(float)
NMR_RENDER_INSTANTIATE(double)
#undef NMR_RENDER_INSTANTIATE

}  // namespace nmr::raster
