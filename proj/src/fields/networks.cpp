#include "nmr/fields/networks.hpp"

#include "nmr/autodiff/ops.hpp"
#include "nmr/mesh/operations.hpp"

namespace nmr::fields {

template <typename T>
GeometryField<T>::GeometryField(const GeometryFieldConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), hash_(cfg.hash, seed ^ 0x9e3779b97f4a7c15ull) {
  std::mt19937_64 rng(seed);
  const std::size_t in = 3 + hash_.output_dim();
  input = Linear<T>(in, cfg.hidden, Init::KaimingUniform, rng);
  res1 = Linear<T>(cfg.hidden, cfg.hidden, Init::KaimingUniform, rng);
  res2 = Linear<T>(cfg.hidden, cfg.hidden, Init::KaimingUniform, rng);
  deform_head = Linear<T>(cfg.hidden, 3, Init::Zero, rng);
  if (cfg.feature_dim > 0) feature_head = Linear<T>(cfg.hidden, cfg.feature_dim, Init::Small, rng);
  if (cfg.diffuse_head) diffuse_head = Linear<T>(cfg.hidden, 3, Init::Small, rng);
}

template <typename T>
ad::Tensor<T> GeometryField<T>::trunk(const ad::Tensor<T>& x) const {
  const auto h0 = ad::relu(input(ad::concat<T>({x, hash_.encode(x)})));
  const auto r = res2(ad::relu(res1(h0)));
  return ad::relu(ad::add(h0, r));
}

template <typename T>
GeometryOutput<T> GeometryField<T>::heads(const ad::Tensor<T>& h) const {
  GeometryOutput<T> out;
  out.offset = deform_head(h);
  if (cfg_.feature_dim > 0) out.feature = feature_head(h);
  if (cfg_.diffuse_head) out.diffuse = ad::sigmoid(diffuse_head(h));
  return out;
}

template <typename T>
void GeometryField<T>::collect(ParamList<T>& out) const {
  input.collect("geometry/input", out);
  res1.collect("geometry/res1", out);
  res2.collect("geometry/res2", out);
  deform_head.collect("geometry/deform", out);
  if (cfg_.feature_dim > 0) feature_head.collect("geometry/feature", out);
  if (cfg_.diffuse_head) collect_diffuse_head(out);
  out.push_back({"hash/table", hash_.table()});
}

template <typename T>
void GeometryField<T>::collect_diffuse_head(ParamList<T>& out) const {
  if (cfg_.diffuse_head) diffuse_head.collect("geometry/diffuse", out);
}

template <typename T>
AppearanceShader<T>::AppearanceShader(std::size_t in_dim, std::size_t hidden, double out_bias,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  mlp_ = Mlp<T>({in_dim, hidden, hidden, 3}, Output::Sigmoid, rng);
  for (auto& b : mlp_.layers().back().bias.mutable_data()) b = static_cast<T>(out_bias);
}

template <typename T>
NormalPredictor<T>::NormalPredictor(std::size_t feature_dim, std::size_t hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  mlp_ = Mlp<T>({3 + feature_dim, hidden, hidden, 3}, Output::Linear, rng);
}

template <typename T>
ad::Tensor<T> NormalPredictor<T>::operator()(const ad::Tensor<T>& x, const ad::Tensor<T>& z) const {
  return ad::l2_normalize(mlp_(ad::concat<T>({x, z})));
}

template <typename T>
mesh::TriangleMesh deform_mesh(const GeometryField<T>& field, const mesh::TriangleMesh& initial) {
  initial.validate();
  const auto out = field(positions_tensor<T>(initial.vertices));
  mesh::TriangleMesh m;
  m.faces = initial.faces;
  m.vertices.resize(initial.vertex_count());
  const auto d = out.offset.data();
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    m.vertices[v] = initial.vertices[v] + mesh::Vec3(double(d[v * 3]), double(d[v * 3 + 1]), double(d[v * 3 + 2]));
  }
  if (out.feature.defined()) {
    m.feature_dim = out.feature.cols();
    m.features.assign(out.feature.data().begin(), out.feature.data().end());
  }
  if (out.diffuse.defined()) {
    const auto c = out.diffuse.data();
    m.colors.resize(m.vertices.size());
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
      m.colors[v] = {double(c[v * 3]), double(c[v * 3 + 1]), double(c[v * 3 + 2])};
  }
  m.normals = mesh::vertex_normals(m).normals;
  return m;
}

template <typename T>
ad::Tensor<T> positions_tensor(const std::vector<mesh::Vec3>& v, bool requires_grad) {
  std::vector<T> d(v.size() * 3);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (int a = 0; a < 3; ++a) d[i * 3 + a] = static_cast<T>(v[i][a]);
  return ad::Tensor<T>({v.size(), 3}, std::move(d), requires_grad);
}

template mesh::TriangleMesh deform_mesh(const GeometryField<float>&, const mesh::TriangleMesh&);
template mesh::TriangleMesh deform_mesh(const GeometryField<double>&, const mesh::TriangleMesh&);
template ad::Tensor<float> positions_tensor<float>(const std::vector<mesh::Vec3>&, bool);
template ad::Tensor<double> positions_tensor<double>(const std::vector<mesh::Vec3>&, bool);

template class GeometryField<float>;
template class GeometryField<double>;
template class AppearanceShader<float>;
template class AppearanceShader<double>;
template class NormalPredictor<float>;
template class NormalPredictor<double>;

}  // namespace nmr::fields
