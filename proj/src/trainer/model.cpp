#include "nmr/trainer/model.hpp"

#include <cmath>

#include "nmr/autodiff/ops.hpp"
#include "nmr/encodings/sh.hpp"
#include "nmr/mesh/operations.hpp"
#include "nmr/mesh/topology.hpp"

namespace nmr::train {

using Tf = ad::Tensor<float>;

void AblationFlags::validate() const {
  if (!use_geometry_mlp && (use_features || use_baking || use_feature_reg))
    throw ConfigError("ablation flags: features, baking and the feature regularizer require the geometry MLP");
  if (use_feature_reg && !use_features) throw ConfigError("ablation flags: the feature regularizer requires features");
}

AblationFlags AblationFlags::setting(char name) {
  switch (name) {
    case 'a': return {false, false, false, false};
    case 'b': return {true, false, true, false};
    case 'c': return {true, true, true, false};
    case 'd': return {true, true, true, true};
    case 'e': return {true, true, false, true};
  }
  throw ConfigError(std::string("unknown ablation setting '") + name + "' (a, b, c, d or e)");
}

char AblationFlags::setting_name() const {
  for (char c : {'a', 'b', 'c', 'd', 'e'})
    if (setting(c) == *this) return c;
  return '?';
}

namespace {

std::vector<mesh::Vec3> float_rounded(std::vector<mesh::Vec3> v) {
  for (auto& x : v)
    for (int a = 0; a < 3; ++a) x[a] = double(float(x[a]));
  return v;
}

fields::TensorRecord record(std::vector<float> data, std::vector<std::uint32_t> dims) {
  return {std::move(dims), std::move(data)};
}

const fields::TensorRecord& need(const fields::Checkpoint& c, const std::string& name, std::size_t min_size) {
  const auto it = c.find(name);
  if (it == c.end()) throw fields::CheckpointError("checkpoint has no record '" + name + "'");
  if (it->second.data.size() < min_size)
    throw fields::CheckpointError("checkpoint record '" + name + "' is too short");
  return it->second;
}

}  // namespace

SceneModel::SceneModel(mesh::TriangleMesh initial, const AblationFlags& flags, const ModelDims& dims,
                       std::uint64_t seed)
    : flags_(flags), dims_(dims), initial_(std::move(initial)) {
  flags_.validate();
  initial_.validate();
  if (initial_.vertices.empty() || initial_.faces.empty()) throw ConfigError("initial mesh is empty");
  // Parameters live in float; round once so checkpoints reproduce the mesh.
  initial_.vertices = float_rounded(std::move(initial_.vertices));
  initial_.normals.clear();
  initial_.colors.clear();
  initial_.features.clear();
  initial_.feature_dim = 0;
  rebuild_topology();

  if (flags_.use_geometry_mlp) {
    fields::GeometryFieldConfig gc;
    gc.hidden = dims_.geometry_hidden;
    gc.feature_dim = feature_dim();
    gc.diffuse_head = flags_.use_baking;
    gc.hash = dims_.hash;
    field_ = std::make_shared<fields::GeometryField<float>>(gc, seed);
    const std::size_t fd = feature_dim();
    shader_ = fields::AppearanceShader<float>(3 + fd + 3 + enc::kShDim + 3, dims_.shader_hidden, dims_.shader_bias,
                                              seed + 1);
    if (!flags_.use_baking) diffuse_net_ = fields::AppearanceShader<float>(3 + fd + 3, dims_.shader_hidden, 0.0, seed + 2);
    if (flags_.use_feature_reg) normals_ = fields::NormalPredictor<float>(fd, dims_.normal_hidden, seed + 3);
  } else {
    hash_ = std::make_shared<enc::HashGrid<float>>(dims_.hash, seed ^ 0x9e3779b97f4a7c15ull);
    raw_offsets_ = Tf::zeros({initial_.vertex_count(), 3}, true);
    // The appearance MLP predicts the full color here, so it starts at mid grey.
    shader_ = fields::AppearanceShader<float>(3 + hash_->output_dim() + 3 + enc::kShDim, dims_.shader_hidden, 0.0,
                                              seed + 1);
  }
}

void SceneModel::rebuild_topology() {
  const auto topo = mesh::EdgeTopology::build(initial_);
  corners_ = mesh::FaceCorners(initial_.faces);
  laplacian_ = mesh::uniform_laplacian(topo, initial_.vertex_count());
  pairs_ = mesh::adjacent_face_pairs(topo);
  neighbors_ = raster::face_neighbors(initial_.faces);
  x0_ = fields::positions_tensor<float>(initial_.vertices);
}

Tf SceneModel::offsets() const {
  if (field_) return (*field_)(x0_).offset;
  return raw_offsets_;
}

raster::SurfaceAttributes<float> SceneModel::surface(Tf* regularizer_features) const {
  raster::SurfaceAttributes<float> s;
  Tf offset;
  if (field_) {
    const auto h = field_->trunk(x0_);
    auto out = field_->heads(h);
    if (regularizer_features && out.feature.defined())
      *regularizer_features = field_->feature_head(Tf(h.shape(), std::vector<float>(h.data().begin(), h.data().end())));
    offset = out.offset;
    s.features = out.feature;
    s.diffuse = out.diffuse;
  } else {
    offset = raw_offsets_;
  }
  s.positions = ad::add(x0_, offset);
  s.normals = mesh::vertex_normals(s.positions, corners_);
  return s;
}

raster::SurfaceAttributes<float> SceneModel::surface_from_mesh(const mesh::TriangleMesh& m) const {
  m.validate();
  raster::SurfaceAttributes<float> s;
  s.positions = fields::positions_tensor<float>(m.vertices);
  s.normals = mesh::vertex_normals(s.positions, mesh::FaceCorners(m.faces));
  const std::size_t fd = feature_dim();
  if (fd > 0) {
    if (!m.has_features() || m.feature_dim != fd)
      throw ConfigError("mesh carries " + std::to_string(m.has_features() ? m.feature_dim : 0) +
                        " features per vertex, the shader expects " + std::to_string(fd));
    s.features = Tf({m.vertex_count(), fd}, std::vector<float>(m.features.begin(), m.features.end()));
  }
  if (flags_.use_baking) {
    if (!m.has_colors()) throw ConfigError("mesh has no vertex colors to use as baked diffuse");
    s.diffuse = fields::positions_tensor<float>(m.colors);
  }
  return s;
}

Tf SceneModel::appearance_input(const raster::PixelAttributes<float>& px, const Tf& diffuse) const {
  std::vector<Tf> parts = {px.positions};
  if (px.features.defined()) parts.push_back(px.features);
  parts.push_back(px.normals);
  parts.push_back(enc::sh_encode(px.view_dirs));
  parts.push_back(diffuse);
  return ad::concat(parts);
}

Tf SceneModel::diffuse_branch(const Tf& x, const Tf& z, const Tf& n) const {
  std::vector<Tf> parts = {x};
  if (z.defined()) parts.push_back(z);
  parts.push_back(n);
  return diffuse_net_(ad::concat(parts));
}

Tf SceneModel::diffuse_branch(const raster::PixelAttributes<float>& px) const {
  return diffuse_branch(px.positions, px.features, px.normals);
}

raster::PixelShader<float> SceneModel::shader() const {
  return [this](const raster::PixelAttributes<float>& px) -> Tf {
    if (!field_) {
      return shader_(ad::concat<float>({px.positions, hash_->encode(px.positions), px.normals,
                                        enc::sh_encode(px.view_dirs)}));
    }
    if (flags_.use_baking) return shader_(appearance_input(px, px.diffuse));
    const Tf diffuse = diffuse_branch(px);
    return ad::add(diffuse, shader_(appearance_input(px, diffuse)));
  };
}

Tf SceneModel::predict_normals(const Tf& x, const Tf& z) const {
  if (!normals_.defined()) throw ConfigError("model has no normal predictor");
  return normals_(x, z);
}

raster::RenderOutput<float> SceneModel::render(const raster::Camera& cam) const {
  return raster::render(cam, surface(), faces(), neighbors_, shader(), mesh::Vec3::Zero());
}

raster::RenderOutput<float> SceneModel::render_mesh(const raster::Camera& cam, const mesh::TriangleMesh& m) const {
  return raster::render(cam, surface_from_mesh(m), m.faces, raster::face_neighbors(m.faces), shader(),
                        mesh::Vec3::Zero());
}

mesh::TriangleMesh SceneModel::export_mesh() const {
  const auto s = surface();
  mesh::TriangleMesh m;
  m.faces = initial_.faces;
  m.vertices = raster::tensor_points(s.positions);
  m.normals = raster::tensor_points(s.normals);
  if (s.features.defined()) {
    m.feature_dim = s.features.cols();
    m.features.assign(s.features.data().begin(), s.features.data().end());
  }
  if (s.diffuse.defined()) m.colors = raster::tensor_points(s.diffuse);
  else if (diffuse_net_.defined()) m.colors = raster::tensor_points(diffuse_branch(s.positions, s.features, s.normals));
  return m;
}

fields::ParamList<float> SceneModel::geometry_params() const {
  fields::ParamList<float> p;
  if (field_) {
    field_->collect(p);
  } else {
    p.push_back({"geometry/offsets", raw_offsets_});
    p.push_back({"hash/table", hash_->table()});
  }
  if (normals_.defined()) normals_.collect(p);
  return p;
}

fields::ParamList<float> SceneModel::appearance_params() const {
  fields::ParamList<float> p;
  shader_.collect("appearance/shader", p);
  if (diffuse_net_.defined()) diffuse_net_.collect("appearance/diffuse", p);
  return p;
}

void SceneModel::upsample(int rounds) {
  if (rounds < 0) throw ConfigError("upsample rounds must be non-negative");
  for (int r = 0; r < rounds; ++r) {
    if (!field_) {
      const auto topo = mesh::EdgeTopology::build(initial_);
      const auto d = raw_offsets_.data();
      const auto sub = mesh::loop_subdivide_attribute(initial_, topo, std::vector<double>(d.begin(), d.end()), 3);
      raw_offsets_ = Tf({sub.size() / 3, 3}, std::vector<float>(sub.begin(), sub.end()), true);
    }
    initial_ = mesh::loop_subdivide(initial_);
  }
  initial_.vertices = float_rounded(std::move(initial_.vertices));
  rebuild_topology();
}

fields::Checkpoint SceneModel::checkpoint() const {
  fields::Checkpoint c;
  fields::store(c, geometry_params());
  fields::store(c, appearance_params());
  std::vector<float> v, f;
  for (const auto& x : initial_.vertices)
    for (int a = 0; a < 3; ++a) v.push_back(float(x[a]));
  for (const auto& t : initial_.faces)
    for (int a = 0; a < 3; ++a) f.push_back(float(t[a]));
  const auto V = std::uint32_t(initial_.vertex_count()), F = std::uint32_t(initial_.face_count());
  c["mesh/initial_vertices"] = record(std::move(v), {V, 3});
  c["mesh/faces"] = record(std::move(f), {F, 3});
  c["meta/flags"] = record({float(flags_.use_geometry_mlp), float(flags_.use_features), float(flags_.use_baking),
                            float(flags_.use_feature_reg)},
                           {4});
  c["meta/dims"] = record({float(dims_.geometry_hidden), float(dims_.feature_dim), float(dims_.shader_hidden),
                           float(dims_.normal_hidden), float(dims_.shader_bias)},
                          {5});
  const auto& h = dims_.hash;
  c["meta/hash"] = record({float(h.levels), float(h.features), float(h.log2_table_size), float(h.base_resolution),
                           float(h.max_resolution), float(h.bound)},
                          {6});
  return c;
}

SceneModel SceneModel::from_checkpoint(const fields::Checkpoint& c) {
  const auto& fl = need(c, "meta/flags", 4).data;
  const auto& dm = need(c, "meta/dims", 5).data;
  const auto& hh = need(c, "meta/hash", 6).data;
  AblationFlags flags{fl[0] != 0, fl[1] != 0, fl[2] != 0, fl[3] != 0};
  ModelDims dims;
  dims.geometry_hidden = std::size_t(dm[0]);
  dims.feature_dim = std::size_t(dm[1]);
  dims.shader_hidden = std::size_t(dm[2]);
  dims.normal_hidden = std::size_t(dm[3]);
  dims.shader_bias = dm[4];
  dims.hash.levels = int(hh[0]);
  dims.hash.features = int(hh[1]);
  dims.hash.log2_table_size = int(hh[2]);
  dims.hash.base_resolution = int(hh[3]);
  dims.hash.max_resolution = int(hh[4]);
  dims.hash.bound = hh[5];

  const auto& vr = need(c, "mesh/initial_vertices", 0);
  const auto& fr = need(c, "mesh/faces", 0);
  if (vr.dims.size() != 2 || vr.dims[1] != 3 || fr.dims.size() != 2 || fr.dims[1] != 3 ||
      vr.data.size() != std::size_t(vr.dims[0]) * 3 || fr.data.size() != std::size_t(fr.dims[0]) * 3)
    throw fields::CheckpointError("checkpoint mesh records are malformed");
  mesh::TriangleMesh m;
  m.vertices.resize(vr.dims[0]);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) m.vertices[i] = {vr.data[i * 3], vr.data[i * 3 + 1], vr.data[i * 3 + 2]};
  m.faces.resize(fr.dims[0]);
  for (std::size_t i = 0; i < m.faces.size(); ++i)
    for (int a = 0; a < 3; ++a) m.faces[i][a] = std::uint32_t(fr.data[i * 3 + a]);

  try {
    SceneModel model(std::move(m), flags, dims, 0);
    fields::restore(c, model.geometry_params());
    fields::restore(c, model.appearance_params());
    return model;
  } catch (const ConfigError& e) {
    throw fields::CheckpointError(std::string("checkpoint is inconsistent: ") + e.what());
  } catch (const mesh::MeshError& e) {
    throw fields::CheckpointError(std::string("checkpoint mesh is invalid: ") + e.what());
  }
}

}  // namespace nmr::train
