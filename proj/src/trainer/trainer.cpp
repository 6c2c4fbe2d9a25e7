#include "nmr/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "nmr/autodiff/adam.hpp"
#include "nmr/autodiff/ops.hpp"
#include "nmr/mesh/operations.hpp"
#include "nmr/raster/rasterize.hpp"

namespace nmr::train {

using Tf = ad::Tensor<float>;
using json = nlohmann::json;

TrainConfig TrainConfig::desk() { return TrainConfig{}; }

TrainConfig TrainConfig::paper() {
  TrainConfig c;
  c.icosphere_level = 4;
  c.upsample_rounds = 3;
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (total_iterations < 1) fail("total_iterations must be positive");
  if (upsample_at >= 0 && upsample_at >= total_iterations)
    fail("upsample_at (" + std::to_string(upsample_at) + ") must be below total_iterations (" +
         std::to_string(total_iterations) + "); use -1 to disable the event");
  if (upsample_rounds < 0 || upsample_rounds > 4) fail("upsample_rounds must be in [0, 4]");
  if (icosphere_level < 0 || icosphere_level > mesh::kMaxIcosphereLevel) fail("icosphere_level out of range");
  if (initial_subdivisions < 0 || initial_subdivisions > 4) fail("initial_subdivisions must be in [0, 4]");
  if (!(lr_geometry > 0) || !(lr_appearance > 0)) fail("learning rates must be positive");
  if (!(lr_decay > 0 && lr_decay <= 1)) fail("lr_decay must be in (0, 1]");
  if (lr_decay_every < 1) fail("lr_decay_every must be positive");
  if (!(pixel_sample_fraction > 0 && pixel_sample_fraction <= 1)) fail("pixel_sample_fraction must be in (0, 1]");
  try {
    weights.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  flags.validate();
  if (dims.geometry_hidden == 0 || dims.shader_hidden == 0 || dims.normal_hidden == 0) fail("hidden widths must be positive");
  if (flags.use_features && dims.feature_dim == 0) fail("feature_dim must be positive when features are on");
}

void apply_config_json(TrainConfig& cfg, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected one flat object");
  if (j.contains("profile")) {
    const auto p = j["profile"].get<std::string>();
    if (p == "desk") cfg = TrainConfig::desk();
    else if (p == "paper") cfg = TrainConfig::paper();
    else throw ConfigError("config: unknown profile '" + p + "' (desk or paper)");
  }
  if (j.contains("ablation")) {
    const auto a = j["ablation"].get<std::string>();
    if (a.size() != 1) throw ConfigError("config: ablation must be one letter");
    cfg.flags = AblationFlags::setting(a[0]);
  }
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "profile" || key == "ablation") continue;
      else if (key == "total_iterations") cfg.total_iterations = v.get<int>();
      else if (key == "upsample_at") cfg.upsample_at = v.get<int>();
      else if (key == "upsample_rounds") cfg.upsample_rounds = v.get<int>();
      else if (key == "icosphere_level") cfg.icosphere_level = v.get<int>();
      else if (key == "initial_subdivisions") cfg.initial_subdivisions = v.get<int>();
      else if (key == "lr_geometry") cfg.lr_geometry = v.get<double>();
      else if (key == "lr_appearance") cfg.lr_appearance = v.get<double>();
      else if (key == "lr_decay") cfg.lr_decay = v.get<double>();
      else if (key == "lr_decay_every") cfg.lr_decay_every = v.get<int>();
      else if (key == "pixel_sample_fraction") cfg.pixel_sample_fraction = v.get<double>();
      else if (key == "lambda_shading") cfg.weights.shading = v.get<double>();
      else if (key == "lambda_mask") cfg.weights.mask = v.get<double>();
      else if (key == "lambda_laplacian") cfg.weights.laplacian = v.get<double>();
      else if (key == "lambda_normal") cfg.weights.normal = v.get<double>();
      else if (key == "lambda_feature") cfg.weights.feature = v.get<double>();
      else if (key == "gamma") cfg.weights.gamma = v.get<double>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "holdout") cfg.holdout = v.get<bool>();
      else if (key == "use_geometry_mlp") cfg.flags.use_geometry_mlp = v.get<bool>();
      else if (key == "use_features") cfg.flags.use_features = v.get<bool>();
      else if (key == "use_baking") cfg.flags.use_baking = v.get<bool>();
      else if (key == "use_feature_reg") cfg.flags.use_feature_reg = v.get<bool>();
      else if (key == "geometry_hidden") cfg.dims.geometry_hidden = v.get<std::size_t>();
      else if (key == "feature_dim") cfg.dims.feature_dim = v.get<std::size_t>();
      else if (key == "shader_hidden") cfg.dims.shader_hidden = v.get<std::size_t>();
      else if (key == "normal_hidden") cfg.dims.normal_hidden = v.get<std::size_t>();
      else if (key == "hash_levels") cfg.dims.hash.levels = v.get<int>();
      else if (key == "hash_log2_table_size") cfg.dims.hash.log2_table_size = v.get<int>();
      else if (key == "hash_base_resolution") cfg.dims.hash.base_resolution = v.get<int>();
      else if (key == "hash_max_resolution") cfg.dims.hash.max_resolution = v.get<int>();
      else throw ConfigError("config: unknown key '" + key + "'");
    } catch (const json::type_error&) {
      throw ConfigError("config: key '" + key + "' has the wrong type");
    }
  }
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  TrainConfig cfg;
  apply_config_json(cfg, ss.str());
  return cfg;
}

std::string config_json(const TrainConfig& c) {
  json j;
  j["total_iterations"] = c.total_iterations;
  j["upsample_at"] = c.upsample_at;
  j["upsample_rounds"] = c.upsample_rounds;
  j["icosphere_level"] = c.icosphere_level;
  j["initial_subdivisions"] = c.initial_subdivisions;
  j["lr_geometry"] = c.lr_geometry;
  j["lr_appearance"] = c.lr_appearance;
  j["lr_decay"] = c.lr_decay;
  j["lr_decay_every"] = c.lr_decay_every;
  j["pixel_sample_fraction"] = c.pixel_sample_fraction;
  j["lambda_shading"] = c.weights.shading;
  j["lambda_mask"] = c.weights.mask;
  j["lambda_laplacian"] = c.weights.laplacian;
  j["lambda_normal"] = c.weights.normal;
  j["lambda_feature"] = c.weights.feature;
  j["gamma"] = c.weights.gamma;
  j["seed"] = c.seed;
  j["holdout"] = c.holdout;
  j["use_geometry_mlp"] = c.flags.use_geometry_mlp;
  j["use_features"] = c.flags.use_features;
  j["use_baking"] = c.flags.use_baking;
  j["use_feature_reg"] = c.flags.use_feature_reg;
  j["geometry_hidden"] = c.dims.geometry_hidden;
  j["feature_dim"] = c.dims.feature_dim;
  j["shader_hidden"] = c.dims.shader_hidden;
  j["normal_hidden"] = c.dims.normal_hidden;
  j["hash_levels"] = c.dims.hash.levels;
  j["hash_log2_table_size"] = c.dims.hash.log2_table_size;
  j["hash_base_resolution"] = c.dims.hash.base_resolution;
  j["hash_max_resolution"] = c.dims.hash.max_resolution;
  return j.dump(2);
}

double geometry_lr(const TrainConfig& cfg, int iteration) {
  return cfg.lr_geometry * std::pow(cfg.lr_decay, double(iteration / cfg.lr_decay_every));
}

std::vector<std::uint32_t> sample_pixels(std::span<const float> gt_mask, std::span<const float> rendered_mask,
                                         double fraction, std::uint64_t seed) {
  if (gt_mask.size() != rendered_mask.size()) throw ad::ShapeError("sample_pixels: mask sizes differ");
  if (!(fraction > 0 && fraction <= 1)) throw std::invalid_argument("sample_pixels: fraction must be in (0, 1]");
  std::vector<std::uint32_t> pool;
  for (std::size_t p = 0; p < gt_mask.size(); ++p)
    if (gt_mask[p] > 0.5f && rendered_mask[p] > 0.5f) pool.push_back(std::uint32_t(p));
  const std::size_t k = std::min(pool.size(), std::size_t(std::ceil(fraction * double(pool.size()) - 1e-9)));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::string TrainReport::csv() const {
  std::string out = "iter,total,shading,mask,laplacian,normal,feature,lr_geom\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.iter, r.total, r.shading, r.mask,
                  r.laplacian, r.normal, r.feature, r.lr_geom);
    out += line;
  }
  return out;
}

std::string TrainReport::diagnostics_csv() const {
  std::string out = "iter,view,samples,vertices,normal_mse\n";
  char line[160];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%d,%zu,%zu,%zu,%.9g\n", r.iter, r.view, r.samples, r.vertices, r.normal_mse);
    out += line;
  }
  return out;
}

void TrainReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << csv();
}

raster::Image render_image(const SceneModel& model, const raster::Camera& cam) {
  return raster::tensor_image(model.render(cam).image, cam.width, cam.height);
}

double mean_psnr(const SceneModel& model, const data::Dataset& ds, const std::vector<std::size_t>& views) {
  if (views.empty()) return 0.0;
  const auto surface = model.surface();
  const auto shader = model.shader();
  double sum = 0;
  for (auto i : views) {
    const auto& v = ds.views.at(i);
    const auto r = raster::render(v.camera, surface, model.faces(), model.neighbors(), shader, mesh::Vec3::Zero());
    sum += data::psnr(raster::tensor_image(r.image, v.camera.width, v.camera.height), v.image, v.mask);
  }
  return sum / double(views.size());
}

namespace {

Tf detached(const Tf& t) { return Tf(t.shape(), std::vector<float>(t.data().begin(), t.data().end())); }

double value(const Tf& t) { return t.defined() ? double(t.data()[0]) : 0.0; }

std::string breakdown(const TrainRecord& r) {
  char b[256];
  std::snprintf(b, sizeof(b), "total=%g shading=%g mask=%g laplacian=%g normal=%g feature=%g", r.total, r.shading,
                r.mask, r.laplacian, r.normal, r.feature);
  return b;
}

std::vector<Tf> tensors(const fields::ParamList<float>& p) {
  std::vector<Tf> t;
  for (const auto& x : p) t.push_back(x.tensor);
  return t;
}

void ensure_grads(const ad::Adam<float>& opt) {
  for (auto t : opt.params()) (void)t.grad();
}

}  // namespace

TrainResult train(const data::Dataset& ds, const TrainConfig& cfg, std::optional<mesh::TriangleMesh> initial,
                  const TrainCallback& callback) {
  cfg.validate();
  ds.validate();
  if (ds.views.size() < 2) throw ConfigError("training needs at least 2 views");
  const auto t0 = std::chrono::steady_clock::now();

  TrainReport report;
  report.seed = cfg.seed;
  for (std::size_t i = 0; i < ds.views.size(); ++i)
    (cfg.holdout && data::is_holdout(i) ? report.holdout_views : report.train_views).push_back(i);
  if (report.train_views.empty()) throw ConfigError("no training views left after the holdout split");

  mesh::TriangleMesh init = initial ? std::move(*initial) : mesh::make_icosphere(cfg.icosphere_level);
  for (int r = 0; r < cfg.initial_subdivisions; ++r) init = mesh::loop_subdivide(init);
  SceneModel model(std::move(init), cfg.flags, cfg.dims, cfg.seed);

  ad::Adam<float> geo(tensors(model.geometry_params()));
  ad::Adam<float> app(tensors(model.appearance_params()));

  // Per-view targets as tensors.
  std::vector<Tf> target_rgb, target_mask;
  for (const auto& v : ds.views) {
    target_rgb.emplace_back(Tf({v.image.pixel_count(), 3}, v.image.data));
    target_mask.emplace_back(Tf({v.mask.pixel_count(), 1}, v.mask.data));
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick_view(0, report.train_views.size() - 1);
  std::vector<float> rendered;
  report.records.reserve(cfg.total_iterations);

  for (int it = 0; it < cfg.total_iterations; ++it) {
    if (cfg.upsample_at >= 0 && it == cfg.upsample_at && cfg.upsample_rounds > 0) {
      model.upsample(cfg.upsample_rounds);
      if (!model.flags().use_geometry_mlp) geo.rebind(0, model.geometry_params()[0].tensor);
    }
    const bool boosted = cfg.upsample_at >= 0 && it >= cfg.upsample_at;
    const std::size_t vi = report.train_views[pick_view(rng)];
    const std::uint64_t sample_seed = rng();
    const auto& view = ds.views[vi];
    const auto& cam = view.camera;

    TrainRecord rec;
    rec.iter = it;
    rec.view = vi;
    rec.vertices = model.initial().vertex_count();
    rec.lr_geom = geometry_lr(cfg, it);

    ad::Tape<float> tape;
    losses::LossTerms<float> terms;
    {
      ad::Tape<float>::Scope scope(tape);
      Tf reg_features;
      const auto surface = model.surface(model.has_normal_predictor() ? &reg_features : nullptr);
      const auto frame = raster::rasterize(cam, raster::tensor_points(surface.positions), model.faces());
      const auto soft = raster::soft_mask(surface.positions, model.faces(), model.neighbors(), frame, cam);
      terms.mask = losses::mask_loss(soft, target_mask[vi]);

      rendered.assign(frame.pixel_count(), 0.0f);
      const auto sv = soft.data();
      for (std::size_t p = 0; p < rendered.size(); ++p) rendered[p] = frame.covered(p) ? sv[p] : 0.0f;
      auto sample = sample_pixels(view.mask.data, rendered, cfg.pixel_sample_fraction, sample_seed);
      rec.samples = sample.size();

      if (!sample.empty()) {
        const auto px = raster::gather_pixels(surface, model.faces(), frame, cam, sample);
        const auto color = raster::shade_pixels(px, model.shader());
        terms.shading = losses::shading_loss(color, ad::gather(target_rgb[vi], std::span<const std::uint32_t>(px.pixels)));
        if (model.has_normal_predictor()) {
          // Rasterized normals and view directions act as targets: the term
          // shapes the features, not the surface.
          const auto x = detached(px.positions);
          const auto z = raster::interpolate(reg_features, detached(surface.positions), model.faces(), frame, cam,
                                             std::span<const std::uint32_t>(px.pixels));
          const auto pred = model.predict_normals(x, z);
          if (cfg.flags.use_feature_reg)
            terms.feature = losses::feature_reg_loss(pred, detached(px.normals), detached(px.view_dirs));
          const auto a = pred.data(), b = px.normals.data();
          double se = 0;
          for (std::size_t k = 0; k < a.size(); ++k) se += double(a[k] - b[k]) * double(a[k] - b[k]);
          rec.normal_mse = se / double(a.size());
        }
      } else {
        terms.shading = losses::shading_loss(Tf({0, 3}, {}), Tf({0, 3}, {}));
      }
      terms.laplacian = losses::laplacian_loss(surface.positions, model.laplacian());
      terms.normal = losses::normal_consistency_loss(surface.positions, model.corners(), model.face_pairs());

      const auto total = losses::total_loss(terms, cfg.weights, boosted);
      rec.total = value(total);
      rec.shading = value(terms.shading);
      rec.mask = value(terms.mask);
      rec.laplacian = value(terms.laplacian);
      rec.normal = value(terms.normal);
      rec.feature = value(terms.feature);
      if (!std::isfinite(rec.total))
        throw TrainingError("non-finite loss at iteration " + std::to_string(it) + ": " + breakdown(rec));
      tape.backward(total);
    }
    ensure_grads(geo);
    ensure_grads(app);
    geo.step(rec.lr_geom);
    app.step(cfg.lr_appearance);
    report.records.push_back(rec);
    if (callback && !callback(rec, model)) break;
  }

  TrainResult result{std::move(model), {}, std::move(report)};
  result.mesh = result.model.export_mesh();
  result.report.final_vertices = result.mesh.vertex_count();
  result.report.final_faces = result.mesh.face_count();
  {
    const auto surface = result.model.surface();
    const auto shader = result.model.shader();
    for (auto i : result.report.train_views) {
      const auto& v = ds.views[i];
      const auto r = raster::render(v.camera, surface, result.model.faces(), result.model.neighbors(), shader,
                                    mesh::Vec3::Zero());
      result.report.final_train_psnr.push_back(
          data::psnr(raster::tensor_image(r.image, v.camera.width, v.camera.height), v.image, v.mask));
    }
  }
  result.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace nmr::train
