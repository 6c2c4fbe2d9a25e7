#include "nmr/cli/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nmr/dataset/dataset.hpp"
#include "nmr/kernels/parallel.hpp"
#include "nmr/mesh/io.hpp"
#include "nmr/mesh/operations.hpp"
#include "nmr/mesh/sampling.hpp"
#include "nmr/mesh/topology.hpp"
#include "nmr/trainer/trainer.hpp"

namespace nmr::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Bad arguments or unusable inputs detected before any work: exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out;
  std::string config;
  bool json = false;
};

struct TrainArgs {
  std::string dataset;
  int iters = -1;
  int level = -1;
  int upsample_at = -2;
  std::string ablation;
  std::string profile;
  bool no_holdout = false;
  int log_every = 0;
};

struct RenderArgs {
  std::string checkpoint, dataset, mesh;
  std::vector<std::string> views;
};

struct EvalArgs {
  std::string run, mesh, checkpoint, dataset, gt;
  std::size_t samples = 20000;
};

struct RefineArgs {
  std::string mesh;
  int subdiv = 3;
};

struct MorphArgs {
  std::string a, b, dataset, view, shader = "a";
  std::vector<double> t = {0.0, 0.5, 1.0};
};

struct TransferArgs {
  std::string geometry, appearance, dataset, mode = "specular";
  std::vector<std::string> views;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  fs::create_directories(g.out);
  return g.out;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << j.dump(2) << "\n";
}

data::Dataset load_dataset_arg(const std::string& dir) {
  if (dir.empty()) throw UsageError("a dataset directory is required");
  if (!fs::is_directory(dir)) throw UsageError("dataset directory '" + dir + "' does not exist");
  return data::load_dataset(dir);
}

train::SceneModel load_model(const std::string& path) {
  if (path.empty()) throw UsageError("a checkpoint is required");
  if (!fs::exists(path)) throw UsageError("checkpoint '" + path + "' does not exist");
  return train::SceneModel::from_checkpoint(fields::load_checkpoint(path));
}

mesh::TriangleMesh load_mesh_arg(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("mesh '" + path + "' does not exist");
  auto m = mesh::load_mesh(path);
  m.validate();
  return m;
}

std::vector<std::size_t> select_views(const data::Dataset& ds, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  if (names.empty()) {
    for (std::size_t i = 0; i < ds.views.size(); ++i) idx.push_back(i);
    return idx;
  }
  for (const auto& n : names) {
    bool found = false;
    for (std::size_t i = 0; i < ds.views.size(); ++i)
      if (ds.views[i].name == n) idx.push_back(i), found = true;
    if (!found) {
      try {
        (void)ds.view(n);
      } catch (const data::DatasetError& e) {
        throw UsageError(e.what());
      }
    }
  }
  return idx;
}

train::TrainConfig build_config(const Globals& g, const TrainArgs& a, std::ostream& err) {
  train::TrainConfig cfg;
  if (!g.config.empty()) cfg = train::load_config(g.config);
  if (a.profile == "paper") {
    const auto keep = cfg;
    cfg = train::TrainConfig::paper();
    cfg.flags = keep.flags;
  } else if (!a.profile.empty() && a.profile != "desk") {
    throw UsageError("--profile must be desk or paper");
  }
  if (!a.ablation.empty()) {
    if (a.ablation.size() != 1) throw UsageError("--ablation takes one of a, b, c, d, e");
    cfg.flags = train::AblationFlags::setting(a.ablation[0]);
  }
  if (a.level >= 0) cfg.icosphere_level = a.level;
  if (a.iters > 0) cfg.total_iterations = a.iters;
  if (a.upsample_at >= -1) cfg.upsample_at = a.upsample_at;
  if (cfg.upsample_at >= cfg.total_iterations) {
    err << "note: upsampling event at " << cfg.upsample_at << " is past the last iteration; disabled\n";
    cfg.upsample_at = -1;
  }
  if (g.seed_set) cfg.seed = g.seed;
  if (a.no_holdout) cfg.holdout = false;
  cfg.validate();
  return cfg;
}

json report_summary(const train::TrainResult& r, const data::Dataset& ds) {
  json j;
  const auto& rep = r.report;
  j["iterations"] = rep.records.size();
  j["seconds"] = rep.seconds;
  j["seed"] = rep.seed;
  j["vertices"] = rep.final_vertices;
  j["faces"] = rep.final_faces;
  if (!rep.records.empty()) j["final_total_loss"] = rep.records.back().total;
  json psnr = json::object();
  for (std::size_t k = 0; k < rep.train_views.size(); ++k) psnr[ds.views[rep.train_views[k]].name] = rep.final_train_psnr[k];
  j["final_train_psnr"] = psnr;
  json hold = json::array();
  for (auto i : rep.holdout_views) hold.push_back(ds.views[i].name);
  j["holdout_views"] = hold;
  return j;
}

json run_training(const Globals& g, const TrainArgs& a, std::optional<mesh::TriangleMesh> initial,
                  train::TrainConfig cfg, std::ostream& err) {
  const auto ds = load_dataset_arg(a.dataset);
  const auto out = require_out(g);
  train::TrainCallback cb;
  if (a.log_every > 0)
    cb = [&](const train::TrainRecord& r, const train::SceneModel&) {
      if (r.iter % a.log_every == 0)
        err << "iter " << r.iter << " total " << r.total << " shading " << r.shading << " mask " << r.mask
            << " vertices " << r.vertices << "\n";
      return true;
    };
  const auto result = train::train(ds, cfg, std::move(initial), cb);
  mesh::save_ply(result.mesh, out / "mesh.ply");
  fields::save_checkpoint(result.model.checkpoint(), out / "checkpoint.nmr");
  result.report.write_csv(out / "report.csv");
  {
    std::ofstream f(out / "diagnostics.csv", std::ios::binary);
    f << result.report.diagnostics_csv();
  }
  {
    std::ofstream f(out / "config.json", std::ios::binary);
    f << train::config_json(cfg) << "\n";
  }
  json j = report_summary(result, ds);
  j["ablation"] = std::string(1, cfg.flags.setting_name());
  j["outputs"] = {{"mesh", (out / "mesh.ply").string()},
                  {"checkpoint", (out / "checkpoint.nmr").string()},
                  {"report", (out / "report.csv").string()}};
  if (ds.gt_mesh) j["chamfer"] = mesh::chamfer_distance(result.mesh, *ds.gt_mesh, 20000, 1);
  write_json(out / "summary.json", j);
  return j;
}

json cmd_generate(const Globals& g, const std::string& shape, int views, int size, int level) {
  data::SyntheticOptions o;
  try {
    o.shape = data::parse_shape(shape);
  } catch (const data::DatasetError& e) {
    throw UsageError(e.what());
  }
  if (views < 2) throw UsageError("--views must be at least 2, got " + std::to_string(views));
  if (size < 8 || size > 4096) throw UsageError("--size must be in [8, 4096]");
  o.views = views;
  o.width = o.height = size;
  o.mesh_level = level;
  o.seed = g.seed;
  const auto out = require_out(g);
  const auto ds = data::generate_synthetic(o);
  data::save_dataset(ds, out);
  return {{"views", ds.views.size()},
          {"size", size},
          {"shape", data::shape_name(o.shape)},
          {"gt_vertices", ds.gt_mesh->vertex_count()},
          {"outputs", {{"dataset", out.string()}}}};
}

json cmd_render(const Globals& g, const RenderArgs& a) {
  const auto model = load_model(a.checkpoint);
  const auto ds = load_dataset_arg(a.dataset);
  const auto idx = select_views(ds, a.views);
  std::optional<mesh::TriangleMesh> edited;
  if (!a.mesh.empty()) edited = load_mesh_arg(a.mesh);
  const auto out = require_out(g);
  json psnr = json::object(), files = json::array(), timings = json::array();
  for (auto i : idx) {
    const auto& v = ds.views[i];
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = edited ? model.render_mesh(v.camera, *edited) : model.render(v.camera);
    timings.push_back(seconds_since(t0));
    const auto img = raster::tensor_image(r.image, v.camera.width, v.camera.height);
    const auto path = out / (v.name + ".png");
    raster::save_png(img, path);
    files.push_back(path.string());
    psnr[v.name] = data::psnr(img, v.image, v.mask);
  }
  return {{"psnr", psnr}, {"render_seconds", timings}, {"outputs", files}};
}

json cmd_evaluate(const Globals& g, const EvalArgs& a, std::ostream& err) {
  std::string mesh_path = a.mesh, ckpt_path = a.checkpoint;
  if (!a.run.empty()) {
    if (!fs::is_directory(a.run)) throw UsageError("run directory '" + a.run + "' does not exist");
    if (mesh_path.empty()) mesh_path = (fs::path(a.run) / "mesh.ply").string();
    if (ckpt_path.empty() && fs::exists(fs::path(a.run) / "checkpoint.nmr"))
      ckpt_path = (fs::path(a.run) / "checkpoint.nmr").string();
  }
  if (mesh_path.empty()) throw UsageError("evaluate needs --run or --mesh");
  const auto m = load_mesh_arg(mesh_path);
  json j;
  std::optional<data::Dataset> ds;
  if (!a.dataset.empty()) ds = load_dataset_arg(a.dataset);
  std::optional<mesh::TriangleMesh> gt;
  if (!a.gt.empty()) gt = load_mesh_arg(a.gt);
  else if (ds && ds->gt_mesh) gt = ds->gt_mesh;
  const std::uint64_t seed = g.seed_set ? g.seed : 1;
  if (gt) {
    j["chamfer"] = mesh::chamfer_distance(m, *gt, a.samples, seed);
  } else {
    err << "notice: no ground-truth mesh; chamfer distance skipped\n";
    j["chamfer"] = nullptr;
  }
  if (ds && !ckpt_path.empty()) {
    const auto model = load_model(ckpt_path);
    std::vector<std::size_t> hold, all;
    for (std::size_t i = 0; i < ds->views.size(); ++i) {
      all.push_back(i);
      if (data::is_holdout(i)) hold.push_back(i);
    }
    if (hold.empty()) hold = all;
    j["psnr_holdout"] = train::mean_psnr(model, *ds, hold);
    j["psnr_all"] = train::mean_psnr(model, *ds, all);
    json names = json::array();
    for (auto i : hold) names.push_back(ds->views[i].name);
    j["holdout_views"] = names;
  }
  j["samples"] = a.samples;
  if (!g.out.empty()) {
    const auto out = require_out(g);
    write_json(out / "evaluation.json", j);
    j["outputs"] = {(out / "evaluation.json").string()};
  }
  return j;
}

void check_manifold(const mesh::TriangleMesh& m) {
  try {
    const auto topo = mesh::EdgeTopology::build(m);
    if (!topo.closed()) throw UsageError("refine: input mesh is not a closed manifold (open edges)");
  } catch (const mesh::MeshError& e) {
    throw UsageError(std::string("refine: input mesh is not manifold: ") + e.what());
  }
}

struct LoadedPair {
  fields::Checkpoint a, b;
};

LoadedPair load_pair(const std::string& a, const std::string& b, const char* what) {
  if (a.empty() || b.empty()) throw UsageError(std::string(what) + " needs two checkpoints");
  for (const auto& p : {a, b})
    if (!fs::exists(p)) throw UsageError("checkpoint '" + p + "' does not exist");
  return {fields::load_checkpoint(a), fields::load_checkpoint(b)};
}

json cmd_morph(const Globals& g, const MorphArgs& a) {
  const auto [ca, cb] = load_pair(a.a, a.b, "morph");
  for (const char* key : {"mesh/initial_vertices", "mesh/faces"}) {
    const auto ia = ca.find(key), ib = cb.find(key);
    if (ia == ca.end() || ib == cb.end() || ia->second.dims != ib->second.dims || ia->second.data != ib->second.data)
      throw UsageError("morph: checkpoints do not share the initial mesh topology");
  }
  const auto A = train::SceneModel::from_checkpoint(ca);
  const auto B = train::SceneModel::from_checkpoint(cb);
  const auto ma = A.export_mesh(), mb = B.export_mesh();
  const auto& init = A.initial().vertices;
  if (a.shader != "a" && a.shader != "b") throw UsageError("--shader must be a or b");
  std::optional<data::Dataset> ds;
  std::size_t view = 0;
  if (!a.view.empty()) {
    ds = load_dataset_arg(a.dataset);
    view = select_views(*ds, {a.view}).front();
  }
  const auto out = require_out(g);
  json frames = json::array();
  for (std::size_t k = 0; k < a.t.size(); ++k) {
    const double t = a.t[k];
    mesh::TriangleMesh m;
    m.faces = ma.faces;
    m.vertices.resize(init.size());
    for (std::size_t v = 0; v < init.size(); ++v)
      m.vertices[v] = init[v] + (1 - t) * (ma.vertices[v] - init[v]) + t * (mb.vertices[v] - init[v]);
    if (ma.feature_dim == mb.feature_dim && ma.has_features()) {
      m.feature_dim = ma.feature_dim;
      m.features.resize(ma.features.size());
      for (std::size_t i = 0; i < m.features.size(); ++i)
        m.features[i] = float((1 - t) * ma.features[i] + t * mb.features[i]);
    }
    if (ma.has_colors() && mb.has_colors()) {
      m.colors.resize(init.size());
      for (std::size_t v = 0; v < init.size(); ++v) m.colors[v] = (1 - t) * ma.colors[v] + t * mb.colors[v];
    }
    m.normals = mesh::vertex_normals(m).normals;
    char name[64];
    std::snprintf(name, sizeof(name), "morph_%03zu", k);
    json f = {{"t", t}, {"mesh", (out / (std::string(name) + ".ply")).string()}};
    mesh::save_ply(m, out / (std::string(name) + ".ply"));
    if (ds) {
      const auto& shader = a.shader == "a" ? A : B;
      const auto& cam = ds->views[view].camera;
      const auto r = shader.render_mesh(cam, m);
      raster::save_png(raster::tensor_image(r.image, cam.width, cam.height), out / (std::string(name) + ".png"));
      f["image"] = (out / (std::string(name) + ".png")).string();
    }
    frames.push_back(f);
  }
  return {{"frames", frames}, {"vertices", init.size()}};
}

json cmd_transfer(const Globals& g, const TransferArgs& a) {
  auto [composed, app] = load_pair(a.geometry, a.appearance, "transfer");
  if (a.mode != "specular" && a.mode != "specular+diffuse")
    throw UsageError("--mode must be specular or specular+diffuse");
  auto swapped = [&](const std::string& name) {
    if (name.rfind("appearance/shader", 0) == 0) return true;
    return a.mode == "specular+diffuse" &&
           (name.rfind("geometry/diffuse.", 0) == 0 || name.rfind("appearance/diffuse", 0) == 0);
  };
  std::size_t n_swapped = 0;
  for (auto& [name, rec] : composed) {
    if (!swapped(name)) continue;
    const auto it = app.find(name);
    if (it == app.end()) throw UsageError("transfer: appearance checkpoint has no '" + name + "'");
    if (it->second.dims != rec.dims)
      throw UsageError("transfer: '" + name + "' has incompatible shapes (feature dimensions differ)");
    rec = it->second;
    ++n_swapped;
  }
  for (const auto& [name, rec] : app)
    if (swapped(name) && !composed.count(name))
      throw UsageError("transfer: geometry checkpoint has no '" + name + "'");
  const auto model = train::SceneModel::from_checkpoint(composed);
  const auto ds = load_dataset_arg(a.dataset);
  const auto idx = select_views(ds, a.views);
  const auto out = require_out(g);
  fields::save_checkpoint(composed, out / "checkpoint.nmr");
  json files = json::array();
  for (auto i : idx) {
    const auto& v = ds.views[i];
    const auto img = train::render_image(model, v.camera);
    raster::save_png(img, out / (v.name + ".png"));
    files.push_back((out / (v.name + ".png")).string());
  }
  return {{"mode", a.mode}, {"records_swapped", n_swapped}, {"outputs", files}};
}

}  // namespace

CommandResult run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural mesh reconstruction: synthetic data, training, rendering and mesh editing"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--config", g.config, "Flat JSON training config");
  app.add_flag("--json", g.json, "Print the summary as one JSON object");

  std::string shape = "displaced_sphere";
  int views = 24, size = 128, gt_level = 6;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  gen->add_option("--shape", shape, "sphere, displaced_sphere or box_blob");
  gen->add_option("--views", views, "Number of views");
  gen->add_option("--size", size, "Image width and height in pixels");
  gen->add_option("--mesh-level", gt_level, "Icosphere level of the ground-truth mesh")->check(CLI::Range(0, 8));

  TrainArgs ta;
  auto add_train_opts = [&](CLI::App* c) {
    c->add_option("dataset", ta.dataset, "Dataset directory")->required();
    c->add_option("--iters", ta.iters, "Total iterations");
    c->add_option("--icosphere-level", ta.level, "Initial icosphere level")->check(CLI::Range(0, 8));
    c->add_option("--ablation", ta.ablation, "Setting a, b, c, d or e");
    c->add_option("--profile", ta.profile, "desk or paper");
    c->add_option("--upsample-at", ta.upsample_at, "Iteration of the upsampling event (-1 disables)");
    c->add_flag("--no-holdout", ta.no_holdout, "Train on every view");
    c->add_option("--log-every", ta.log_every, "Progress line every N iterations");
  };
  auto* rec = app.add_subcommand("reconstruct", "Train on a dataset");
  add_train_opts(rec);

  RefineArgs fa;
  auto* ref = app.add_subcommand("refine", "Train starting from an input mesh");
  add_train_opts(ref);
  ref->add_option("--mesh", fa.mesh, "Input mesh (PLY or OBJ)")->required();
  ref->add_option("--subdiv", fa.subdiv, "Loop subdivision rounds before training")->check(CLI::Range(0, 4));

  RenderArgs ra;
  auto* ren = app.add_subcommand("render", "Render dataset views from a checkpoint");
  ren->add_option("--checkpoint", ra.checkpoint, "checkpoint.nmr")->required();
  ren->add_option("--dataset", ra.dataset, "Dataset with the cameras")->required();
  ren->add_option("--view", ra.views, "View names (default all)");
  ren->add_option("--mesh", ra.mesh, "Edited mesh to render with the trained shader");

  EvalArgs ea;
  auto* ev = app.add_subcommand("evaluate", "Chamfer distance and held-out PSNR");
  ev->add_option("--run", ea.run, "Reconstruction output directory");
  ev->add_option("--mesh", ea.mesh, "Mesh to evaluate");
  ev->add_option("--checkpoint", ea.checkpoint, "Checkpoint for PSNR");
  ev->add_option("--dataset", ea.dataset, "Dataset directory");
  ev->add_option("--gt", ea.gt, "Ground-truth mesh (default: the dataset's)");
  ev->add_option("--samples", ea.samples, "Surface samples per mesh")->check(CLI::PositiveNumber);

  MorphArgs ma;
  auto* mo = app.add_subcommand("morph", "Interpolate two trained deformation fields");
  mo->add_option("--a", ma.a, "First checkpoint")->required();
  mo->add_option("--b", ma.b, "Second checkpoint")->required();
  mo->add_option("--t", ma.t, "Interpolation parameters")->delimiter(',');
  mo->add_option("--dataset", ma.dataset, "Dataset for rendering frames");
  mo->add_option("--view", ma.view, "View to render each frame from");
  mo->add_option("--shader", ma.shader, "Shade with the a or b model");

  TransferArgs xa;
  auto* tr = app.add_subcommand("transfer", "Geometry of one scene with the appearance of another");
  tr->add_option("--geometry", xa.geometry, "Checkpoint providing geometry")->required();
  tr->add_option("--appearance", xa.appearance, "Checkpoint providing appearance")->required();
  tr->add_option("--mode", xa.mode, "specular or specular+diffuse");
  tr->add_option("--dataset", xa.dataset, "Dataset with the cameras")->required();
  tr->add_option("--view", xa.views, "View names (default all)");

  CommandResult result;
  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return result;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    result.exit_code = kExitUsage;
    return result;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::string command;
  try {
    if (g.threads > 0) kernels::set_threads(g.threads);
    if (*gen) command = "generate", result.summary = cmd_generate(g, shape, views, size, gt_level);
    else if (*rec) {
      command = "reconstruct";
      result.summary = run_training(g, ta, std::nullopt, build_config(g, ta, err), err);
    } else if (*ref) {
      command = "refine";
      auto m = load_mesh_arg(fa.mesh);
      check_manifold(m);
      m.normals.clear();
      m.colors.clear();
      m.features.clear();
      m.feature_dim = 0;
      const std::size_t input_vertices = m.vertex_count();
      for (int r = 0; r < fa.subdiv; ++r) m = mesh::loop_subdivide(m);
      auto cfg = build_config(g, ta, err);
      // Already at the working resolution: regularizers boosted from the start, no event.
      cfg.upsample_at = 0;
      cfg.upsample_rounds = 0;
      json input = {{"input_vertices", input_vertices}, {"subdivided_vertices", m.vertex_count()}};
      if (!ta.dataset.empty()) {
        const auto ds = load_dataset_arg(ta.dataset);
        if (ds.gt_mesh) input["input_chamfer"] = mesh::chamfer_distance(load_mesh_arg(fa.mesh), *ds.gt_mesh, 20000, 1);
      }
      result.summary = run_training(g, ta, std::move(m), cfg, err);
      result.summary.update(input);
      write_json(fs::path(g.out) / "summary.json", result.summary);
    } else if (*ren) command = "render", result.summary = cmd_render(g, ra);
    else if (*ev) command = "evaluate", result.summary = cmd_evaluate(g, ea, err);
    else if (*mo) command = "morph", result.summary = cmd_morph(g, ma);
    else if (*tr) command = "transfer", result.summary = cmd_transfer(g, xa);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    result.exit_code = kExitUsage;
  } catch (const train::ConfigError& e) {
    err << "error: " << e.what() << "\n";
    result.exit_code = kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    result.exit_code = kExitFailure;
  }
  result.summary["command"] = command;
  result.summary["exit_code"] = result.exit_code;
  result.summary["seconds"] = seconds_since(t0);
  if (g.json) {
    out << result.summary.dump() << "\n";
  } else if (result.exit_code == kExitOk) {
    out << command << ": done\n";
    for (const auto& [k, v] : result.summary.items())
      if (k != "command" && k != "exit_code" && k != "outputs" && k != "final_train_psnr") out << "  " << k << ": " << v.dump() << "\n";
  }
  return result;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr).exit_code;
}

}  // namespace nmr::cli
