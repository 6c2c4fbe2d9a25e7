// Acceptance runner: one PASS/FAIL line per primary criterion.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmr/cli/cli.hpp"
#include "nmr/dataset/dataset.hpp"
#include "nmr/encodings/hash_grid.hpp"
#include "nmr/encodings/sh.hpp"
#include "nmr/fields/networks.hpp"
#include "nmr/kernels/parallel.hpp"
#include "nmr/losses/losses.hpp"
#include "nmr/mesh/io.hpp"
#include "nmr/mesh/operations.hpp"
#include "nmr/mesh/sampling.hpp"
#include "nmr/mesh/topology.hpp"
#include "nmr/raster/render.hpp"
#include "nmr/trainer/trainer.hpp"
#include "support/gradcheck.hpp"
#include "support/mesh_fixtures.hpp"
#include "support/op_cases.hpp"
#include "support/raster_oracle.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nmr;
using TD = ad::Tensor<double>;

namespace {

// Frozen thresholds.
constexpr double kGradRelTol = 1e-5;
constexpr double kGradSmallAbsTol = 1e-7;
constexpr double kSilhouetteTol = 0.05;
constexpr double kCdFactor = 0.2;
constexpr double kHoldoutPsnr = 25.0;
constexpr double kAblationSlack = 1.2;
constexpr double kNormalMseFactor = 0.5;
constexpr double kMorphTol = 1e-6;
constexpr int kMovingWindow = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string key;
  std::string title;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char b[64];
  std::snprintf(b, sizeof(b), f, a);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// CLI driver

struct Options {
  fs::path work;
  int threads = 0;
  int log_every = 0;
};

Options g_opt;

json nmr_cli(std::vector<std::string> args) {
  args.insert(args.begin(), {"nmr", "--json"});
  if (g_opt.threads > 0 && std::find(args.begin(), args.end(), "--threads") == args.end())
    args.insert(args.begin() + 2, {"--threads", std::to_string(g_opt.threads)});
  std::ostringstream out, err;
  const auto r = cli::run_cli(args, out, err);
  if (r.exit_code != cli::kExitOk) {
    std::string cmd;
    for (const auto& a : args) cmd += a + " ";
    throw std::runtime_error("command failed (exit " + std::to_string(r.exit_code) + "): " + cmd + "\n" + err.str());
  }
  return r.summary;
}

fs::path dataset_dir() {
  const auto d = g_opt.work / "displaced_sphere";
  if (!fs::exists(d / "cameras.json"))
    nmr_cli({"--seed", "1", "--out", d.string(), "generate", "--shape", "displaced_sphere", "--views", "24", "--size",
             "128"});
  return d;
}

// Full desk-profile reconstruction for one ablation setting, cached per run.
struct RunResult {
  fs::path dir;
  double chamfer = 0;
  double psnr_holdout = 0;
  double seconds = 0;
};

std::map<char, RunResult> g_runs;

const RunResult& desk_run(char setting) {
  auto it = g_runs.find(setting);
  if (it != g_runs.end()) return it->second;
  const auto ds = dataset_dir();
  RunResult r;
  r.dir = g_opt.work / (std::string("run_") + setting);
  std::vector<std::string> args = {"--seed", "1", "--out", r.dir.string(), "reconstruct", ds.string(), "--ablation",
                                   std::string(1, setting), "--profile", "desk"};
  const auto t0 = std::chrono::steady_clock::now();
  nmr_cli(args);
  r.seconds = seconds_since(t0);
  const auto ev = nmr_cli({"evaluate", "--run", r.dir.string(), "--dataset", ds.string()});
  r.chamfer = ev.at("chamfer").get<double>();
  r.psnr_holdout = ev.at("psnr_holdout").get<double>();
  std::cout << "  [run " << setting << "] CD " << r.chamfer << "  held-out PSNR " << r.psnr_holdout << " dB  "
            << fmt("%.0f s", r.seconds) << std::endl;
  return g_runs[setting] = r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(f), {}};
}

// ---------------------------------------------------------------------------
// Gradient suite

struct GradTally {
  double worst_rel = 0, worst_small = 0;
  std::string worst_name;
  std::size_t compared = 0;
  std::vector<std::string> failures;

  void add(const std::string& name, const testing::GradCheckReport& r) {
    compared += r.compared;
    if (r.max_rel_error > worst_rel) worst_rel = r.max_rel_error, worst_name = name;
    worst_small = std::max(worst_small, r.max_abs_error_small);
    if (!r.ok(kGradRelTol, kGradSmallAbsTol)) failures.push_back(name + " (" + r.worst + r.worst_small + ")");
  }
};

template <typename T>
std::vector<ad::Tensor<T>> tensors(const fields::ParamList<T>& p) {
  std::vector<ad::Tensor<T>> out;
  for (const auto& x : p) out.push_back(x.tensor);
  return out;
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  GradTally tally;
  using testing::contract;

  std::uint64_t seed = 100;
  for (const auto& c : testing::builtin_op_cases()) {
    std::vector<TD> params;
    for (const auto& s : c.shapes) params.push_back(testing::random_tensor(s, seed++));
    const auto out_seed = seed++;
    tally.add(std::string("op ") + c.name, testing::check_gradients(params, [&] { return contract(c.fn(params), out_seed); }));
  }

  {
    fields::GeometryFieldConfig gc;
    gc.hidden = 16;
    gc.feature_dim = 8;
    gc.hash.levels = 3;
    gc.hash.log2_table_size = 6;
    gc.hash.base_resolution = 2;
    gc.hash.max_resolution = 8;
    fields::GeometryField<double> g(gc, 7);
    for (auto& w : g.deform_head.weight.mutable_data()) w = 0.3;
    for (auto& w : g.hash().table().mutable_data()) w *= 1e4;
    fields::ParamList<double> p;
    g.collect(p);
    const TD x({12, 3}, testing::uniform_values(36, 8, -1, 1));
    tally.add("geometry field", testing::check_gradients(tensors(p), [&] {
                const auto o = g(x);
                return ad::add(ad::add(contract(o.offset, 1), contract(o.feature, 2)), contract(o.diffuse, 3));
              }));
  }
  {
    fields::AppearanceShader<double> h(89, 64, -1.0, 9);
    fields::ParamList<double> p;
    h.collect("appearance/shader", p);
    const TD in({10, 89}, testing::uniform_values(890, 10, -1, 1));
    tally.add("appearance shader", testing::check_gradients(tensors(p), [&] { return contract(h(in), 11); }));
  }
  {
    fields::NormalPredictor<double> pn(64, 256, 12);
    fields::ParamList<double> p;
    pn.collect(p);
    const TD x({6, 3}, testing::uniform_values(18, 13, -1, 1));
    const TD z({6, 64}, testing::uniform_values(384, 14, -1, 1));
    tally.add("normal predictor", testing::check_gradients(tensors(p), [&] { return contract(pn(x, z), 15); }));
  }

  {
    enc::HashGridConfig hc;
    hc.levels = 4;
    hc.features = 2;
    hc.log2_table_size = 6;
    hc.base_resolution = 2;
    hc.max_resolution = 16;
    enc::HashGrid<double> g(hc, 9);
    const TD x({200, 3}, testing::uniform_values(600, 10, -1.2, 1.2));
    testing::GradCheckOptions opt;
    opt.max_entries_per_param = 256;
    tally.add("hash table", testing::check_gradients({g.table()}, [&] { return contract(g.encode(x), 11); }, opt));
    enc::HashGrid<double> g2(hc, 12);
    for (auto& v : g2.table().mutable_data()) v *= 1e4;
    auto xp = testing::random_tensor({20, 3}, 13, -1.0, 1.0);
    tally.add("hash points", testing::check_gradients({xp}, [&] { return contract(g2.encode(xp), 14); }));
    auto d = testing::random_tensor({16, 3}, 23, 0.5, 2.0);
    tally.add("sh encode", testing::check_gradients({d}, [&] { return contract(enc::sh_encode(d), 24); }));
  }

  {
    const auto cam = raster::Camera::look_at({0.4, -2.5, 0.7}, {0, 0, 0}, {0, 0, 1}, 20, 20, 22);
    const auto ico = mesh::make_icosphere(1);
    const auto fr = raster::rasterize(cam, ico.vertices, ico.faces);
    const auto px = fr.covered_pixels();
    const std::size_t V = ico.vertex_count();
    TD attr({V, 4}, testing::uniform_values(V * 4, 3, -1, 1));
    TD pos = fields::positions_tensor<double>(ico.vertices);
    tally.add("interpolate", testing::check_gradients({attr, pos}, [&] {
                return contract(raster::interpolate(attr, pos, ico.faces, fr, cam, px), 21);
              }));
  }

  {
    const TD target({10, 3}, testing::uniform_values(30, 2, 0, 1));
    std::vector<double> r(target.data().begin(), target.data().end());
    const auto off = testing::uniform_values(30, 3, 0.05, 0.3);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += (i % 2 ? off[i] : -off[i]);
    TD rendered({10, 3}, r);
    const std::vector<std::uint32_t> idx = {1, 3, 4, 8};
    tally.add("shading loss", testing::check_gradients({rendered}, [&] {
                return losses::shading_loss(rendered, target, idx);
              }));
    tally.add("mask loss", testing::check_gradients({rendered}, [&] {
                return losses::mask_loss(ad::columns(rendered, 0, 1), ad::columns(target, 0, 1));
              }));

    auto ico = mesh::make_icosphere(1);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> j(-0.1, 0.1);
    for (auto& v : ico.vertices) v += mesh::Vec3(j(rng), j(rng), j(rng));
    const auto topo = mesh::EdgeTopology::build(ico);
    const auto L = mesh::uniform_laplacian(topo, ico.vertex_count());
    const mesh::FaceCorners c(ico.faces);
    const auto pairs = mesh::adjacent_face_pairs(topo);
    TD pos = fields::positions_tensor<double>(ico.vertices);
    tally.add("laplacian loss", testing::check_gradients({pos}, [&] { return losses::laplacian_loss(pos, L); }));
    tally.add("normal consistency loss",
              testing::check_gradients({pos}, [&] { return losses::normal_consistency_loss(pos, c, pairs); }));

    const std::size_t P = 12;
    TD pred({P, 3}, testing::uniform_values(P * 3, 4, -1, 1));
    const TD rn({P, 3}, testing::uniform_values(P * 3, 5, -1, 1));
    const TD vd({P, 3}, testing::uniform_values(P * 3, 6, -1, 1));
    tally.add("feature regularization loss", testing::check_gradients({pred}, [&] {
                return losses::feature_reg_loss(ad::l2_normalize(pred), ad::l2_normalize(rn), ad::l2_normalize(vd));
              }));
  }

  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = tally.failures.empty() && secs < 120.0;
  std::ostringstream d;
  d << "worst rel err " << fmt("%.2e", tally.worst_rel) << " (" << tally.worst_name << "), " << tally.compared
    << " entries, " << fmt("%.1f s", secs);
  for (const auto& f : tally.failures) d << "; FAILED " << f;
  if (secs >= 120.0) d << "; over the 2 min budget";
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------
// Rasterizer oracle

Outcome rasterizer_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cam = testing::axis_camera(32, 32, 30);
  std::mt19937_64 rng(2024);
  std::size_t covered = 0, mismatches = 0;
  for (int scene = 0; scene < 200; ++scene) {
    std::vector<mesh::Face> faces;
    const auto v = testing::random_scene(rng, cam, 1 + scene % 24, faces);
    const auto fr = raster::rasterize(cam, v, faces);
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        const std::size_t p = std::size_t(y) * 32 + x;
        const auto hits = testing::oracle_pixel(cam, v, faces, x, y);
        if (hits.empty()) {
          mismatches += fr.tri[p] != raster::kNoTriangle;
          continue;
        }
        ++covered;
        mismatches += fr.tri[p] != hits[0].id || fr.u[p] != hits[0].u || fr.v[p] != hits[0].v;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && covered > 0 && secs < 60.0,
          std::to_string(mismatches) + " mismatching pixels, " + std::to_string(covered) +
              " covered pixels over 200 scenes, " + fmt("%.1f s", secs)};
}

// ---------------------------------------------------------------------------
// Silhouette gradient

Outcome silhouette_gradient() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cam = testing::axis_camera(64, 64, 64);
  const auto s = testing::edge_scene(cam, 30.3, 37.9);
  const mesh::Vec3 px_dir(2.0 / cam.K(0, 0), 0, 0);
  auto shifted = [&](double pixels) {
    auto v = s.v;
    for (auto& x : v) x += pixels * px_dir;
    return v;
  };
  const double fd =
      (testing::soft_mask_sum(cam, shifted(0.25), s.f) - testing::soft_mask_sum(cam, shifted(-0.25), s.f)) / 0.5;
  TD pos = fields::positions_tensor<double>(s.v, true);
  const auto fr = raster::rasterize(cam, s.v, s.f);
  {
    ad::Tape<double> tape;
    ad::Tape<double>::Scope sc(tape);
    tape.backward(ad::sum(raster::soft_mask(pos, s.f, raster::face_neighbors(s.f), fr, cam)));
  }
  double analytic = 0;
  for (std::size_t v = 0; v < s.v.size(); ++v) analytic += pos.grad()[v * 3] * px_dir.x();
  const double rel = std::abs(analytic - fd) / std::abs(fd);
  const double secs = seconds_since(t0);
  return {rel <= kSilhouetteTol && secs < 60.0,
          "analytic " + fmt("%.4f", analytic) + " vs FD " + fmt("%.4f", fd) + " px^2/px, rel err " + fmt("%.2f%%", 100 * rel)};
}

// ---------------------------------------------------------------------------
// Mesh laws

Outcome mesh_laws() {
  std::vector<std::string> bad;
  const std::size_t expected[] = {12, 42, 162, 642, 2562, 10242, 40962, 163842};
  for (int level = 0; level <= 7; ++level)
    if (mesh::make_icosphere(level).vertex_count() != expected[level]) bad.push_back("icosphere level " + std::to_string(level));
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testing::random_closed_mesh(rng);
    const auto topo = mesh::EdgeTopology::build(m);
    const auto s = mesh::loop_subdivide(m);
    if (s.vertex_count() != m.vertex_count() + topo.edge_count() || s.face_count() != 4 * m.face_count())
      bad.push_back("subdivision trial " + std::to_string(trial));
  }
  const auto s1 = mesh::make_icosphere(6);
  const double self = mesh::chamfer_distance(s1, s1, 20000, 3);
  if (!(self <= 1e-9)) bad.push_back("chamfer(a,a)");
  auto s2 = s1;
  for (auto& v : s2.vertices) v *= 1.1;
  const double conc = mesh::chamfer_distance(s1, s2, 20000, 17);
  if (!(std::abs(conc - 0.1) <= 0.005)) bad.push_back("concentric chamfer");
  std::string d = "counts L0-7, 20 subdivisions, chamfer(a,a) " + fmt("%.1e", self) + ", concentric " + fmt("%.4f", conc);
  for (const auto& b : bad) d += "; FAILED " + b;
  return {bad.empty(), d};
}

// ---------------------------------------------------------------------------
// End-to-end reconstruction

Outcome end_to_end() {
  const auto ds = data::load_dataset(dataset_dir());
  const auto ico = mesh::make_icosphere(train::TrainConfig::desk().icosphere_level);
  const double cd_ico = mesh::chamfer_distance(ico, *ds.gt_mesh, 20000, 1);
  const auto& r = desk_run('d');
  const bool cd_ok = r.chamfer <= kCdFactor * cd_ico;
  const bool psnr_ok = r.psnr_holdout >= kHoldoutPsnr;
  return {cd_ok && psnr_ok, "CD " + fmt("%.4f", r.chamfer) + " <= " + fmt("%.4f", kCdFactor * cd_ico) +
                                " (icosphere " + fmt("%.4f", cd_ico) + "), held-out PSNR " + fmt("%.2f", r.psnr_holdout) +
                                " >= " + fmt("%.0f dB", kHoldoutPsnr) + ", " + fmt("%.0f s", r.seconds)};
}

// ---------------------------------------------------------------------------
// Ablation ordering

Outcome ablation_ordering() {
  const double a = desk_run('a').chamfer, b = desk_run('b').chamfer, d = desk_run('d').chamfer;
  const bool strict_inversion = d > kAblationSlack * a;
  std::string order = (d <= b && b <= a) ? "ordering d <= b <= a holds" : "ordering d <= b <= a not strict";
  return {!strict_inversion, "CD a " + fmt("%.4f", a) + ", b " + fmt("%.4f", b) + ", d " + fmt("%.4f", d) + "; " + order +
                                 "; d/a " + fmt("%.3f", d / a)};
}

// ---------------------------------------------------------------------------
// Feature-regularization effect

Outcome feature_regularization() {
  const auto& r = desk_run('d');
  std::istringstream in(slurp(r.dir / "diagnostics.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<double> mse;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    mse.push_back(std::stod(line.substr(pos + 1)));
  }
  if (mse.size() < 200) return {false, "diagnostics.csv has too few rows"};
  // 50-iteration windows: centred on iteration 100, and the last 50.
  auto window = [&](std::size_t lo, std::size_t hi) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += mse[i];
    return s / double(hi - lo);
  };
  const double at100 = window(100 - kMovingWindow / 2, 100 + kMovingWindow / 2);
  const double last = window(mse.size() - kMovingWindow, mse.size());
  return {last <= kNormalMseFactor * at100 && at100 > 0,
          "normal MSE " + fmt("%.5f", at100) + " at iteration 100, " + fmt("%.5f", last) + " final, ratio " +
              fmt("%.3f", last / at100) + " <= " + fmt("%.1f", kNormalMseFactor)};
}

// ---------------------------------------------------------------------------
// Editing invariants

double max_vertex_gap(const mesh::TriangleMesh& a, const mesh::TriangleMesh& b) {
  if (a.vertex_count() != b.vertex_count()) return INFINITY;
  double w = 0;
  for (std::size_t v = 0; v < a.vertex_count(); ++v) w = std::max(w, (a.vertices[v] - b.vertices[v]).cwiseAbs().maxCoeff());
  return w;
}

Outcome editing_invariants() {
  const auto work = g_opt.work / "editing";
  const auto ds = dataset_dir();
  std::vector<std::string> bad;
  std::ostringstream d;

  // Two short trainings on different shapes from the same template.
  const auto blob = work / "box_blob";
  nmr_cli({"--seed", "2", "--out", blob.string(), "generate", "--shape", "box_blob", "--views", "8", "--size", "64"});
  const auto ra = work / "run_a", rb = work / "run_b";
  nmr_cli({"--seed", "3", "--out", ra.string(), "reconstruct", ds.string(), "--iters", "150", "--upsample-at", "75"});
  nmr_cli({"--seed", "4", "--out", rb.string(), "reconstruct", blob.string(), "--iters", "150", "--upsample-at", "75"});

  const auto mo = work / "morph";
  nmr_cli({"--out", mo.string(), "morph", "--a", (ra / "checkpoint.nmr").string(), "--b", (rb / "checkpoint.nmr").string(),
           "--t", "0,0.5,1"});
  const auto ma = mesh::load_mesh(ra / "mesh.ply"), mb = mesh::load_mesh(rb / "mesh.ply");
  const auto m0 = mesh::load_mesh(mo / "morph_000.ply"), m1 = mesh::load_mesh(mo / "morph_002.ply");
  const double g0 = max_vertex_gap(m0, ma), g1 = max_vertex_gap(m1, mb);
  if (!(g0 <= kMorphTol && g1 <= kMorphTol)) bad.push_back("morph endpoints");
  d << "morph endpoint gaps " << fmt("%.1e", g0) << "/" << fmt("%.1e", g1);

  const auto ren = work / "render", xfer = work / "transfer";
  nmr_cli({"--out", ren.string(), "render", "--checkpoint", (ra / "checkpoint.nmr").string(), "--dataset", ds.string(),
           "--view", "view_007", "--view", "view_003"});
  nmr_cli({"--out", xfer.string(), "transfer", "--geometry", (ra / "checkpoint.nmr").string(), "--appearance",
           (ra / "checkpoint.nmr").string(), "--dataset", ds.string(), "--view", "view_007", "--view", "view_003"});
  bool same = true;
  for (const char* v : {"view_007.png", "view_003.png"}) same = same && slurp(ren / v) == slurp(xfer / v);
  if (!same) bad.push_back("self-transfer images");
  d << ", self-transfer " << (same ? "bit-identical" : "differs");

  // Coarse ground truth standing in for a decimated 1K-vertex mesh.
  const auto coarse = data::synthetic_target(data::Shape::DisplacedSphere, 3);
  const auto coarse_path = work / "coarse_gt.ply";
  mesh::save_ply(coarse, coarse_path);
  const auto rf = work / "refine";
  const auto s = nmr_cli({"--seed", "5", "--out", rf.string(), "refine", ds.string(), "--mesh", coarse_path.string(),
                          "--subdiv", "2", "--iters", "500"});
  const double cd_in = s.at("input_chamfer").get<double>(), cd_out = s.at("chamfer").get<double>();
  if (!(cd_out <= cd_in)) bad.push_back("refine increased CD");
  d << ", refine CD " << fmt("%.4f", cd_in) << " -> " << fmt("%.4f", cd_out) << " (" << coarse.vertex_count()
    << " input vertices)";
  for (const auto& b : bad) d << "; FAILED " << b;
  return {bad.empty(), d.str()};
}

// ---------------------------------------------------------------------------
// Determinism

Outcome determinism() {
  const auto ds = dataset_dir();
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    const auto out = g_opt.work / ("determinism_" + std::to_string(k));
    nmr_cli({"--seed", "9", "--threads", "1", "--out", out.string(), "reconstruct", ds.string(), "--iters", "50"});
    csv[k] = slurp(out / "report.csv");
  }
  const bool same = csv[0] == csv[1] && std::count(csv[0].begin(), csv[0].end(), '\n') == 51;
  return {same, same ? "report.csv bitwise identical over 50 iterations" : "report.csv differs"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Acceptance checks; prints one PASS/FAIL line per criterion");
  std::vector<std::string> only, expect_fail;
  std::string work;
  bool keep = false;
  app.add_option("--only", only, "Run only these criteria (repeatable)");
  app.add_option("--work", work, "Scratch directory for datasets and runs");
  app.add_option("--threads", g_opt.threads, "OpenMP threads for the training runs");
  app.add_flag("--keep", keep, "Keep the scratch directory");
  app.add_option("--expect-fail", expect_fail, "Known failures: still reported as FAIL, not counted in the exit code");
  CLI11_PARSE(app, argc, argv);

  const bool temp_work = work.empty();
  g_opt.work = temp_work ? fs::temp_directory_path() / ("nmr_acceptance_" + std::to_string(::getpid())) : fs::path(work);
  fs::create_directories(g_opt.work);

  const std::vector<Criterion> criteria = {
      {"gradients", "Gradient suite", gradient_suite},
      {"raster_oracle", "Rasterizer oracle", rasterizer_oracle},
      {"silhouette", "Silhouette gradient", silhouette_gradient},
      {"mesh_laws", "Mesh laws", mesh_laws},
      {"end_to_end", "End-to-end reconstruction", end_to_end},
      {"ablation", "Ablation ordering", ablation_ordering},
      {"feature_reg", "Feature-regularization effect", feature_regularization},
      {"editing", "Editing invariants", editing_invariants},
      {"determinism", "Determinism", determinism},
  };
  const std::set<std::string> keys(only.begin(), only.end());
  const std::set<std::string> known(expect_fail.begin(), expect_fail.end());
  for (const auto& k : keys) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.key == k; })) {
      std::cerr << "unknown criterion '" << k << "'\n";
      return 2;
    }
  }
  for (const auto& k : known) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.key == k; })) {
      std::cerr << "unknown criterion '" << k << "'\n";
      return 2;
    }
  }

  int passed = 0, run = 0;
  std::vector<std::string> known_failed;
  for (const auto& c : criteria) {
    if (!keys.empty() && !keys.count(c.key)) continue;
    ++run;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    passed += o.pass;
    if (!o.pass && known.count(c.key)) known_failed.push_back(c.key);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail << std::endl;
  }
  std::cout << passed << "/" << run << " criteria passed";
  if (!known_failed.empty()) {
    std::cout << " (known failures:";
    for (const auto& k : known_failed) std::cout << " " << k;
    std::cout << ")";
  }
  std::cout << std::endl;
  if (temp_work && !keep) fs::remove_all(g_opt.work);
  return passed + int(known_failed.size()) == run ? 0 : 1;
}
