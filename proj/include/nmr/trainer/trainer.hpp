#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmr/dataset/dataset.hpp"
#include "nmr/losses/losses.hpp"
#include "nmr/trainer/model.hpp"

namespace nmr::train {

struct TrainConfig {
  int total_iterations = 2000;
  int upsample_at = 500;
  int upsample_rounds = 2;
  int icosphere_level = 3;
  double lr_geometry = 2e-3;
  double lr_appearance = 1e-3;
  double lr_decay = 0.75;
  int lr_decay_every = 500;
  double pixel_sample_fraction = 0.75;
  losses::LossWeights weights;
  std::uint64_t seed = 0;
  AblationFlags flags;
  ModelDims dims;
  bool holdout = true;  // keep every 8th view out of training
  /// Loop subdivision rounds applied to the initial mesh before iteration 0.
  int initial_subdivisions = 0;

  /// Desk scale: icosphere level 3, two rounds at the event (ends at level 5).
  static TrainConfig desk();
  /// Full scale ("paper" profile): icosphere level 4, three rounds (163842 vertices).
  static TrainConfig paper();
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Flat key/value JSON: keys are TrainConfig field names (weights as
/// lambda_shading ... gamma, flags by name, "ablation" as a setting letter,
/// "profile" as desk or paper, applied first).  Unknown keys are rejected.
void apply_config_json(TrainConfig& cfg, const std::string& json_text);
TrainConfig load_config(const std::filesystem::path& path);
std::string config_json(const TrainConfig& cfg);

/// 2e-3 * 0.75^floor(iter / 500) for the default schedule.
double geometry_lr(const TrainConfig& cfg, int iteration);

/// Uniform sample without replacement of ceil(fraction * |I|) indices from
/// I = {gt > 0.5 and rendered > 0.5}, sorted ascending.
std::vector<std::uint32_t> sample_pixels(std::span<const float> gt_mask, std::span<const float> rendered_mask,
                                         double fraction, std::uint64_t seed);

struct TrainRecord {
  int iter = 0;
  std::size_t view = 0;
  double total = 0, shading = 0, mask = 0, laplacian = 0, normal = 0, feature = 0;
  double lr_geom = 0;
  double normal_mse = -1;  // predicted vs rasterized normals, -1 without a predictor
  std::size_t samples = 0;
  std::size_t vertices = 0;
};

struct TrainReport {
  std::vector<TrainRecord> records;
  std::uint64_t seed = 0;
  double seconds = 0;
  std::size_t final_vertices = 0, final_faces = 0;
  std::vector<std::size_t> train_views;
  std::vector<std::size_t> holdout_views;
  /// PSNR of each training view rendered from the final model.
  std::vector<double> final_train_psnr;

  /// iter,total,shading,mask,laplacian,normal,feature,lr_geom
  std::string csv() const;
  void write_csv(const std::filesystem::path& path) const;
  /// iter,view,samples,vertices,normal_mse
  std::string diagnostics_csv() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  SceneModel model;
  mesh::TriangleMesh mesh;
  TrainReport report;
};

/// Called after every iteration; return false to stop early.
using TrainCallback = std::function<bool(const TrainRecord&, const SceneModel&)>;

/// Optimizes a model initialized from `initial` (the icosphere of the config
/// level when empty).  Throws TrainingError on a non-finite loss with the
/// iteration and the term breakdown.
TrainResult train(const data::Dataset& ds, const TrainConfig& cfg,
                  std::optional<mesh::TriangleMesh> initial = std::nullopt, const TrainCallback& callback = {});

/// Mean PSNR of the model over the listed views (reference mask composite).
double mean_psnr(const SceneModel& model, const data::Dataset& ds, const std::vector<std::size_t>& views);
raster::Image render_image(const SceneModel& model, const raster::Camera& cam);

}  // namespace nmr::train
