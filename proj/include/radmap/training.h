// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "radmap/dataset.h"
#include "radmap/image.h"
#include "radmap/models.h"
#include "radmap/optim.h"
#include "radmap/random.h"
#include "radmap/rasterizer.h"
#include "radmap/sampling.h"

namespace radmap {

// ---- losses ---------------------------------------------------------------

struct PerceptualConfig {
  std::vector<std::size_t> channels{8, 16, 32};  // one entry per level
  std::size_t kernel = 3;
  std::uint64_t seed = 11;
  // Optional RMCK file with tensors "perc.l{i}.w" / "perc.l{i}.b".
  std::filesystem::path weights;
};

/// Frozen convolutional pyramid: level 0 keeps the input resolution, each
/// further level halves it with a stride-2 convolution. Every level is
/// followed by relu.
class PerceptualExtractor {
 public:
  explicit PerceptualExtractor(const PerceptualConfig& cfg = {});

  std::vector<Tensor> features(Tape& tape, const Tensor& image) const;
  const std::vector<NamedTensor>& named_params() const { return params_; }

 private:
  std::vector<NamedTensor> params_;
};

struct LossConfig {
  double w_l2 = 1.0;
  double w_perc = 0.01;
  PerceptualConfig perceptual;

  void validate() const;
};

/// Sum over levels of the mse between feature maps.
Tensor perceptual_loss(Tape& tape, const Tensor& pred, const Tensor& gt,
                       const PerceptualExtractor& extractor);

struct LossTerms {
  Tensor total;
  double l2 = 0.0;
  double perceptual = 0.0;
};

LossTerms total_loss(Tape& tape, const Tensor& pred, const Tensor& gt, const LossConfig& cfg,
                     const PerceptualExtractor& extractor);

// ---- metrics --------------------------------------------------------------

inline constexpr double kPsnrCap = 100.0;

double psnr(std::span<const double> pred, std::span<const double> gt);
double psnr(const Image& pred, const Image& gt);

/// Mean SSIM of the RGB-mean grey images over every fully-inside 11x11
/// Gaussian window (sigma 1.5, K1 0.01, K2 0.03, range 1).
double ssim(const Image& pred, const Image& gt);

// ---- augmentation ---------------------------------------------------------

struct AugmentConfig {
  int window = 0;          // crop side in pixels; 0 keeps the whole image
  double scale_min = 1.0;  // random rescale range; 1..1 disables it
  double scale_max = 1.0;

  void validate() const;
};

struct AugmentedView {
  Image image;
  FragmentBuffer frag;
  int left = 0;
  int top = 0;
  double scale = 1.0;
};

/// Random crop of a view and its full-resolution fragments. When scaling is
/// enabled the camera and image are resampled and the cloud re-rasterized
/// before cropping.
AugmentedView augment(const View& view, const FragmentBuffer& frag, const AugmentConfig& cfg,
                      Rng& rng, const PointCloud& cloud, const RasterConfig& raster);

// ---- training -------------------------------------------------------------

struct TrainConfig {
  double lr_mlp = 5e-4;
  double lr_refine = 1.5e-4;
  double lr_decay = 0.9999;
  std::size_t batch_size = 1;
  std::uint64_t max_steps = 5000;
  std::uint64_t eval_every = 500;        // 0 evaluates only at the end
  std::uint64_t checkpoint_every = 1000;  // 0 checkpoints only at the end
  std::uint64_t seed = 0;
  bool rectify = true;  // false feeds raw winning-point positions
  AugmentConfig augment;

  void validate() const;
};

struct PipelineConfig {
  RasterConfig raster;
  EncodingConfig encoding;
  MlpConfig mlp;
  RefineConfig refine;
  LossConfig loss;
  TrainConfig train;

  void validate() const;
  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
};

struct StepResult {
  std::uint64_t step = 0;  // steps completed after this one
  double loss = 0.0;
  double l2 = 0.0;
  double perceptual = 0.0;
  double lr_mlp = 0.0;
  double lr_refine = 0.0;
};

struct EvalReport {
  std::vector<std::string> names;
  std::vector<double> psnr;
  std::vector<double> ssim;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

struct FitReport {
  std::vector<StepResult> trace;
  EvalReport final_eval;
};

class Trainer {
 public:
  /// Rasterizes every view once; `scene` must outlive the trainer.
  Trainer(const SceneData& scene, PipelineConfig cfg);

  StepResult step();
  EvalReport evaluate() const;
  Image render(const FragmentBuffer& frag) const;
  Image render(const Camera& camera) const;

  std::uint64_t steps_done() const { return step_; }
  const PipelineConfig& config() const { return cfg_; }
  const RadianceMLP& mlp() const { return mlp_; }
  const RefineNet& refine() const { return refine_; }

  /// Model parameters, Adam moments, step counter and config echo. The
  /// in-memory state is rounded to f32 first so that a resumed run continues
  /// exactly like an uninterrupted one.
  std::vector<NamedTensor> checkpoint_tensors();
  void save(const std::filesystem::path& path);
  void resume(const std::filesystem::path& path);

  using Progress = std::function<void(const StepResult&, const std::optional<EvalReport>&)>;
  /// Runs to cfg.train.max_steps, evaluating and checkpointing into out_dir
  /// (metrics.csv, checkpoint.rmck).
  FitReport fit(const std::filesystem::path& out_dir, const Progress& progress = {});

 private:
  QueryBatch batch_for(const FragmentBuffer& frag) const;

  const SceneData& scene_;
  PipelineConfig cfg_;
  RadianceMLP mlp_;
  RefineNet refine_;
  PerceptualExtractor extractor_;
  Adam adam_mlp_, adam_refine_;
  std::vector<FragmentBuffer> train_frags_, test_frags_;
  std::uint64_t step_ = 0;
};

/// Model-only checkpoint contents (no optimizer state).
std::vector<NamedTensor> model_tensors(const RadianceMLP& mlp, const RefineNet& net);

}  // namespace radmap
