// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.h"
#include "radmap/errors.h"
#include "radmap/ops.h"
#include "radmap/random.h"
#include "radmap/synthetic.h"
#include "radmap/training.h"

using namespace radmap;
namespace fs = std::filesystem;

namespace {

Tensor rand_image(Rng& rng, std::size_t h, std::size_t w) {
  std::vector<double> v(3 * h * w);
  for (double& x : v) x = rng.uniform();
  return Tensor::from({3, h, w}, std::move(v));
}

Image to_image(const Tensor& t) { return Image::from_chw(t); }

std::vector<double> grey(const Image& im) {
  std::vector<double> g(std::size_t(im.width) * im.height);
  for (int y = 0; y < im.height; ++y)
    for (int x = 0; x < im.width; ++x) g[y * im.width + x] = (im.at(x, y, 0) + im.at(x, y, 1) + im.at(x, y, 2)) / 3;
  return g;
}

SceneData small_scene(int side, std::size_t views, std::size_t points = 3000) {
  SyntheticScene s;
  s.point_count = points;
  s.width = side;
  s.height = side;
  s.test_views = 2;
  return generate_scene(s, views);
}

PipelineConfig small_config(const SceneData& scene) {
  PipelineConfig c;
  c.raster.tau = scene.dataset.tau_hint;
  c.mlp.widths = {32, 32, 32, 16, 8};
  c.refine.width_multiplier = 0.25;
  c.refine.widths = {16, 32, 64};
  c.train.eval_every = 0;
  c.train.checkpoint_every = 0;
  return c;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("radmap_train_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("perceptual loss") {
  Rng rng(40);
  const PerceptualExtractor ex;
  Tape tape;
  const Tensor a = rand_image(rng, 8, 8), b = rand_image(rng, 8, 8);
  CHECK(perceptual_loss(tape, a, a, ex).item() == 0.0);
  CHECK(perceptual_loss(tape, a, b, ex).item() == perceptual_loss(tape, b, a, ex).item());
  CHECK(perceptual_loss(tape, a, b, ex).item() > 0.0);
  CHECK_THROWS_AS(perceptual_loss(tape, a, rand_image(rng, 8, 4), ex), DimensionError);

  SUBCASE("gradient reaches pred only") {
    Tensor p = rand_image(rng, 8, 8);
    p.set_requires_grad(true);
    auto f = [&] {
      Tape t;
      return perceptual_loss(t, p, b, ex).item();
    };
    Tape t;
    backward(t, perceptual_loss(t, p, b, ex));
    for (std::size_t e = 0; e < p.numel(); e += 5) {
      CHECK(oracle::grad_close(p.grad()[e], oracle::central_difference(f, p, e, 1e-5)));
    }
    for (const auto& q : ex.named_params()) {
      CHECK_FALSE(q.tensor.requires_grad());
      CHECK_FALSE(q.tensor.has_grad());
    }
  }
  SUBCASE("levels follow the pyramid") {
    Tape t;
    const auto feats = ex.features(t, rand_image(rng, 16, 12));
    REQUIRE(feats.size() == 3);
    CHECK(feats[0].shape() == Shape{8, 16, 12});
    CHECK(feats[1].shape() == Shape{16, 8, 6});
    CHECK(feats[2].shape() == Shape{32, 4, 3});
  }
}

TEST_CASE("total loss") {
  Rng rng(41);
  const PerceptualExtractor ex;
  Tape tape;
  const Tensor a = rand_image(rng, 8, 8), b = rand_image(rng, 8, 8);
  LossConfig cfg;
  const LossTerms t = total_loss(tape, a, b, cfg, ex);
  const double mse = oracle::mse({a.data().begin(), a.data().end()}, {b.data().begin(), b.data().end()});
  CHECK(std::abs(t.l2 - mse) < 1e-12);
  CHECK(std::abs(t.total.item() - (mse + 0.01 * perceptual_loss(tape, a, b, ex).item())) < 1e-12);
  CHECK(t.total.item() >= mse);
  CHECK(total_loss(tape, a, a, cfg, ex).total.item() == 0.0);
  cfg.w_perc = 0.0;
  CHECK(total_loss(tape, a, b, cfg, ex).total.item() == ops::mse(tape, a, b).item());
  cfg.w_l2 = -1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("psnr") {
  std::vector<double> a(100, 0.5), b(100, 0.5);
  CHECK(psnr(a, b) == kPsnrCap);
  for (std::size_t i = 0; i < 100; ++i) b[i] = 0.5 + (i % 2 ? 0.1 : -0.1);
  CHECK(std::abs(psnr(a, b) - 20.0) < 1e-9);
  std::vector<double> zero(4, 0.0), one(4, 1.0);
  CHECK(psnr(zero, one) == 0.0);

  Rng rng(42);
  std::vector<double> gt(3000), noise(3000);
  for (double& v : gt) v = rng.uniform(0.2, 0.8);
  for (double& v : noise) v = rng.normal();
  double prev = kPsnrCap + 1;
  for (double amp : {0.001, 0.003, 0.01, 0.03, 0.1}) {
    std::vector<double> noisy(gt);
    for (std::size_t i = 0; i < gt.size(); ++i) noisy[i] += amp * noise[i];
    const double p = psnr(noisy, gt);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("ssim") {
  Rng rng(43);
  Image a(20, 16), b(20, 16);
  for (double& v : a.rgb) v = rng.uniform();
  for (double& v : b.rgb) v = rng.uniform();
  CHECK(std::abs(ssim(a, a) - 1.0) < 1e-12);
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
  CHECK(std::abs(ssim(a, b) - oracle::ssim_grey(grey(a), grey(b), 20, 16)) < 1e-10);
  const double c1 = 1e-4;
  CHECK(std::abs(ssim(Image(16, 16, 0.0), Image(16, 16, 1.0)) - c1 / (1 + c1)) < 1e-12);
  CHECK_THROWS_AS(ssim(Image(10, 16), Image(10, 16)), UsageError);
}

TEST_CASE("augment") {
  const SceneData scene = small_scene(24, 2);
  const View& v = scene.dataset.train[0];
  RasterConfig raster;
  raster.tau = scene.dataset.tau_hint;
  const FragmentBuffer frag = rasterize(scene.cloud, v.camera, raster);
  Rng rng(44);
  SUBCASE("full window is the identity") {
    AugmentConfig cfg;
    const AugmentedView a = augment(v, frag, cfg, rng, scene.cloud, raster);
    CHECK(a.image.rgb == v.image.rgb);
    CHECK(a.frag.point_index == frag.point_index);
    cfg.window = 24;
    const AugmentedView b = augment(v, frag, cfg, rng, scene.cloud, raster);
    CHECK(b.image.rgb == v.image.rgb);
    CHECK(b.left == 0);
  }
  SUBCASE("crops are aligned and in bounds") {
    AugmentConfig cfg;
    cfg.window = 9;
    for (int k = 0; k < 100; ++k) {
      const AugmentedView a = augment(v, frag, cfg, rng, scene.cloud, raster);
      CHECK(a.left >= 0);
      CHECK(a.top >= 0);
      CHECK(a.left + 9 <= 24);
      CHECK(a.top + 9 <= 24);
      CHECK(a.frag.point_index[0] == frag.point_index[std::size_t(a.top) * 24 + a.left]);
      CHECK(a.image.at(0, 0, 1) == v.image.at(a.left, a.top, 1));
    }
  }
  SUBCASE("scaling re-rasterizes") {
    AugmentConfig cfg;
    cfg.window = 16;
    cfg.scale_min = 0.75;
    cfg.scale_max = 1.25;
    const AugmentedView a = augment(v, frag, cfg, rng, scene.cloud, raster);
    CHECK(a.scale >= 0.75);
    CHECK(a.scale <= 1.25);
    CHECK(a.frag.width == 16);
    CHECK(a.image.width == 16);
  }
  SUBCASE("oversized window") {
    AugmentConfig cfg;
    cfg.window = 25;
    CHECK_THROWS_AS(augment(v, frag, cfg, rng, scene.cloud, raster), UsageError);
  }
}

TEST_CASE("config json round trip") {
  PipelineConfig c;
  c.raster.tau = 0.0123;
  c.train.rectify = false;
  c.train.augment.window = 32;
  c.mlp.widths = {10, 20, 8};
  c.loss.perceptual.weights = "w.rmck";
  const PipelineConfig back = PipelineConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(back.raster.tau == 0.0123);
  CHECK_FALSE(back.train.rectify);
  CHECK_THROWS_AS(PipelineConfig::from_json("{}"), SchemaError);
  CHECK_THROWS_AS(PipelineConfig::from_json("{"), FormatError);
  c.train.lr_decay = 1.5;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("trainer") {
  const SceneData scene = small_scene(16, 6);
  PipelineConfig cfg = small_config(scene);

  SUBCASE("learning rates follow the schedule") {
    Trainer t(scene, cfg);
    const StepResult r = t.step();
    CHECK(r.step == 1);
    CHECK(r.lr_mlp == 5e-4);
    CHECK(std::abs(t.step().lr_mlp - 4.9995e-4) < 1e-18);
  }
  SUBCASE("same seed, same trace; different seed differs") {
    Trainer a(scene, cfg), b(scene, cfg);
    cfg.train.seed = 5;
    Trainer c(scene, cfg);
    bool differs = false;
    for (int k = 0; k < 5; ++k) {
      const double la = a.step().loss, lb = b.step().loss, lc = c.step().loss;
      CHECK(la == lb);
      differs |= la != lc;
    }
    CHECK(differs);
  }
  SUBCASE("resume continues the same trace") {
    TempDir dir;
    Trainer a(scene, cfg);
    for (int k = 0; k < 3; ++k) a.step();
    a.save(dir.path / "c.rmck");
    std::vector<double> want;
    for (int k = 0; k < 4; ++k) want.push_back(a.step().loss);
    Trainer b(scene, cfg);
    b.resume(dir.path / "c.rmck");
    CHECK(b.steps_done() == 3);
    for (int k = 0; k < 4; ++k) CHECK(b.step().loss == want[k]);
  }
  SUBCASE("checkpoint layout") {
    Trainer t(scene, cfg);
    t.step();
    const auto ts = t.checkpoint_tensors();
    CHECK(find_tensor(ts, "mlp.l1.w") != nullptr);
    CHECK(find_tensor(ts, "refine.out.b") != nullptr);
    CHECK(find_tensor(ts, "adam.mlp.m.mlp.l1.w") != nullptr);
    CHECK(find_tensor(ts, "adam.refine.v.refine.enc0.feat.w") != nullptr);
    CHECK(find_tensor(ts, "train.step")->tensor.item() == 1.0);
    CHECK(PipelineConfig::from_json(tensor_to_string(find_tensor(ts, "meta.config")->tensor)).to_json() ==
          t.config().to_json());
  }
  SUBCASE("fit with no steps reports the initial model") {
    TempDir dir;
    cfg.train.max_steps = 0;
    Trainer t(scene, cfg);
    const EvalReport initial = t.evaluate();
    const FitReport r = t.fit(dir.path);
    CHECK(r.trace.empty());
    CHECK(r.final_eval.mean_psnr == initial.mean_psnr);
    CHECK(r.final_eval.mean_ssim == initial.mean_ssim);
    CHECK(fs::exists(dir.path / "checkpoint.rmck"));
    std::ifstream csv(dir.path / "metrics.csv");
    std::string header, row;
    std::getline(csv, header);
    std::getline(csv, row);
    CHECK(header == "step,loss,l2,perceptual,lr_mlp,lr_refine,test_psnr,test_ssim");
    CHECK(row.rfind("0,,,,,,", 0) == 0);
  }
  SUBCASE("zero model renders the sigmoid of the head bias") {
    Trainer t(scene, cfg);
    for (const auto& p : model_tensors(t.mlp(), t.refine())) {
      for (double& v : Tensor(p.tensor).data()) v = 0.0;
    }
    Tensor bias = find_tensor(t.refine().named_params(), "refine.out.b")->tensor;
    bias.data()[0] = 0.3;
    const Image img = t.render(scene.dataset.test[0].camera);
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        CHECK(std::abs(img.at(x, y, 0) - 1 / (1 + std::exp(-0.3))) < 1e-15);
        CHECK(img.at(x, y, 1) == 0.5);
      }
    }
  }
  SUBCASE("non-finite loss names the view") {
    Trainer t(scene, cfg);
    Tensor w = find_tensor(t.mlp().named_params(), "mlp.l5.b")->tensor;
    w.data()[0] = std::nan("");
    try {
      t.step();
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("r_") != std::string::npos);
    }
  }
}

TEST_CASE("training reduces the loss on the toy sphere") {
  const SceneData scene = small_scene(32, 8, 8000);
  PipelineConfig cfg = small_config(scene);
  cfg.refine.widths = {16, 32, 64, 128, 256};
  Trainer t(scene, cfg);
  double early = 0, late = 0;
  for (int k = 0; k < 1000; ++k) {
    const double loss = t.step().loss;
    if (k < 100) early += loss / 100;
    if (k >= 900) late += loss / 100;
  }
  CHECK(late < early);
}
