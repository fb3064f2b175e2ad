// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0
//
// radmap: synth | fit | render | eval | bench | gradcheck

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#ifdef __GLIBC__
#include <malloc.h>
#endif
#include <string>
#include <vector>

#include "radmap/checkpoint.h"
#include "radmap/dataset.h"
#include "radmap/errors.h"
#include "radmap/gradcheck.h"
#include "radmap/hashing.h"
#include "radmap/models.h"
#include "radmap/ops.h"
#include "radmap/ply.h"
#include "radmap/png_io.h"
#include "radmap/synthetic.h"
#include "radmap/training.h"
#include "radmap/transforms.h"

namespace fs = std::filesystem;
using namespace radmap;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kIo = 1, kValidation = 2, kFormat = 3, kNumeric = 4 };

// Splices the flags of a JSON config file in front of the command-line
// flags, so that with TakeLast the command line wins.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    std::size_t used = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      used = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      used = 1;
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw FormatError(path + ": " + e.what());
    }
    if (!j.is_object()) throw FormatError(path + ": config must be a JSON object");
    std::vector<std::string> flags;
    for (const auto& [key, value] : j.items()) {
      const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
      if (value.is_boolean()) {
        if (value.get<bool>()) flags.push_back(flag);
      } else if (value.is_string()) {
        flags.push_back(flag);
        flags.push_back(value.get<std::string>());
      } else if (value.is_number()) {
        flags.push_back(flag);
        flags.push_back(value.dump());
      } else {
        throw FormatError(path + ": value of '" + key + "' must be a scalar");
      }
    }
    args.erase(args.begin() + i, args.begin() + i + used);
    // After the subcommand name, before everything else.
    const std::size_t at = std::min<std::size_t>(2, args.size());
    args.insert(args.begin() + at, flags.begin(), flags.end());
    break;
  }
  return args;
}

void log(const std::string& line) { std::cerr << line << std::endl; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string primitive = "sphere";
  std::string radiance = "checker";
  std::size_t points = 20000;
  std::size_t views = 38;
  std::size_t test_views = 8;
  double noise = 0.002;
  std::uint64_t seed = 7;
  int width = 64;
  int height = 64;
  double size = 1.0;
  double distance = 3.5;
  double fov = 0.8;
  bool ascii = false;
};

int cmd_synth(const SynthArgs& a) {
  SyntheticScene s;
  s.primitive = parse_primitive(a.primitive);
  if (a.radiance == "checker") s.radiance.kind = RadianceSpec::Kind::checker;
  else if (a.radiance == "constant") s.radiance.kind = RadianceSpec::Kind::constant;
  else throw ValidationError("unknown radiance '" + a.radiance + "' (checker, constant)");
  s.point_count = a.points;
  s.noise_sigma = a.noise;
  s.seed = a.seed;
  s.width = a.width;
  s.height = a.height;
  s.size = a.size;
  s.camera_distance = a.distance;
  s.camera_angle_x = a.fov;
  s.test_views = a.test_views;
  s.validate();
  if (a.views < 2) throw ValidationError("need at least 2 views for a train/test split");
  log("synth: " + to_string(s.primitive) + ", " + std::to_string(a.points) + " points, " +
      std::to_string(a.views) + " views");
  const SceneData scene = generate_scene(s, a.views);
  save_dataset(a.out, scene);
  if (a.ascii) save_ply(fs::path(a.out) / "points.ply", scene.cloud, PlyEncoding::ascii);
  if (a.ascii) save_dataset(a.out, scene);  // refresh hashes
  log("synth: wrote " + std::to_string(scene.dataset.train.size()) + " train and " +
      std::to_string(scene.dataset.test.size()) + " test views to " + a.out);
  return kOk;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string out;
  std::string resume;
  std::uint64_t max_steps = 5000;
  std::uint64_t seed = 0;
  double tau = 0.0;  // 0: dataset hint scaled for downsampling
  std::size_t downsample = 1;
  bool no_rectify = false;
  int window = 0;
  double scale_min = 1.0;
  double scale_max = 1.0;
  double lr_mlp = 5e-4;
  double lr_refine = 1.5e-4;
  double lr_decay = 0.9999;
  std::size_t batch_size = 1;
  std::uint64_t eval_every = 500;
  std::uint64_t checkpoint_every = 1000;
  std::uint64_t log_every = 100;
  double width_mult = 0.25;
  int coord_freqs = 10;
  int dir_freqs = 4;
  bool no_raw = false;
  double w_l2 = 1.0;
  double w_perc = 0.01;
  std::string perc_weights;
  int threads = 0;
};

SceneData load_scene(const std::string& dir, std::size_t downsample_factor) {
  SceneData scene = load_dataset(dir);
  if (downsample_factor > 1) scene.cloud = downsample(scene.cloud, downsample_factor);
  return scene;
}

int cmd_fit(const FitArgs& a) {
  if (a.downsample == 0) throw ValidationError("--downsample must be at least 1");
  const SceneData scene = load_scene(a.data, a.downsample);
  PipelineConfig cfg;
  // The spacing of a uniform subsample grows with the square root of the
  // reduction factor.
  cfg.raster.tau = a.tau > 0.0 ? a.tau : scene.dataset.tau_hint * std::sqrt(double(a.downsample));
  cfg.raster.threads = a.threads;
  cfg.encoding.coord_freqs = a.coord_freqs;
  cfg.encoding.dir_freqs = a.dir_freqs;
  cfg.encoding.include_raw = !a.no_raw;
  cfg.refine.width_multiplier = a.width_mult;
  cfg.loss.w_l2 = a.w_l2;
  cfg.loss.w_perc = a.w_perc;
  cfg.loss.perceptual.weights = a.perc_weights;
  cfg.train.lr_mlp = a.lr_mlp;
  cfg.train.lr_refine = a.lr_refine;
  cfg.train.lr_decay = a.lr_decay;
  cfg.train.batch_size = a.batch_size;
  cfg.train.max_steps = a.max_steps;
  cfg.train.eval_every = a.eval_every;
  cfg.train.checkpoint_every = a.checkpoint_every;
  cfg.train.seed = a.seed;
  cfg.train.rectify = !a.no_rectify;
  cfg.train.augment.window = a.window;
  cfg.train.augment.scale_min = a.scale_min;
  cfg.train.augment.scale_max = a.scale_max;

  log("fit: " + std::to_string(scene.cloud.size()) + " points, tau " + fmt("%.5g", cfg.raster.tau) +
      (cfg.train.rectify ? ", rectified" : ", raw coordinates") + ", " + std::to_string(a.max_steps) + " steps");
  const auto t0 = std::chrono::steady_clock::now();
  Trainer trainer(scene, cfg);
  if (!a.resume.empty()) {
    trainer.resume(a.resume);
    log("fit: resumed at step " + std::to_string(trainer.steps_done()));
  }
  auto progress = [&](const StepResult& r, const std::optional<EvalReport>& e) {
    if (a.log_every > 0 && r.step % a.log_every == 0 && r.step > 0) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log("step " + std::to_string(r.step) + " loss " + fmt("%.6f", r.loss) + " (" + fmt("%.1f", secs) + " s)");
    }
    if (e) log("eval step " + std::to_string(r.step) + " psnr " + fmt("%.3f", e->mean_psnr) + " ssim " +
               fmt("%.4f", e->mean_ssim));
  };
  const FitReport rep = trainer.fit(a.out, progress);

  json report;
  report["steps"] = trainer.steps_done();
  report["tau"] = cfg.raster.tau;
  report["rectify"] = cfg.train.rectify;
  report["points"] = scene.cloud.size();
  report["test_psnr"] = rep.final_eval.mean_psnr;
  report["test_ssim"] = rep.final_eval.mean_ssim;
  json views = json::array();
  for (std::size_t i = 0; i < rep.final_eval.names.size(); ++i) {
    views.push_back({{"name", rep.final_eval.names[i]},
                     {"psnr", rep.final_eval.psnr[i]},
                     {"ssim", rep.final_eval.ssim[i]}});
  }
  report["views"] = views;
  report["checkpoint_sha256"] = sha256_file(fs::path(a.out) / "checkpoint.rmck");
  std::ofstream(fs::path(a.out) / "report.json") << report.dump(2) << '\n';
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log("fit: test psnr " + fmt("%.3f", rep.final_eval.mean_psnr) + " ssim " + fmt("%.4f", rep.final_eval.mean_ssim) +
      " in " + fmt("%.1f", secs) + " s");
  return kOk;
}

// ---- render / bench helpers -----------------------------------------------

struct LoadedModel {
  PipelineConfig cfg;
  std::unique_ptr<RadianceMLP> mlp;
  std::unique_ptr<RefineNet> net;
};

LoadedModel load_model(const std::string& path) {
  const auto tensors = load_checkpoint(path);
  const NamedTensor* meta = find_tensor(tensors, "meta.config");
  if (!meta) throw FormatError(path + ": checkpoint lacks tensor 'meta.config'");
  LoadedModel m;
  m.cfg = PipelineConfig::from_json(tensor_to_string(meta->tensor));
  m.mlp = std::make_unique<RadianceMLP>(m.cfg.mlp);
  m.net = std::make_unique<RefineNet>(m.cfg.refine);
  assign_params(m.mlp->named_params(), tensors);
  assign_params(m.net->named_params(), tensors);
  return m;
}

std::vector<View> pick_views(const SceneData& scene, const std::string& split) {
  if (split == "train") return scene.dataset.train;
  if (split == "test") return scene.dataset.test;
  if (split == "all") {
    std::vector<View> v;
    for (const auto* part : {&scene.dataset.train, &scene.dataset.test}) {
      for (View view : *part) {
        view.name = (part == &scene.dataset.train ? "train_" : "test_") + view.name;
        v.push_back(std::move(view));
      }
    }
    return v;
  }
  throw ValidationError("unknown split '" + split + "' (train, test, all)");
}

QueryBatch make_batch(const FragmentBuffer& frag, const PointCloud& cloud, const PipelineConfig& cfg) {
  return cfg.train.rectify ? build_query_batch(frag, cfg.encoding)
                           : build_raw_query_batch(frag, cloud, cfg.encoding);
}

struct RenderArgs {
  std::string checkpoint;
  std::string data;
  std::string cloud;
  std::string cameras;
  std::string split = "test";
  std::string out;
  std::size_t downsample = 1;
};

int cmd_render(const RenderArgs& a) {
  const LoadedModel m = load_model(a.checkpoint);
  PointCloud cloud;
  std::vector<std::pair<std::string, Camera>> cams;
  if (!a.data.empty()) {
    const SceneData scene = load_scene(a.data, a.downsample);
    cloud = scene.cloud;
    for (const View& v : pick_views(scene, a.split)) cams.emplace_back(v.name, v.camera);
  } else {
    if (a.cloud.empty() || a.cameras.empty()) {
      throw ValidationError("render needs --data, or both --cloud and --cameras");
    }
    cloud = load_ply(a.cloud);
    if (a.downsample > 1) cloud = downsample(cloud, a.downsample);
    for (const CameraFrame& f : load_transforms_json(a.cameras)) {
      cams.emplace_back(fs::path(f.file_path).stem().string(), f.camera);
    }
  }
  fs::create_directories(a.out);
  Tape tape;
  tape.set_enabled(false);
  for (const auto& [name, cam] : cams) {
    const FragmentBuffer frag = rasterize(cloud, cam, m.cfg.raster);
    const Image img = Image::from_chw(render_image(tape, *m.mlp, *m.net, make_batch(frag, cloud, m.cfg)));
    save_png(img, fs::path(a.out) / (name + ".png"));
    log("render: " + name);
  }
  return kOk;
}

// ---- eval -----------------------------------------------------------------

int cmd_eval(const std::string& renders, const std::string& gt) {
  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (fs::is_directory(renders)) {
    for (const auto& e : fs::directory_iterator(renders)) {
      if (e.path().extension() == ".png") pairs.emplace_back(e.path(), fs::path(gt) / e.path().filename());
    }
    std::sort(pairs.begin(), pairs.end());
  } else {
    pairs.emplace_back(renders, gt);
  }
  if (pairs.empty()) throw ValidationError("no PNG renders found in " + renders);
  std::cout << "image,psnr,ssim\n";
  double sp = 0, ss = 0;
  for (const auto& [r, g] : pairs) {
    if (!fs::exists(g)) throw IoError("no ground truth for " + r.string() + " at " + g.string());
    const Image a = load_png(r), b = load_png(g);
    const double p = psnr(a, b), s = ssim(a, b);
    sp += p;
    ss += s;
    std::cout << r.filename().string() << ',' << fmt("%.4f", p) << ',' << fmt("%.6f", s) << '\n';
  }
  std::cout << "mean," << fmt("%.4f", sp / double(pairs.size())) << ',' << fmt("%.6f", ss / double(pairs.size()))
            << '\n';
  return kOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string data;
  std::string checkpoint;
  std::string split = "test";
  double tau = 0.0;
  std::size_t reps = 5;
  std::size_t downsample = 1;
  double width_mult = 0.25;
  int threads = 0;
};

int cmd_bench(const BenchArgs& a) {
  if (a.reps == 0) throw ValidationError("--reps must be positive");
  const SceneData scene = load_scene(a.data, a.downsample);
  LoadedModel m;
  if (!a.checkpoint.empty()) {
    m = load_model(a.checkpoint);
  } else {
    m.cfg.encoding.bbox = scene.dataset.bbox;
    m.cfg.refine.width_multiplier = a.width_mult;
    m.cfg.raster.tau = scene.dataset.tau_hint * std::sqrt(double(a.downsample));
    m.mlp = std::make_unique<RadianceMLP>(m.cfg.mlp);
    m.net = std::make_unique<RefineNet>(m.cfg.refine);
  }
  if (a.tau > 0.0) m.cfg.raster.tau = a.tau;
  m.cfg.raster.threads = a.threads;
  const std::vector<View> views = pick_views(scene, a.split);
  if (views.empty()) throw ValidationError("split '" + a.split + "' has no views");

  const char* names[3] = {"rasterize", "mlp", "refine"};
  std::vector<double> times[3];
  std::vector<double> outputs[3];
  Tape tape;
  tape.set_enabled(false);
  using clock = std::chrono::steady_clock;
  for (std::size_t rep = 0; rep < a.reps; ++rep) {
    double t[3] = {0, 0, 0};
    std::vector<double> out[3];
    for (const View& v : views) {
      auto c0 = clock::now();
      const FragmentBuffer frag = rasterize(scene.cloud, v.camera, m.cfg.raster);
      auto c1 = clock::now();
      const QueryBatch qb = make_batch(frag, scene.cloud, m.cfg);
      const std::size_t hh = std::size_t(qb.height), ww = std::size_t(qb.width);
      Tensor feats = qb.size() > 0 ? m.mlp->forward(tape, qb) : Tensor();
      auto c2 = clock::now();
      Tensor fmap = scatter_features(tape, feats, qb.pixel_ids, m.mlp->out_channels(), hh, ww);
      const std::size_t mult = m.net->config().multiple();
      const std::size_t ph = (hh + mult - 1) / mult * mult, pw = (ww + mult - 1) / mult * mult;
      if (ph != hh || pw != ww) fmap = ops::pad_reflect(tape, fmap, 0, ph - hh, 0, pw - ww);
      const Tensor img = ops::crop(tape, m.net->forward(tape, fmap), 0, 0, hh, ww);
      auto c3 = clock::now();
      t[0] += std::chrono::duration<double, std::milli>(c1 - c0).count();
      t[1] += std::chrono::duration<double, std::milli>(c2 - c1).count();
      t[2] += std::chrono::duration<double, std::milli>(c3 - c2).count();
      for (std::size_t p = 0; p < frag.pixel_count(); ++p) {
        out[0].push_back(double(frag.point_index[p]));
        out[0].push_back(frag.z[p]);
      }
      if (feats.defined()) out[1].insert(out[1].end(), feats.data().begin(), feats.data().end());
      out[2].insert(out[2].end(), img.data().begin(), img.data().end());
    }
    for (int s = 0; s < 3; ++s) {
      times[s].push_back(t[s] / double(views.size()));
      outputs[s] = std::move(out[s]);
    }
    log("bench: rep " + std::to_string(rep + 1) + "/" + std::to_string(a.reps));
  }
  std::cout << "stage,mean_ms,std_ms,output_sha256\n";
  for (int s = 0; s < 3; ++s) {
    double mean = 0, var = 0;
    for (double v : times[s]) mean += v;
    mean /= double(times[s].size());
    for (double v : times[s]) var += (v - mean) * (v - mean);
    const double sd = times[s].size() > 1 ? std::sqrt(var / double(times[s].size() - 1)) : 0.0;
    std::cout << names[s] << ',' << fmt("%.3f", mean) << ',' << fmt("%.3f", sd) << ',' << sha256_hex(outputs[s])
              << '\n';
  }
  return kOk;
}

// ---- gradcheck ------------------------------------------------------------

int cmd_gradcheck(std::size_t configs, std::uint64_t seed, const std::vector<std::string>& only) {
  if (configs == 0) throw ValidationError("--configs must be positive");
  std::vector<std::string> known;
  for (const auto& c : gradient_cases()) known.push_back(c.name);
  for (const auto& name : only) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ValidationError("unknown gradcheck item '" + name + "'");
    }
  }
  auto filter = [&](const std::string& name) {
    return only.empty() || std::find(only.begin(), only.end(), name) != only.end();
  };
  bool all = true;
  run_gradient_suite(configs, seed, {}, filter, [&](const SuiteItem& it) {
    all = all && it.passed();
    std::cout << (it.passed() ? "PASS " : "FAIL ") << it.name << " configs=" << it.configs
              << " failed=" << it.failed_configs << " checked=" << it.checked << " kinks=" << it.skipped_kinks
              << " worst=" << fmt("%.3g", it.max_error) << " (" << it.worst << ")" << std::endl;
  });
  return all ? kOk : kNumeric;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  args = expand_config(std::move(args));

  CLI::App app{"radmap: point-cloud radiance mapping with coordinate rectification"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene with analytic ground truth");
  synth->add_option("--out", sa.out, "output directory")->required();
  synth->add_option("--primitive", sa.primitive, "sphere, plane or textured-cube")->capture_default_str();
  synth->add_option("--radiance", sa.radiance, "checker or constant")->capture_default_str();
  synth->add_option("--points", sa.points, "point count")->capture_default_str();
  synth->add_option("--views", sa.views, "total views")->capture_default_str();
  synth->add_option("--test-views", sa.test_views, "views held out for testing")->capture_default_str();
  synth->add_option("--noise", sa.noise, "Gaussian jitter sigma, world units")->capture_default_str();
  synth->add_option("--seed", sa.seed)->capture_default_str();
  synth->add_option("--width", sa.width)->capture_default_str();
  synth->add_option("--height", sa.height)->capture_default_str();
  synth->add_option("--size", sa.size, "primitive radius / half-extent")->capture_default_str();
  synth->add_option("--camera-distance", sa.distance)->capture_default_str();
  synth->add_option("--fov", sa.fov, "horizontal field of view, radians")->capture_default_str();
  synth->add_flag("--ascii-ply", sa.ascii, "write the cloud as ASCII PLY");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "train the radiance MLP and refinement net");
  fit->add_option("--data", fa.data, "dataset directory")->required();
  fit->add_option("--out", fa.out, "output directory")->required();
  fit->add_option("--resume", fa.resume, "checkpoint to continue from");
  fit->add_option("--max-steps", fa.max_steps)->capture_default_str();
  fit->add_option("--seed", fa.seed)->capture_default_str();
  fit->add_option("--tau", fa.tau, "radius threshold (default: dataset hint)")->check(CLI::NonNegativeNumber);
  fit->add_option("--downsample", fa.downsample, "keep every k-th point")->capture_default_str();
  fit->add_flag("--no-rectify", fa.no_rectify, "query raw winning-point positions");
  fit->add_option("--window", fa.window, "training crop size, 0 = full image")->capture_default_str();
  fit->add_option("--scale-min", fa.scale_min)->capture_default_str();
  fit->add_option("--scale-max", fa.scale_max)->capture_default_str();
  fit->add_option("--lr-mlp", fa.lr_mlp)->capture_default_str();
  fit->add_option("--lr-refine", fa.lr_refine)->capture_default_str();
  fit->add_option("--lr-decay", fa.lr_decay)->capture_default_str();
  fit->add_option("--batch-size", fa.batch_size)->capture_default_str();
  fit->add_option("--eval-every", fa.eval_every)->capture_default_str();
  fit->add_option("--checkpoint-every", fa.checkpoint_every)->capture_default_str();
  fit->add_option("--log-every", fa.log_every)->capture_default_str();
  fit->add_option("--width-mult", fa.width_mult, "refinement width multiplier")->capture_default_str();
  fit->add_option("--coord-freqs", fa.coord_freqs)->capture_default_str();
  fit->add_option("--dir-freqs", fa.dir_freqs)->capture_default_str();
  fit->add_flag("--no-raw", fa.no_raw, "drop the raw value from the encodings");
  fit->add_option("--w-l2", fa.w_l2)->capture_default_str();
  fit->add_option("--w-perc", fa.w_perc)->capture_default_str();
  fit->add_option("--perc-weights", fa.perc_weights, "RMCK file with frozen perceptual weights");
  fit->add_option("--threads", fa.threads, "rasterizer threads, 0 = all cores")->capture_default_str();

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "render views from a checkpoint");
  render->add_option("--checkpoint", ra.checkpoint)->required();
  render->add_option("--data", ra.data, "dataset directory (cloud and cameras)");
  render->add_option("--cloud", ra.cloud, "PLY point cloud");
  render->add_option("--cameras", ra.cameras, "transforms JSON");
  render->add_option("--split", ra.split, "train, test or all")->capture_default_str();
  render->add_option("--downsample", ra.downsample)->capture_default_str();
  render->add_option("--out", ra.out)->required();

  std::string ev_renders, ev_gt;
  auto* eval = app.add_subcommand("eval", "PSNR/SSIM of renders against ground truth (CSV on stdout)");
  eval->add_option("--renders", ev_renders, "PNG file or directory")->required();
  eval->add_option("--gt", ev_gt, "PNG file or directory")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "per-stage timings (CSV on stdout)");
  bench->add_option("--data", ba.data)->required();
  bench->add_option("--checkpoint", ba.checkpoint);
  bench->add_option("--split", ba.split)->capture_default_str();
  bench->add_option("--tau", ba.tau)->check(CLI::NonNegativeNumber);
  bench->add_option("--reps", ba.reps)->capture_default_str();
  bench->add_option("--downsample", ba.downsample)->capture_default_str();
  bench->add_option("--width-mult", ba.width_mult)->capture_default_str();
  bench->add_option("--threads", ba.threads)->capture_default_str();

  std::size_t gc_configs = 100;
  std::uint64_t gc_seed = 0;
  std::vector<std::string> gc_only;
  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every differentiable op");
  grad->add_option("--configs", gc_configs, "random configurations per item")->capture_default_str();
  grad->add_option("--seed", gc_seed)->capture_default_str();
  grad->add_option("--only", gc_only, "restrict to these items")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  std::vector<const char*> cargs;
  for (const auto& s : args) cargs.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  if (*synth) return cmd_synth(sa);
  if (*fit) return cmd_fit(fa);
  if (*render) return cmd_render(ra);
  if (*eval) return cmd_eval(ev_renders, ev_gt);
  if (*bench) return cmd_bench(ba);
  if (*grad) return cmd_gradcheck(gc_configs, gc_seed, gc_only);
  return kValidation;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Training reallocates the same large activations every step; keep them
  // in the heap instead of mapping and faulting them in each time.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}
