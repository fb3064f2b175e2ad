// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "radmap/errors.h"
#include "radmap/ops.h"
#include "radmap/training.h"

namespace radmap {

namespace fs = std::filesystem;
using nlohmann::json;

void TrainConfig::validate() const {
  if (!(lr_mlp > 0.0) || !(lr_refine > 0.0)) throw ValidationError("learning rates must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ValidationError("lr decay must lie in (0, 1]");
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  augment.validate();
}

void PipelineConfig::validate() const {
  raster.validate();
  encoding.validate();
  mlp.validate();
  refine.validate();
  loss.validate();
  train.validate();
}

std::string PipelineConfig::to_json() const {
  json j;
  j["raster"] = {{"tau", raster.tau}, {"tile_size", raster.tile_size}};
  j["encoding"] = {{"coord_freqs", encoding.coord_freqs},
                   {"dir_freqs", encoding.dir_freqs},
                   {"include_raw", encoding.include_raw},
                   {"bbox_min", {encoding.bbox.min.x(), encoding.bbox.min.y(), encoding.bbox.min.z()}},
                   {"bbox_max", {encoding.bbox.max.x(), encoding.bbox.max.y(), encoding.bbox.max.z()}}};
  j["mlp"] = {{"coord_width", mlp.coord_width}, {"dir_width", mlp.dir_width},
              {"widths", mlp.widths},           {"dir_after", mlp.dir_after},
              {"seed", mlp.seed}};
  j["refine"] = {{"in_channels", refine.in_channels}, {"out_channels", refine.out_channels},
                 {"widths", refine.widths},           {"width_multiplier", refine.width_multiplier},
                 {"input_skip", refine.input_skip},   {"seed", refine.seed}};
  j["loss"] = {{"w_l2", loss.w_l2},
               {"w_perc", loss.w_perc},
               {"perc_channels", loss.perceptual.channels},
               {"perc_kernel", loss.perceptual.kernel},
               {"perc_seed", loss.perceptual.seed},
               {"perc_weights", loss.perceptual.weights.string()}};
  j["train"] = {{"lr_mlp", train.lr_mlp},
                {"lr_refine", train.lr_refine},
                {"lr_decay", train.lr_decay},
                {"batch_size", train.batch_size},
                {"max_steps", train.max_steps},
                {"eval_every", train.eval_every},
                {"checkpoint_every", train.checkpoint_every},
                {"seed", train.seed},
                {"rectify", train.rectify},
                {"window", train.augment.window},
                {"scale_min", train.augment.scale_min},
                {"scale_max", train.augment.scale_max}};
  return j.dump();
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    const json& r = j.at("raster");
    c.raster.tau = r.at("tau");
    c.raster.tile_size = r.at("tile_size");
    const json& e = j.at("encoding");
    c.encoding.coord_freqs = e.at("coord_freqs");
    c.encoding.dir_freqs = e.at("dir_freqs");
    c.encoding.include_raw = e.at("include_raw");
    for (int k = 0; k < 3; ++k) {
      c.encoding.bbox.min[k] = e.at("bbox_min").at(k);
      c.encoding.bbox.max[k] = e.at("bbox_max").at(k);
    }
    const json& m = j.at("mlp");
    c.mlp.coord_width = m.at("coord_width");
    c.mlp.dir_width = m.at("dir_width");
    c.mlp.widths = m.at("widths").get<std::vector<std::size_t>>();
    c.mlp.dir_after = m.at("dir_after");
    c.mlp.seed = m.at("seed");
    const json& f = j.at("refine");
    c.refine.in_channels = f.at("in_channels");
    c.refine.out_channels = f.at("out_channels");
    c.refine.widths = f.at("widths").get<std::vector<std::size_t>>();
    c.refine.width_multiplier = f.at("width_multiplier");
    c.refine.input_skip = f.at("input_skip");
    c.refine.seed = f.at("seed");
    const json& l = j.at("loss");
    c.loss.w_l2 = l.at("w_l2");
    c.loss.w_perc = l.at("w_perc");
    c.loss.perceptual.channels = l.at("perc_channels").get<std::vector<std::size_t>>();
    c.loss.perceptual.kernel = l.at("perc_kernel");
    c.loss.perceptual.seed = l.at("perc_seed");
    c.loss.perceptual.weights = l.at("perc_weights").get<std::string>();
    const json& t = j.at("train");
    c.train.lr_mlp = t.at("lr_mlp");
    c.train.lr_refine = t.at("lr_refine");
    c.train.lr_decay = t.at("lr_decay");
    c.train.batch_size = t.at("batch_size");
    c.train.max_steps = t.at("max_steps");
    c.train.eval_every = t.at("eval_every");
    c.train.checkpoint_every = t.at("checkpoint_every");
    c.train.seed = t.at("seed");
    c.train.rectify = t.at("rectify");
    c.train.augment.window = t.at("window");
    c.train.augment.scale_min = t.at("scale_min");
    c.train.augment.scale_max = t.at("scale_max");
  } catch (const json::out_of_range& e) {
    // message reads "... key 'name' not found"
    const std::string what = e.what();
    const auto a = what.find('\''), b = what.rfind('\'');
    if (a != std::string::npos && b > a) throw SchemaError(what.substr(a + 1, b - a - 1), "pipeline config");
    throw FormatError(std::string("pipeline config: ") + e.what());
  } catch (const json::exception& e) {
    throw FormatError(std::string("pipeline config: ") + e.what());
  }
  return c;
}

namespace {

PipelineConfig bind(PipelineConfig cfg, const SceneData& scene) {
  cfg.encoding.bbox = scene.dataset.bbox;
  cfg.mlp.coord_width = cfg.encoding.coord_width();
  cfg.mlp.dir_width = cfg.encoding.dir_width();
  cfg.refine.in_channels = cfg.mlp.widths.empty() ? 0 : cfg.mlp.widths.back();
  cfg.validate();
  return cfg;
}

void snap_f32(std::span<double> values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

void snap_f32(std::vector<std::vector<double>>& values) {
  for (auto& v : values) snap_f32(std::span<double>(v));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const char* kCsvHeader = "step,loss,l2,perceptual,lr_mlp,lr_refine,test_psnr,test_ssim";

}  // namespace

std::vector<NamedTensor> model_tensors(const RadianceMLP& mlp, const RefineNet& net) {
  std::vector<NamedTensor> out = mlp.named_params();
  out.insert(out.end(), net.named_params().begin(), net.named_params().end());
  return out;
}

Trainer::Trainer(const SceneData& scene, PipelineConfig cfg)
    : scene_(scene),
      cfg_(bind(std::move(cfg), scene)),
      mlp_(cfg_.mlp),
      refine_(cfg_.refine),
      extractor_(cfg_.loss.perceptual),
      adam_mlp_(mlp_.params()),
      adam_refine_(refine_.params()) {
  scene.dataset.validate();
  scene.cloud.validate();
  for (const View& v : scene.dataset.train) train_frags_.push_back(rasterize(scene.cloud, v.camera, cfg_.raster));
  for (const View& v : scene.dataset.test) test_frags_.push_back(rasterize(scene.cloud, v.camera, cfg_.raster));
}

QueryBatch Trainer::batch_for(const FragmentBuffer& frag) const {
  return cfg_.train.rectify ? build_query_batch(frag, cfg_.encoding)
                            : build_raw_query_batch(frag, scene_.cloud, cfg_.encoding);
}

StepResult Trainer::step() {
  const TrainConfig& tc = cfg_.train;
  Rng rng(tc.seed, step_);
  StepResult r;
  r.lr_mlp = decayed_lr(tc.lr_mlp, tc.lr_decay, step_);
  r.lr_refine = decayed_lr(tc.lr_refine, tc.lr_decay, step_);
  adam_mlp_.zero_grad();
  adam_refine_.zero_grad();
  const double inv_batch = 1.0 / double(tc.batch_size);
  for (std::size_t b = 0; b < tc.batch_size; ++b) {
    const auto idx = static_cast<std::size_t>(rng.integer(0, std::int64_t(train_frags_.size()) - 1));
    const View& view = scene_.dataset.train[idx];
    const AugmentedView av = augment(view, train_frags_[idx], tc.augment, rng, scene_.cloud, cfg_.raster);
    const QueryBatch qb = batch_for(av.frag);
    Tape tape;
    const Tensor pred = render_image(tape, mlp_, refine_, qb);
    const LossTerms lt = total_loss(tape, pred, av.image.to_chw(), cfg_.loss, extractor_);
    const double loss = lt.total.item();
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite loss " + fmt(loss) + " at step " + std::to_string(step_) +
                         " on training view '" + view.name + "' (crop " + std::to_string(av.left) +
                         "," + std::to_string(av.top) + ", " + std::to_string(qb.size()) +
                         " occupied pixels)");
    }
    backward(tape, tc.batch_size == 1 ? lt.total : ops::scale(tape, lt.total, inv_batch));
    r.loss += loss * inv_batch;
    r.l2 += lt.l2 * inv_batch;
    r.perceptual += lt.perceptual * inv_batch;
  }
  adam_mlp_.step(r.lr_mlp);
  adam_refine_.step(r.lr_refine);
  r.step = ++step_;
  return r;
}

Image Trainer::render(const FragmentBuffer& frag) const {
  Tape tape;
  tape.set_enabled(false);
  return Image::from_chw(render_image(tape, mlp_, refine_, batch_for(frag)));
}

Image Trainer::render(const Camera& camera) const {
  return render(rasterize(scene_.cloud, camera, cfg_.raster));
}

EvalReport Trainer::evaluate() const {
  EvalReport rep;
  for (std::size_t i = 0; i < test_frags_.size(); ++i) {
    const View& v = scene_.dataset.test[i];
    const Image out = render(test_frags_[i]);
    rep.names.push_back(v.name);
    rep.psnr.push_back(psnr(out, v.image));
    rep.ssim.push_back(ssim(out, v.image));
    rep.mean_psnr += rep.psnr.back();
    rep.mean_ssim += rep.ssim.back();
  }
  if (!rep.names.empty()) {
    rep.mean_psnr /= double(rep.names.size());
    rep.mean_ssim /= double(rep.names.size());
  }
  return rep;
}

std::vector<NamedTensor> Trainer::checkpoint_tensors() {
  std::vector<NamedTensor> out;
  auto add_group = [&](const std::string& group, const std::vector<NamedTensor>& params, Adam& adam) {
    AdamState& st = adam.state();
    for (const auto& p : params) {
      Tensor t = p.tensor;
      snap_f32(t.data());
      out.push_back(p);
    }
    snap_f32(st.m);
    snap_f32(st.v);
    for (std::size_t i = 0; i < st.m.size(); ++i) {
      out.push_back({"adam." + group + ".m." + params[i].name, Tensor::from(params[i].tensor.shape(), st.m[i])});
      out.push_back({"adam." + group + ".v." + params[i].name, Tensor::from(params[i].tensor.shape(), st.v[i])});
    }
    out.push_back({"adam." + group + ".step", Tensor::scalar(double(st.step_count))});
  };
  add_group("mlp", mlp_.named_params(), adam_mlp_);
  add_group("refine", refine_.named_params(), adam_refine_);
  out.push_back({"train.step", Tensor::scalar(double(step_))});
  out.push_back({"meta.config", string_to_tensor(cfg_.to_json())});
  return out;
}

void Trainer::save(const fs::path& path) { save_checkpoint(path, checkpoint_tensors()); }

void Trainer::resume(const fs::path& path) {
  const auto tensors = load_checkpoint(path);
  assign_params(mlp_.named_params(), tensors);
  assign_params(refine_.named_params(), tensors);
  auto scalar = [&](const std::string& name) {
    const NamedTensor* t = find_tensor(tensors, name);
    if (!t || t->tensor.numel() != 1) throw FormatError("checkpoint lacks scalar '" + name + "'");
    return static_cast<std::uint64_t>(t->tensor.item());
  };
  auto load_group = [&](const std::string& group, const std::vector<NamedTensor>& params, Adam& adam) {
    AdamState& st = adam.state();
    st.step_count = scalar("adam." + group + ".step");
    st.m.clear();
    st.v.clear();
    for (const auto& p : params) {
      for (const char* kind : {".m.", ".v."}) {
        const std::string name = "adam." + group + kind + p.name;
        const NamedTensor* t = find_tensor(tensors, name);
        if (!t) throw FormatError("checkpoint lacks tensor '" + name + "'");
        if (t->tensor.numel() != p.tensor.numel()) throw FormatError("tensor '" + name + "' has the wrong size");
        auto& dst = kind[1] == 'm' ? st.m : st.v;
        dst.emplace_back(t->tensor.data().begin(), t->tensor.data().end());
      }
    }
  };
  load_group("mlp", mlp_.named_params(), adam_mlp_);
  load_group("refine", refine_.named_params(), adam_refine_);
  step_ = scalar("train.step");
}

FitReport Trainer::fit(const fs::path& out_dir, const Progress& progress) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  const fs::path csv_path = out_dir / "metrics.csv";

  // A resumed run keeps the rows up to its starting step.
  std::vector<std::string> kept;
  if (step_ > 0) {
    std::ifstream in(csv_path);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (!line.empty() && std::stoull(line.substr(0, line.find(','))) <= step_) kept.push_back(line);
    }
  }
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << kCsvHeader << '\n';
  for (const auto& line : kept) csv << line << '\n';

  const TrainConfig& tc = cfg_.train;
  FitReport report;
  if (step_ >= tc.max_steps) {
    report.final_eval = evaluate();
    if (step_ == 0) {
      csv << "0,,,,,," << fmt(report.final_eval.mean_psnr) << ',' << fmt(report.final_eval.mean_ssim) << '\n';
    }
    save(out_dir / "checkpoint.rmck");
    if (progress) progress(StepResult{step_, 0, 0, 0, 0, 0}, report.final_eval);
    return report;
  }
  while (step_ < tc.max_steps) {
    const StepResult r = step();
    report.trace.push_back(r);
    const bool last = step_ == tc.max_steps;
    std::optional<EvalReport> eval;
    if (last || (tc.eval_every > 0 && step_ % tc.eval_every == 0)) eval = evaluate();
    csv << r.step << ',' << fmt(r.loss) << ',' << fmt(r.l2) << ',' << fmt(r.perceptual) << ','
        << fmt(r.lr_mlp) << ',' << fmt(r.lr_refine) << ',';
    if (eval) csv << fmt(eval->mean_psnr) << ',' << fmt(eval->mean_ssim);
    else csv << ',';
    csv << '\n';
    if (last || (tc.checkpoint_every > 0 && step_ % tc.checkpoint_every == 0)) {
      csv.flush();
      save(out_dir / "checkpoint.rmck");
    }
    if (progress) progress(r, eval);
    if (last) report.final_eval = *eval;
  }
  if (!csv) throw IoError("write failed for " + csv_path.string());
  return report;
}

}  // namespace radmap
