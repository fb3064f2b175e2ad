// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. Usage: acceptance <group> [work dir]
// groups: fast (1 2 3 5), size (4), fit (6), ablation (7), determinism (8), or a number.

#include <malloc.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "oracles.h"
#include "radmap/gradcheck.h"
#include "radmap/hashing.h"
#include "radmap/models.h"
#include "radmap/rasterizer.h"
#include "radmap/sampling.h"

using namespace radmap;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

fs::path g_work;
int g_failed = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool pass, const std::string& measured, const std::string& tolerance) {
  std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, measured.c_str(), tolerance.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failed;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Camera random_camera(Rng& rng, int w, int h) {
  const double az = rng.uniform(0, 2 * M_PI), el = rng.uniform(-1.2, 1.2), r = rng.uniform(1.8, 4.0);
  const Eigen::Vector3d eye(r * std::cos(el) * std::cos(az), r * std::cos(el) * std::sin(az), r * std::sin(el));
  const Eigen::Vector3d target(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
  return camera_from_fov(rng.uniform(0.4, 1.3), w, h, look_at(eye, target, Eigen::Vector3d::UnitZ()));
}

// Mix of shell, slab and uniform-box points; some scenes include exact duplicates.
PointCloud random_cloud(Rng& rng, std::size_t n) {
  PointCloud c;
  const int kind = int(rng.integer(0, 2));
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector3d p;
    if (kind == 0) {
      p = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized() * rng.uniform(0.9, 1.0);
    } else if (kind == 1) {
      p = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.normal(0.0, 0.01));
    } else {
      p = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    c.positions.push_back(p);
    if (i > 0 && rng.uniform() < 0.02) c.positions.push_back(c.positions[std::size_t(rng.integer(0, i - 1))]);
  }
  c.positions.resize(n);
  return c;
}

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }

// ---- 1 ----------------------------------------------------------------------

void rasterizer_equivalence() {
  Rng rng(101);
  std::size_t mismatched = 0, oracle_mismatched = 0, occupied = 0;
  double max_dz = 0.0, timed = 0.0;
  for (int s = 0; s < 50; ++s) {
    const PointCloud cloud = random_cloud(rng, std::size_t(rng.integer(1, 5000)));
    const Camera cam = random_camera(rng, 32, 32);
    RasterConfig cfg;
    cfg.tau = log_uniform(rng, 1e-3, 5e-2);
    cfg.tile_size = int(rng.integer(1, 4)) * 8;
    const auto t0 = Clock::now();
    const FragmentBuffer fast = rasterize(cloud, cam, cfg);
    const FragmentBuffer slow = rasterize_bruteforce(cloud, cam, cfg);
    timed += seconds_since(t0);
    const auto ref = oracle::rasterize(cloud, cam, cfg.tau);
    for (std::size_t p = 0; p < slow.pixel_count(); ++p) {
      occupied += slow.occupied[p];
      if (fast.occupied[p] != slow.occupied[p] || fast.point_index[p] != slow.point_index[p]) ++mismatched;
      max_dz = std::max(max_dz, std::abs(fast.z[p] - slow.z[p]));
      if (bool(slow.occupied[p]) != ref[p].occupied || slow.point_index[p] != ref[p].index ||
          std::abs(slow.z[p] - ref[p].z) > 1e-9) {
        ++oracle_mismatched;
      }
    }
  }
  const bool pass = mismatched == 0 && max_dz < 1e-9 && oracle_mismatched == 0 && timed < 30.0;
  report(1, pass,
         fmt("50 scenes, %zu occupied pixels, %zu occupancy/index mismatches, max |dz| %.3g, "
             "%zu brute-force vs oracle mismatches, %.2f s",
             occupied, mismatched, max_dz, oracle_mismatched, timed),
         "exact occupancy/index, |dz| < 1e-9, < 30 s");
}

// ---- 2 ----------------------------------------------------------------------

void rectification_invariants() {
  Rng rng(202);
  const auto t0 = Clock::now();
  std::size_t sampled = 0, dropped = 0;
  double max_ray = 0.0, max_depth = 0.0;
  while (sampled < 10000) {
    const PointCloud cloud = random_cloud(rng, 3000);
    const Camera cam = random_camera(rng, 32, 32);
    RasterConfig cfg;
    cfg.tau = log_uniform(rng, 1e-3, 5e-2);
    const FragmentBuffer frag = rasterize(cloud, cam, cfg);
    const Rectified r = rectify(frag);
    dropped += r.dropped;
    const Eigen::Matrix3d rot = cam.cam_to_world.topLeftCorner<3, 3>();
    const Eigen::Vector3d o = cam.cam_to_world.topRightCorner<3, 1>();
    std::vector<std::size_t> order(r.pixel_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng.engine());
    order.resize(std::min<std::size_t>(order.size(), 400));
    for (std::size_t k : order) {
      if (sampled == 10000) break;
      const std::size_t pix = r.pixel_ids[k];
      const int x = int(pix % std::size_t(cam.width)), y = int(pix / std::size_t(cam.width));
      const Eigen::Vector3d d =
          (rot * Eigen::Vector3d((x + 0.5 - cam.cx) / cam.fx, -(y + 0.5 - cam.cy) / cam.fy, -1.0)).normalized();
      const Eigen::Vector3d v = r.coords[k] - o;
      max_ray = std::max(max_ray, (v - v.dot(d) * d).norm());
      const double depth = -(rot.transpose() * v).z();
      const double winner = -(rot.transpose() * (cloud.positions[std::size_t(frag.point_index[pix])] - o)).z();
      max_depth = std::max({max_depth, std::abs(depth - frag.z[pix]), std::abs(depth - winner)});
      ++sampled;
    }
  }
  const double secs = seconds_since(t0);
  report(2, max_ray < 1e-9 && max_depth < 1e-9 && secs < 5.0,
         fmt("%zu pixels, max ray residual %.3g, max depth mismatch %.3g, %zu grazing dropped, %.2f s", sampled,
             max_ray, max_depth, dropped, secs),
         "residual < 1e-9, depth < 1e-9, < 5 s");
}

// ---- 3 ----------------------------------------------------------------------

std::vector<std::uint8_t> relu_pattern(const Tape& tape) {
  std::vector<std::uint8_t> out;
  for (const auto& node : tape.nodes()) {
    if (node.op != "relu") continue;
    for (double v : node.inputs[0].data()) out.push_back(v > 0.0 ? 1 : (v < 0.0 ? 2 : 0));
  }
  return out;
}

void gradient_suite() {
  constexpr std::size_t kConfigs = 100;
  constexpr double h = 1e-5;
  const auto t0 = Clock::now();
  std::size_t total_failed = 0, min_checked = ~std::size_t{0}, cases = 0;
  std::string failures;
  std::uint64_t stream = 0;
  for (const GradCase& gc : gradient_cases()) {
    std::size_t checked = 0, skipped = 0, failed_configs = 0;
    double worst = 0.0;
    for (std::size_t c = 0; c < kConfigs; ++c) {
      Rng rng(303, ++stream);
      const GradProblem prob = gc.make(rng);
      for (const auto& leaf : prob.leaves) {
        leaf.tensor.set_requires_grad(true);
        leaf.tensor.zero_grad();
      }
      {
        Tape tape;
        backward(tape, prob.loss(tape));
      }
      auto eval = [&](std::vector<std::uint8_t>* pattern) {
        Tape tape;
        const double v = prob.loss(tape).item();
        if (pattern) *pattern = relu_pattern(tape);
        return v;
      };
      bool config_ok = true;
      for (const auto& leaf : prob.leaves) {
        const std::vector<double> analytic(leaf.tensor.grad().begin(), leaf.tensor.grad().end());
        const std::size_t n = leaf.tensor.numel();
        std::vector<std::size_t> entries(n);
        std::iota(entries.begin(), entries.end(), std::size_t{0});
        std::shuffle(entries.begin(), entries.end(), rng.engine());
        entries.resize(std::min<std::size_t>(n, gc.name == "refine_net" ? 1 : 3));
        for (std::size_t e : entries) {
          Tensor t = leaf.tensor;
          const double saved = t.data()[e];
          std::vector<std::uint8_t> plus, minus;
          t.data()[e] = saved + h;
          eval(&plus);
          t.data()[e] = saved - h;
          eval(&minus);
          t.data()[e] = saved;
          if (plus != minus) {
            ++skipped;
            continue;
          }
          const double numeric = oracle::central_difference([&] { return eval(nullptr); }, t, e, h);
          ++checked;
          const double scale = std::max(std::abs(analytic[e]), std::abs(numeric));
          if (scale >= 1e-4) worst = std::max(worst, std::abs(analytic[e] - numeric) / scale);
          if (!oracle::grad_close(analytic[e], numeric, 1e-4)) {
            config_ok = false;
            std::printf("    %s config %zu %s[%zu]: analytic %.12g, numeric %.12g\n", gc.name.c_str(), c,
                        leaf.name.c_str(), e, analytic[e], numeric);
          }
        }
      }
      failed_configs += !config_ok;
    }
    ++cases;
    min_checked = std::min(min_checked, checked);
    total_failed += failed_configs;
    std::printf("  %-22s configs=%zu checked=%zu kinks=%zu failed=%zu max_rel=%.3g\n", gc.name.c_str(), kConfigs,
                checked, skipped, failed_configs, worst);
    if (failed_configs) failures += " " + gc.name;
  }
  const double secs = seconds_since(t0);
  report(3, total_failed == 0 && min_checked > 0 && secs < 300.0,
         fmt("%zu cases x %zu configs, %zu failing configs%s, %.1f s", cases, kConfigs, total_failed,
             failures.empty() ? "" : (" in" + failures).c_str(), secs),
         "h = 1e-5, rel < 1e-4, >= 100 configs each, < 300 s");
}

// ---- 4 ----------------------------------------------------------------------

void model_size() {
  const RadianceMLP mlp;
  const ParamCount pc = count_params(mlp);
  std::size_t by_hand = 0;
  for (const auto& p : mlp.named_params()) by_hand += p.tensor.numel();
  const double rel = std::abs(double(pc.bytes_f32) - 0.75e6) / 0.75e6;
  report(4, pc.count == 189064 && pc.bytes_f32 == 756256 && by_hand == pc.count && rel < 0.01,
         fmt("%zu parameters, %zu f32 bytes, payload %.2f%% from 0.75 MB", pc.count, pc.bytes_f32, 100.0 * rel),
         "exactly 189064 parameters and 756256 bytes, within 1% of 0.75 MB");
}

// ---- 5 ----------------------------------------------------------------------

void single_evaluation() {
  Rng rng(505);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    VolumeSamples s;
    const std::size_t n = std::size_t(rng.integer(2, 64));
    const std::size_t surface = std::size_t(rng.integer(0, std::int64_t(n) - 1));
    s.t_near = rng.uniform(0.0, 2.0);
    double t = s.t_near;
    for (std::size_t k = 0; k < n; ++k) {
      t += rng.uniform(1e-3, 0.1);
      s.ts.push_back(t);
      s.colors.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
    }
    s.t_far = t + rng.uniform(1e-3, 0.1);
    for (std::size_t k = 0; k < n; ++k) {
      const double delta = (k + 1 < n ? s.ts[k + 1] : s.t_far) - s.ts[k];
      if (k < surface) s.sigmas.push_back(0.0);
      else if (k == surface) s.sigmas.push_back(rng.uniform(20.0, 60.0) / delta);
      else s.sigmas.push_back(rng.uniform(0.0, 1e3));
    }
    worst = std::max(worst, (volume_render_oracle(s) - s.colors[surface]).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  report(5, worst < 1e-6 && secs < 5.0, fmt("1000 instances, max component error %.3g, %.3f s", worst, secs),
         "< 1e-6 componentwise, < 5 s");
}

// ---- CLI driven -------------------------------------------------------------

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(RADMAP_CLI) + " " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Toy scene with the acceptance defaults: checker sphere, 20k points, 30 + 8 views at 64x64.
fs::path toy_scene() {
  const fs::path dir = g_work / "toy";
  if (!fs::exists(dir / "manifest.json")) {
    const int rc = run("synth --out " + q(dir) +
                           " --primitive sphere --radiance checker --points 20000 --noise 0.002 --views 38"
                           " --test-views 8 --width 64 --height 64 --seed 7",
                       g_work / "synth.log");
    if (rc != 0) throw std::runtime_error("synth failed: " + slurp(g_work / "synth.log"));
  }
  return dir;
}

const std::string kToyTraining = " --lr-mlp 5e-3 --lr-refine 1.5e-3 --width-mult 0.25 --seed 0 ";

struct FitResult {
  int rc = -1;
  double psnr = 0.0;
  double secs = 0.0;
  nlohmann::json report;
};

FitResult fit(const std::string& name, const std::string& flags) {
  const fs::path out = g_work / name;
  fs::remove_all(out);
  const auto t0 = Clock::now();
  FitResult r;
  r.rc = run("fit --data " + q(toy_scene()) + " --out " + q(out) + flags, g_work / (name + ".log"));
  r.secs = seconds_since(t0);
  if (r.rc == 0) {
    r.report = nlohmann::json::parse(slurp(out / "report.json"));
    r.psnr = r.report.at("test_psnr").get<double>();
  }
  std::printf("  fit %-14s exit %d, test PSNR %.3f dB, %.1f s\n", name.c_str(), r.rc, r.psnr, r.secs);
  std::fflush(stdout);
  return r;
}

void toy_fit() {
  const FitResult r = fit("toy_fit", kToyTraining + "--max-steps 5000 --eval-every 0 --checkpoint-every 0");
  report(6, r.rc == 0 && r.psnr >= 24.0 && r.secs <= 900.0,
         fmt("5000 steps, held-out PSNR %.3f dB, %.1f s", r.psnr, r.secs), "PSNR >= 24 dB, <= 900 s");
}

void ablation() {
  const std::string budget = kToyTraining + "--max-steps 1500 --eval-every 0 --checkpoint-every 0";
  const auto t0 = Clock::now();
  const FitResult r1 = fit("rect_1x", budget);
  const FitResult n1 = fit("norect_1x", budget + " --no-rectify");
  const FitResult r10 = fit("rect_10x", budget + " --downsample 10");
  const FitResult n10 = fit("norect_10x", budget + " --downsample 10 --no-rectify");
  const double secs = seconds_since(t0);
  const bool ran = r1.rc == 0 && n1.rc == 0 && r10.rc == 0 && n10.rc == 0;
  const double gap1 = r1.psnr - n1.psnr, gap10 = r10.psnr - n10.psnr;
  report(7, ran && gap10 >= 0.3 && gap10 >= gap1 && secs <= 1800.0,
         fmt("gap at 10x %.3f dB (%.3f vs %.3f), gap at 1x %.3f dB (%.3f vs %.3f), %.1f s", gap10, r10.psnr,
             n10.psnr, gap1, r1.psnr, n1.psnr, secs),
         "gap at 10x >= 0.3 dB and >= gap at 1x, <= 1800 s");
}

void determinism() {
  const std::string flags = kToyTraining + "--max-steps 60 --log-every 1 --eval-every 30 --checkpoint-every 30";
  const FitResult a = fit("det_a", flags);
  const FitResult b = fit("det_b", flags);
  const std::string ca = slurp(g_work / "det_a" / "metrics.csv"), cb = slurp(g_work / "det_b" / "metrics.csv");
  const std::string ha = sha256_file(g_work / "det_a" / "checkpoint.rmck");
  const std::string hb = sha256_file(g_work / "det_b" / "checkpoint.rmck");
  const std::size_t rows = std::size_t(std::count(ca.begin(), ca.end(), '\n'));
  const bool same_report = a.report == b.report;
  report(8, a.rc == 0 && b.rc == 0 && rows > 60 && ca == cb && ha == hb && same_report,
         fmt("%zu-line loss traces %s, checkpoint sha256 %s, reports %s", rows, ca == cb ? "identical" : "differ",
             ha == hb ? "identical" : "differ", same_report ? "identical" : "differ"),
         "identical traces and hashes");
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, -1);
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <fast|size|fit|ablation|determinism|1..8> [work dir]\n");
    return 2;
  }
  const std::string group = argv[1];
  g_work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "radmap_acceptance";
  fs::create_directories(g_work);
  const std::map<std::string, std::vector<int>> groups{
      {"fast", {1, 2, 3, 5}}, {"size", {4}}, {"fit", {6}}, {"ablation", {7}}, {"determinism", {8}}, {"all", {1, 2, 3, 4, 5, 6, 7, 8}}};
  std::vector<int> ids;
  if (auto it = groups.find(group); it != groups.end()) ids = it->second;
  else ids = {std::atoi(group.c_str())};
  const std::map<int, std::function<void()>> run_one{
      {1, rasterizer_equivalence}, {2, rectification_invariants}, {3, gradient_suite}, {4, model_size},
      {5, single_evaluation},      {6, toy_fit},                  {7, ablation},      {8, determinism}};
  for (int id : ids) {
    auto it = run_one.find(id);
    if (it == run_one.end()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", group.c_str());
      return 2;
    }
    try {
      it->second();
    } catch (const std::exception& e) {
      report(id, false, std::string("error: ") + e.what(), "must run");
    }
  }
  return g_failed == 0 ? 0 : 1;
}
