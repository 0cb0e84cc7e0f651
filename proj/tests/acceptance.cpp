// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lfi/cues.hpp"
#include "lfi/pipeline.hpp"
#include "lfi/retinex.hpp"
#include "lfi/synth.hpp"
#include "lfi/tv_solver.hpp"
#include "oracles.hpp"

using namespace lfi;

namespace {

struct Report {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DecompositionResult run(const Scene& scene, PipelineConfig cfg, bool with_depth,
                        const std::vector<EdgeRaster>* albedo = nullptr) {
  DepthInput depth{scene.truth.depth, scene.disparity};
  DecomposeOptions opts;
  opts.depth = with_depth ? &depth : nullptr;
  opts.albedo_override = albedo;
  return decompose(scene.radiance, cfg, opts);
}

// 1. R_f * S_f reproduces L wherever S_f >= 1e-3.
Report reconstruction_identity() {
  Report r;
  for (const char* name : {"mondrian", "noisy", "two-layer", "flat"}) {
    const Scene scene = generate(preset(name), 11);
    const auto res = run(scene, PipelineConfig{}, true);
    const Dims& d = scene.radiance.dims();
    double worst = 0.0;
    for (std::size_t k = 0; k < d.rays(); ++k) {
      const double s = res.shading.samples()[k];
      if (s < 1e-3) continue;
      for (int c = 0; c < 3; ++c) {
        worst = std::max(worst, std::abs(res.reflectance.samples()[3 * k + c] * s -
                                         scene.radiance.samples()[3 * k + c]));
      }
    }
    r.check(worst <= 1e-6, std::string(name) + " max err " + num(worst));
  }
  return r;
}

// Piecewise-constant 5x5x64x64 volume: a bright square moving with disparity 1.
ScalarLightField blocks_volume() {
  ScalarLightField f(Dims{5, 5, 64, 64}, 0.2);
  const Dims& d = f.dims();
  for (int v = 0; v < d.n_v; ++v) {
    for (int u = 0; u < d.n_u; ++u) {
      for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
          const int xs = x - (u - 2), ys = y - (v - 2);
          double val = 0.2;
          if (xs >= 16 && xs < 40 && ys >= 20 && ys < 44) val = 0.8;
          if (x >= 48) val = 0.5;
          f.at(u, v, x, y) = val;
        }
      }
    }
  }
  return f;
}

double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s / double(a.size());
}

// 2. TV-L1 filter behavior.
Report tv_behavior() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();

  {
    const ScalarLightField flat(Dims{5, 5, 64, 64}, 0.37);
    const auto out = tvl1_filter(flat, TvParams{});
    double worst = 0.0;
    for (double x : out.field.samples()) worst = std::max(worst, std::abs(x - 0.37));
    r.check(worst <= 1e-8, "constant volume drift " + num(worst));
  }

  const ScalarLightField clean = blocks_volume();
  ScalarLightField noisy = clean;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (double& x : noisy.samples()) x += noise(rng);
  const auto den = tvl1_filter(noisy, TvParams{});
  const double before = mse(noisy.samples(), clean.samples());
  const double after = mse(den.field.samples(), clean.samples());
  r.check(after <= 0.5 * before, "noise mse " + num(before) + " -> " + num(after));

  // Step edges stay where they were: along the central-view row y = 32 the
  // largest jumps are at the square (x 15|16, 39|40) and stripe (47|48) borders.
  {
    const Dims& d = clean.dims();
    std::vector<std::pair<double, int>> jumps;
    for (int x = 0; x + 1 < d.width; ++x) {
      jumps.push_back({std::abs(den.field.at(2, 2, x + 1, 32) - den.field.at(2, 2, x, 32)), x});
    }
    std::sort(jumps.rbegin(), jumps.rend());
    std::vector<int> top{jumps[0].second, jumps[1].second, jumps[2].second};
    std::sort(top.begin(), top.end());
    r.check(top == std::vector<int>{15, 39, 47}, "step edges at x = " + std::to_string(top[0]) + ", " +
                                                     std::to_string(top[1]) + ", " + std::to_string(top[2]));
  }

  // A volume that varies only along x reduces to 1D problems on every row;
  // so does any volume filtered along x alone.
  {
    const Dims d{3, 3, 48, 6};
    std::mt19937_64 g(17);
    std::vector<std::vector<double>> rows(d.height);
    for (int y = 0; y < d.height; ++y) {
      double level = 0.5;
      for (int x = 0; x < d.width; ++x) {
        if (x % 9 == 0) level = noise(g) * 8.0 + 0.5;
        rows[y].push_back(level + noise(g));
      }
    }
    TvParams p;
    p.max_iters = 5000;
    p.tol_rel = 1e-9;
    p.cg_tol = 1e-12;
    p.cg_max_iters = 200;
    for (bool x_only : {false, true}) {
      ScalarLightField f(d);
      for (int v = 0; v < d.n_v; ++v)
        for (int u = 0; u < d.n_u; ++u)
          for (int y = 0; y < d.height; ++y)
            for (int x = 0; x < d.width; ++x) f.at(u, v, x, y) = rows[x_only ? y : 0][x];
      if (x_only) {
        p.axes = AxisSet{};
        p.axes.insert(Axis::X);
      }
      const auto out = tvl1_filter(f, p);
      double worst = 0.0;
      for (int y = 0; y < d.height; ++y) {
        const auto ref = oracle::tv1d(rows[x_only ? y : 0], p.beta);
        for (int v = 0; v < d.n_v; ++v)
          for (int u = 0; u < d.n_u; ++u)
            for (int x = 0; x < d.width; ++x)
              worst = std::max(worst, std::abs(out.field.at(u, v, x, y) - ref[x]));
      }
      r.check(worst <= 1e-3, std::string(x_only ? "x-axis filter" : "x-varying volume") +
                                 " vs 1D oracle max dev " + num(worst));
    }
  }

  const double secs = seconds_since(t0);
  r.check(secs < 60.0, "runtime " + num(secs) + " s");
  return r;
}

LogView random_log_view(int w, int h, std::mt19937_64& g) {
  std::uniform_real_distribution<double> dist(-3.0, 0.0);
  LogView l{Image(w, h, 1), 1e-4};
  for (double& x : l.values.data()) x = dist(g);
  return l;
}

EdgeWeightMap random_weights(int w, int h, std::mt19937_64& g) {
  EdgeWeightMap m{EdgeRaster(w, h, 1.0), EdgeRaster(w, h, 1.0)};
  std::bernoulli_distribution coin(0.3);
  for (double& x : m.albedo.horizontal) x = coin(g) ? 0.0 : 1.0;
  for (double& x : m.albedo.vertical) x = coin(g) ? 0.0 : 1.0;
  for (double& x : m.occlusion.horizontal) x = coin(g) ? 0.01 : 1.0;
  for (double& x : m.occlusion.vertical) x = coin(g) ? 0.01 : 1.0;
  return m;
}

std::vector<PixelPair> random_pairs(int n, int count, std::mt19937_64& g) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<PixelPair> pairs;
  while (int(pairs.size()) < count) {
    int i = pick(g), j = pick(g);
    if (i == j) continue;
    pairs.push_back({std::min(i, j), std::max(i, j)});
  }
  return pairs;
}

// 3. Retinex assembly, solver and exposure covariance.
Report retinex_solver() {
  Report r;
  std::mt19937_64 g(23);
  const RetinexWeights lambdas{1.0, 1.0, 1000.0};

  double worst_energy = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const LogView l = random_log_view(6, 6, g);
    const auto w = random_weights(6, 6, g);
    const auto anchors = absolute_scale_anchors(l, 0.05);
    const auto pairs = random_pairs(36, 10, g);
    const auto sys = build_system(l, w, anchors, pairs, lambdas);
    const LogView s = random_log_view(6, 6, g);
    const double direct = retinex_energy(l, w, anchors, pairs, lambdas, s.values.data());
    const double quad = quadratic_value(sys, s.values.data());
    worst_energy = std::max(worst_energy, std::abs(direct - quad) / std::max(1.0, std::abs(direct)));
  }
  r.check(worst_energy <= 1e-8, "assembly vs direct energy rel err " + num(worst_energy));

  double worst_solve = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const LogView l = random_log_view(8, 8, g);
    const auto w = random_weights(8, 8, g);
    const auto pairs = random_pairs(64, 12, g);
    const auto sys = build_system(l, w, absolute_scale_anchors(l, 0.01), pairs, lambdas);
    std::vector<double> x(l.values.data().begin(), l.values.data().end());
    preconditioned_cg(sys.a, sys.b, x, 1e-12, 6400);
    const auto ref = oracle::dense_solve(sys.a, sys.b);
    for (std::size_t k = 0; k < x.size(); ++k) worst_solve = std::max(worst_solve, std::abs(x[k] - ref[k]));
  }
  r.check(worst_solve <= 1e-6, "cg vs dense max dev " + num(worst_solve));

  {
    const Scene scene = generate(preset("mondrian"), 4);
    const Image view = scene.radiance.view(1, 1);
    const PipelineConfig cfg;
    double worst = 0.0;
    for (double alpha : {0.25, 3.0}) {
      Image scaled = view;
      for (double& x : scaled.data()) x *= alpha;
      auto solve = [&](const Image& rgb) {
        const LightField one = assemble(Dims{1, 1, view.width(), view.height()}, std::span(&rgb, 1));
        const auto norm = per_ray_l2_norm(one).view(0, 0);
        const auto r0 = divide_by_scalar_field(one, per_ray_l2_norm(one), cfg.eps_div).view(0, 0);
        const auto cues = compute_view_cues(rgb, r0, nullptr, cfg.cues);
        const EdgeWeightMap wts{scene.truth.albedo_edges[scene.radiance.dims().view_index(1, 1)],
                                cues.omega_occ};
        return solve_view(to_log(norm, cfg.eps_log), wts, texture_pairs(rgb, cfg.retinex.texture),
                          cfg.lambdas, cfg.retinex);
      };
      const auto base = solve(view);
      const auto sc = solve(scaled);
      for (std::size_t k = 0; k < base.r.values.data().size(); ++k) {
        worst = std::max(worst, std::abs(std::exp(base.r.values.data()[k]) - std::exp(sc.r.values.data()[k])));
      }
    }
    r.check(worst <= 1e-6, "R1 change under exposure scaling " + num(worst));
  }
  return r;
}

// 4. Mondrian, zero disparity, ground-truth albedo cues.
Report synthetic_quality() {
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  const Scene scene = generate(preset("mondrian"), 7);
  const auto res = run(scene, PipelineConfig{}, false, &scene.truth.albedo_edges);
  const double rmse = mean_aligned_log_rmse(res.shading.samples(), scene.truth.shading.samples());
  const double si = si_mse(res.shading.samples(), scene.truth.shading.samples());
  const double secs = seconds_since(t0);
  r.check(rmse < 0.02, "log-shading rmse " + num(rmse));
  r.check(si < 1e-3, "si_mse " + num(si));
  r.check(secs < 120.0, "runtime " + num(secs) + " s");

  // Context only: the Retinex stage alone on the unfiltered central view.
  const PipelineConfig cfg;
  const int c = scene.radiance.dims().view_index(1, 1);
  const LightField one = assemble(Dims{1, 1, 64, 64}, std::vector<Image>{scene.radiance.view(1, 1)});
  const EdgeWeightMap w{scene.truth.albedo_edges[c], EdgeRaster(64, 64, 1.0)};
  const auto sol = solve_view(to_log(per_ray_l2_norm(one).view(0, 0), cfg.eps_log), w,
                              texture_pairs(one.view(0, 0), cfg.retinex.texture), cfg.lambdas, cfg.retinex);
  const Image s = from_log(sol.s);
  const auto gt = scene.truth.shading.view_span(1, 1);
  r.detail += " (info: Retinex stage without the TV pass, rmse " +
              num(mean_aligned_log_rmse(s.data(), gt)) + ")";
  return r;
}

// 5. Two-layer scene with and without the occlusion cue.
Report occlusion_benefit() {
  Report r;
  const Scene scene = generate(preset("two-layer"), 9);
  PipelineConfig with;
  PipelineConfig without;
  without.use_occlusion = false;
  const double a = si_mse(run(scene, with, true).shading.samples(), scene.truth.shading.samples());
  const double b = si_mse(run(scene, without, false).shading.samples(), scene.truth.shading.samples());
  r.check(a < b, "si_mse with occlusion " + num(a) + ", without " + num(b));
  return r;
}

// 6. Angular coherence of the final shading.
Report angular_coherence() {
  Report r;
  {
    const Scene scene = generate(preset("noisy"), 13);
    PipelineConfig cfg;
    cfg.keep_intermediates = true;
    const auto res = run(scene, cfg, true);
    const double final_score = angular_coherence_score(res.shading, scene.disparity);
    const double s1_score = angular_coherence_score(res.intermediates->s1, scene.disparity);
    r.check(final_score <= s1_score, "noisy scene coherence S_f " + num(final_score) + " vs S1 " + num(s1_score));
  }
  {
    const Scene scene = generate(preset("mondrian"), 13);
    const auto res = run(scene, PipelineConfig{}, true);
    const Dims& d = scene.radiance.dims();
    double worst = 0.0;
    const auto ref = res.shading.view_span(0, 0);
    for (int v = 0; v < d.n_v; ++v) {
      for (int u = 0; u < d.n_u; ++u) {
        const auto other = res.shading.view_span(u, v);
        for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(other[k] - ref[k]));
      }
    }
    r.check(worst <= 1e-6, "zero-disparity view spread " + num(worst));
  }
  return r;
}

// 7. Published cue thresholds and their strict boundaries.
Report cue_constants() {
  Report r;
  const CueParams p;
  r.check(p.angle_thresh == 0.04 && p.tau1 == 0.85 && p.tau2 == 0.05 && p.depth_thresh == 0.02 &&
              p.occ_weight == 0.01,
          "defaults 0.04 / 0.85 / 0.05 / 0.02 / 0.01");

  r.check(!angle_marks_albedo(0.04, p.angle_thresh) && angle_marks_albedo(std::nextafter(0.04, 1.0), p.angle_thresh),
          "angle 0.04 is not an edge, just above is");

  {
    DepthMap depth{2, 1, {0.0, 0.02}, {1, 1}};
    const double at = occlusion_weights(depth, 2, 1, p.depth_thresh, p.occ_weight).h(0, 0);
    depth.values[1] = std::nextafter(0.02, 1.0);
    const double above = occlusion_weights(depth, 2, 1, p.depth_thresh, p.occ_weight).h(0, 0);
    r.check(at == 1.0 && above == 0.01, "depth step 0.02 gives " + num(at) + ", just above gives " + num(above));
  }

  {
    // White-probability labels: an edge is marked only with P >= tau1 and a
    // normalized distance step > tau2.
    auto labels = [&](double p_left, double step) {
      BwMaps m;
      m.d_max = 1.0;
      m.p_white = Image(2, 1, 1);
      m.p_black = Image(2, 1, 1, 0.0);
      m.d_white = Image(2, 1, 1);
      m.d_black = Image(2, 1, 1, 0.0);
      m.p_white.at(0, 0) = p_left;
      m.p_white.at(1, 0) = 0.0;
      m.d_white.at(0, 0) = 0.0;
      m.d_white.at(1, 0) = step;
      return bw_gradient_labels(m, p.tau1, p.tau2).white.h(0, 0);
    };
    r.check(labels(0.85, 0.5) == 0.0 && labels(std::nextafter(0.85, 0.0), 0.5) == 1.0,
            "P = tau1 detects, just below does not");
    r.check(labels(1.0, 0.05) == 1.0 && labels(1.0, std::nextafter(0.05, 1.0)) == 0.0,
            "distance step tau2 is not an edge, just above is");
  }

  {
    const double a[3] = {1.0, 0.0, 0.0};
    const double b[3] = {std::cos(0.1), std::sin(0.1), 0.0};
    r.check(std::abs(rgb_angle(a, b) - 0.1) < 1e-12, "rgb angle " + num(rgb_angle(a, b)));
  }
  return r;
}

// 8. Full-size decomposition time and memory.
Report performance() {
  Report r;
  SceneSpec spec = preset("noisy");
  spec.dims = Dims{9, 9, 128, 128};
  spec.patches_x = spec.patches_y = 8;
  const Scene scene = generate(spec, 21);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run(scene, PipelineConfig{}, true);
  const double secs = seconds_since(t0);
  const double gib = double(res.peak_rss_kb) / (1024.0 * 1024.0);
  std::string stages;
  for (const auto& t : res.timings) stages += " " + t.stage + "=" + num(t.seconds) + "s";
  r.check(secs < 600.0, "9x9x128x128 in " + num(secs) + " s on " + std::to_string(omp_get_max_threads()) +
                            " threads (" + stages.substr(1) + ")");
  r.check(gib < 4.0, "peak rss " + num(gib) + " GiB");
  r.check(res.timings.size() == 5, "per-stage timings reported");
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Report()>>> criteria = {
      {"reconstruction identity", reconstruction_identity},
      {"TV-L1 behavior", tv_behavior},
      {"Retinex solver", retinex_solver},
      {"synthetic decomposition quality", synthetic_quality},
      {"occlusion cue benefit", occlusion_benefit},
      {"angular coherence", angular_coherence},
      {"cue constants", cue_constants},
      {"performance envelope", performance},
  };
  // Optional argument: run only the listed criterion numbers.
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= int(criteria.size())) selected[k - 1] = true;
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Report rep;
    try {
      rep = criteria[i].second();
    } catch (const std::exception& e) {
      rep.pass = false;
      rep.detail = std::string("exception: ") + e.what();
    }
    failures += rep.pass ? 0 : 1;
    std::printf("criterion %zu (%s): %s  %s\n", i + 1, criteria[i].first, rep.pass ? "PASS" : "FAIL",
                rep.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
