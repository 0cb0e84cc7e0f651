#include <doctest.h>

#include <cmath>

#include "lfi/pipeline.hpp"
#include "lfi/synth.hpp"

using namespace lfi;

namespace {

Scene small_scene(const std::string& name, std::uint64_t seed) {
  SceneSpec spec = preset(name);
  spec.dims = Dims{3, 3, 32, 32};
  spec.patches_x = spec.patches_y = 3;
  if (spec.occluder) *spec.occluder = Occluder{10, 10, 12, 12, 1.0, 0.55, 2, 2};
  return generate(spec, seed);
}

}  // namespace

TEST_CASE("reflectance times shading reproduces the input") {
  const Scene scene = small_scene("noisy", 1);
  const auto res = decompose(scene.radiance, PipelineConfig{});
  for (std::size_t k = 0; k < scene.radiance.samples().size(); ++k) {
    const double s = res.shading.samples()[k / 3];
    if (s >= 1e-3) CHECK(std::abs(res.reflectance.samples()[k] * s - scene.radiance.samples()[k]) < 1e-9);
  }
  CHECK(all_finite(res.shading.samples()));
  CHECK(all_finite(res.reflectance.samples()));
}

TEST_CASE("stages are timed in order") {
  const Scene scene = small_scene("mondrian", 2);
  const auto res = decompose(scene.radiance, PipelineConfig{});
  REQUIRE(res.timings.size() == 5);
  CHECK(res.timings[0].stage == "tv-init");
  CHECK(res.timings[3].stage == "retinex");
  CHECK(res.timings[4].stage == "coherence");
  CHECK(res.view_stats.size() == 9);
  CHECK_FALSE(res.intermediates.has_value());
}

TEST_CASE("intermediates are consistent") {
  const Scene scene = small_scene("mondrian", 3);
  PipelineConfig cfg;
  cfg.keep_intermediates = true;
  const auto res = decompose(scene.radiance, cfg);
  REQUIRE(res.intermediates.has_value());
  const Intermediates& im = *res.intermediates;
  CHECK(im.cues.size() == 9);
  for (std::size_t k = 0; k < im.s0.samples().size(); ++k) {
    const double s0 = im.s0.samples()[k];
    for (int c = 0; c < 3; ++c)
      if (s0 >= 1e-3) CHECK(im.r0.samples()[3 * k + c] * s0 == doctest::Approx(im.filtered.samples()[3 * k + c]));
    // S_f = max(S0, eps_log) / max(R~1, eps_div)
    const double sf = std::max(s0, cfg.eps_log) / std::max(im.r1_filtered.samples()[k], cfg.eps_div);
    CHECK(res.shading.samples()[k] == doctest::Approx(sf).epsilon(1e-12));
  }
}

TEST_CASE("zero-disparity input gives identical views of the shading") {
  const Scene scene = small_scene("mondrian", 4);
  const auto res = decompose(scene.radiance, PipelineConfig{});
  const auto ref = res.shading.view_span(1, 1);
  for (int v = 0; v < 3; ++v)
    for (int u = 0; u < 3; ++u) {
      const auto other = res.shading.view_span(u, v);
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(other[k] - ref[k]) < 1e-6);
    }
}

TEST_CASE("coherence pass does not reduce angular coherence") {
  const Scene scene = small_scene("noisy", 5);
  PipelineConfig cfg;
  cfg.keep_intermediates = true;
  const auto res = decompose(scene.radiance, cfg);
  CHECK(angular_coherence_score(res.shading, 1.0) <= angular_coherence_score(res.intermediates->s1, 1.0));
}

TEST_CASE("occlusion cue helps on the two-layer scene") {
  const Scene scene = small_scene("two-layer", 6);
  DepthInput depth{scene.truth.depth, scene.disparity};
  DecomposeOptions with_depth;
  with_depth.depth = &depth;
  PipelineConfig off;
  off.use_occlusion = false;
  const double on_err = si_mse(decompose(scene.radiance, PipelineConfig{}, with_depth).shading.samples(),
                               scene.truth.shading.samples());
  const double off_err = si_mse(decompose(scene.radiance, off, with_depth).shading.samples(),
                                scene.truth.shading.samples());
  CHECK(on_err < off_err);
}

TEST_CASE("central depth is warped to the other views") {
  const Scene scene = small_scene("two-layer", 7);
  const Dims& d = scene.radiance.dims();
  std::vector<std::string> warnings;
  const auto maps = depth_per_view({{scene.truth.depth[d.view_index(1, 1)]}, 1.0}, d, warnings);
  REQUIRE(maps.size() == 9);
  CHECK(warnings.empty());
  const DepthMap& left = maps[d.view_index(0, 1)];
  const DepthMap& truth = scene.truth.depth[d.view_index(0, 1)];
  int agree = 0, total = 0;
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      if (!left.is_valid(x, y)) continue;
      ++total;
      agree += left.at(x, y) == truth.at(x, y);
    }
  CHECK(agree >= total * 9 / 10);

  const auto broadcast = depth_per_view({{scene.truth.depth[d.view_index(1, 1)]}, std::nullopt}, d, warnings);
  CHECK(broadcast.size() == 9);
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("albedo override replaces the computed cue") {
  const Scene scene = small_scene("mondrian", 8);
  PipelineConfig cfg;
  cfg.keep_intermediates = true;
  DecomposeOptions opts;
  opts.albedo_override = &scene.truth.albedo_edges;
  const auto res = decompose(scene.radiance, cfg, opts);
  CHECK(res.intermediates->cues[0].omega_a == scene.truth.albedo_edges[0]);

  std::vector<EdgeRaster> wrong(2, EdgeRaster(32, 32, 1.0));
  opts.albedo_override = &wrong;
  CHECK_THROWS_AS(decompose(scene.radiance, cfg, opts), Error);
}

TEST_CASE("invalid input and configuration") {
  LightField bad(Dims{2, 2, 8, 8}, 0.5);
  bad.at(1, 1, 3, 3, 0) = std::nan("");
  try {
    decompose(bad, PipelineConfig{});
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
  PipelineConfig cfg;
  cfg.eps_div = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("all-black input is degenerate but finite") {
  const LightField black(Dims{2, 2, 8, 8}, 0.0);
  const auto res = decompose(black, PipelineConfig{});
  CHECK(all_finite(res.shading.samples()));
  CHECK(all_finite(res.reflectance.samples()));
  for (const auto& s : res.view_stats) CHECK(s.degenerate);
}

TEST_CASE("literal l1 switch") {
  PipelineConfig cfg;
  cfg.set_literal_l1(true);
  CHECK(cfg.init_tv.form == TvForm::LiteralL1);
  CHECK(cfg.coherence_tv.form == TvForm::LiteralL1);
  const Scene scene = small_scene("mondrian", 9);
  CHECK_NOTHROW(decompose(scene.radiance, cfg));
}

TEST_CASE("alternative channel reductions run") {
  const Scene scene = small_scene("mondrian", 10);
  for (auto mode : {ChannelReduction::Mean, ChannelReduction::Luminance}) {
    PipelineConfig cfg;
    cfg.reduction = mode;
    const auto res = decompose(scene.radiance, cfg);
    CHECK(all_finite(res.shading.samples()));
  }
}
