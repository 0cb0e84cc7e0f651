#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfi/cues.hpp"
#include "lfi/light_field.hpp"

namespace lfi {

using Rgb = std::array<double, 3>;

enum class ShadingModel { LinearRamp, Radial, ProductRamps };

// Foreground rectangle (central-view pixel coordinates) composited over the
// background with its own disparity, albedo pattern and shading.
struct Occluder {
  int x0 = 0;
  int y0 = 0;
  int width = 1;
  int height = 1;
  double disparity = 1.0;
  double shading_scale = 0.6;
  int patches_x = 2;
  int patches_y = 2;
};

struct SceneSpec {
  Dims dims{3, 3, 64, 64};
  int patches_x = 4;
  int patches_y = 4;
  std::vector<Rgb> palette;  // empty: default palette
  ShadingModel shading = ShadingModel::LinearRamp;
  double shading_min = 0.35;
  double shading_max = 1.0;
  double disparity = 0.0;
  std::optional<Occluder> occluder;
  double noise = 0.0;  // uniform in [-noise, noise]

  void validate() const;
};

struct GroundTruth {
  LightField reflectance;
  ScalarLightField shading;
  std::vector<DepthMap> depth;  // one per view, normalized
  std::vector<EdgeRaster> occlusion_edges;  // 0 across a depth discontinuity, else 1
  std::vector<EdgeRaster> albedo_edges;     // 0 where reflectance changes, else 1
};

struct Scene {
  LightField radiance;
  GroundTruth truth;
  double disparity = 0.0;  // background disparity, used for coherence scoring
};

const std::vector<Rgb>& default_palette();

// Views are disparity-shifted renderings of planar layers: a scene point at
// central-view position p appears in view (u, v) at p + d * (u - u_c, v - v_c).
Scene generate(const SceneSpec& spec, std::uint64_t seed);

// Named presets: "mondrian", "noisy", "two-layer", "flat".
SceneSpec preset(const std::string& name);

// 0 on edges whose endpoints differ in reflectance by more than tol.
EdgeRaster albedo_edges_from_reflectance(const Image& reflectance_view, double tol = 1e-9);

// min over alpha of mean((alpha * pred - gt)^2).
double si_mse(std::span<const double> pred, std::span<const double> gt);

// RMSE between log(pred) and log(gt) after removing the mean difference.
double mean_aligned_log_rmse(std::span<const double> pred, std::span<const double> gt);

}  // namespace lfi
