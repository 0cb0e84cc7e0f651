#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lfi/cues.hpp"
#include "lfi/light_field.hpp"
#include "lfi/retinex.hpp"
#include "lfi/tv_solver.hpp"

namespace lfi {

struct PipelineConfig {
  TvParams init_tv;
  TvParams coherence_tv;
  CueParams cues;
  RetinexWeights lambdas;
  RetinexParams retinex;
  ChannelReduction reduction = ChannelReduction::L2Norm;
  double eps_log = 1e-4;
  double eps_div = 1e-3;
  bool use_occlusion = true;
  bool keep_intermediates = false;

  void validate() const;
  // Switches both TV passes to the elementwise l1 form.
  void set_literal_l1(bool enabled);
};

// Per-view depth maps, or a single central-view map that is warped with
// `disparity` (or broadcast unwarped when no disparity is known).
struct DepthInput {
  std::vector<DepthMap> maps;
  std::optional<double> disparity;
};

struct DecomposeOptions {
  const DepthInput* depth = nullptr;
  // Replaces the computed omega^a per view (e.g. ground-truth albedo edges).
  const std::vector<EdgeRaster>* albedo_override = nullptr;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct ViewSolveStats {
  int u = 0;
  int v = 0;
  int iterations = 0;
  double relative_residual = 0.0;
  bool degenerate = false;
};

struct Intermediates {
  LightField filtered;        // L~
  ScalarLightField s0;        // ||L~||
  LightField r0;              // L~ / S0
  ScalarLightField s1;
  ScalarLightField r1;
  ScalarLightField r1_filtered;
  std::vector<ViewCues> cues;  // one per view
  TvDiagnostics init_tv;
  TvDiagnostics coherence_tv;
};

struct DecompositionResult {
  LightField reflectance;     // R_f
  ScalarLightField shading;   // S_f
  std::optional<Intermediates> intermediates;
  std::vector<StageTiming> timings;
  std::vector<ViewSolveStats> view_stats;
  std::vector<std::string> warnings;
  long peak_rss_kb = 0;
};

DecompositionResult decompose(const LightField& radiance, const PipelineConfig& cfg,
                              const DecomposeOptions& options = {});

struct CoherenceResult {
  ScalarLightField r1_filtered;
  ScalarLightField shading;
  LightField reflectance;
  TvDiagnostics diagnostics;
};

// R~1 = TV(R1); S_f = ||L~|| / R~1; R_f = L / S_f.
CoherenceResult global_coherence(const ScalarLightField& r1, const ScalarLightField& filtered_norm,
                                 const LightField& radiance, const PipelineConfig& cfg);

// One depth map per view from a DepthInput; appends to `warnings`.
std::vector<DepthMap> depth_per_view(const DepthInput& depth, const Dims& dims,
                                     std::vector<std::string>& warnings);

// Mean over central-view rays of the variance of the samples along the
// reprojected ray across all views (bilinear; rays leaving a view are skipped).
double angular_coherence_score(const ScalarLightField& field, double disparity);

// Peak resident set size of this process in KiB (0 if unavailable).
long peak_rss_kb();

}  // namespace lfi
