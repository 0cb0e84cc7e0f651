#pragma once

#include <cstdint>
#include <vector>

#include "lfi/color.hpp"
#include "lfi/light_field.hpp"

namespace lfi {

// Weights on the 4-connected edges of one view. Horizontal edge (x, y) joins
// pixels (x, y) and (x + 1, y); vertical edge (x, y) joins (x, y) and (x, y + 1).
struct EdgeRaster {
  int width = 0;
  int height = 0;
  std::vector<double> horizontal;  // (width - 1) * height
  std::vector<double> vertical;    // width * (height - 1)

  EdgeRaster() = default;
  EdgeRaster(int width, int height, double fill);

  double& h(int x, int y) { return horizontal[std::size_t(y) * (width - 1) + x]; }
  double h(int x, int y) const { return horizontal[std::size_t(y) * (width - 1) + x]; }
  double& v(int x, int y) { return vertical[std::size_t(y) * width + x]; }
  double v(int x, int y) const { return vertical[std::size_t(y) * width + x]; }

  bool operator==(const EdgeRaster&) const = default;
};

struct EdgeWeightMap {
  EdgeRaster albedo;     // omega^a in {0, 1}
  EdgeRaster occlusion;  // omega^occ in {occ_weight, 1}
};

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // normalized to [0, 1] where valid
  std::vector<std::uint8_t> valid;

  double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
  bool is_valid(int x, int y) const { return valid[std::size_t(y) * width + x] != 0; }
  std::size_t invalid_count() const;
};

// Squared CIELab distances to the white/black references and the derived
// probabilities p = exp(-d / d_max).
struct BwMaps {
  Image d_white;
  Image d_black;
  Image p_white;
  Image p_black;
  double d_max = 0.0;
};

struct BwLabels {
  EdgeRaster white;  // g^w
  EdgeRaster black;  // g^b
};

enum class Combinator { Min, Max };

struct CueParams {
  double angle_thresh = 0.04;
  double tau1 = 0.85;
  double tau2 = 0.05;
  double depth_thresh = 0.02;
  double occ_weight = 0.01;
  // Below this reflectance norm the RGB angle is not used.
  double dark_norm = 1e-3;
  Combinator combinator = Combinator::Min;
  WhitePoint white_point = kD65;
  Lab white_ref{100.0, 0.0, 0.0};
  Lab black_ref{0.0, 0.0, 0.0};

  void validate() const;
};

// Angle between two RGB vectors, atan2(|a x b|, a . b).
double rgb_angle(const double* a, const double* b);

inline bool angle_marks_albedo(double angle, double angle_thresh) { return angle > angle_thresh; }

EdgeRaster albedo_angle_weights(const Image& r0_view, double angle_thresh, double dark_norm = 1e-3);

BwMaps bw_probabilities(const Image& lab_view, const Lab& white_ref, const Lab& black_ref);

BwLabels bw_gradient_labels(const BwMaps& maps, double tau1, double tau2);

EdgeRaster combine_albedo(const EdgeRaster& omega_color, const EdgeRaster& g_white,
                          const EdgeRaster& g_black, Combinator combinator);

EdgeRaster occlusion_weights(const DepthMap& depth, int width, int height, double depth_thresh,
                             double occ_weight);

// Every cue map of one view, kept for diagnostics.
struct ViewCues {
  EdgeRaster omega_color;
  BwMaps bw;
  BwLabels labels;
  EdgeRaster omega_a;
  EdgeRaster omega_occ;
};

// filtered_view: RGB view of the TV-filtered light field; r0_view: initial
// reflectance. depth may be null, in which case omega^occ is all ones.
ViewCues compute_view_cues(const Image& filtered_view, const Image& r0_view, const DepthMap* depth,
                           const CueParams& params);

// Pixel value = minimum over the edges leaving the pixel forward (x+1, y+1);
// used for the grayscale cue-map dumps.
Image edge_raster_to_image(const EdgeRaster& edges);

}  // namespace lfi
