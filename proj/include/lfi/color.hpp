#pragma once

#include "lfi/light_field.hpp"

namespace lfi {

// CIE XYZ tristimulus of the reference white, Y normalized to 1.
struct WhitePoint {
  double x = 0.95047;
  double y = 1.0;
  double z = 1.08883;
};

inline constexpr WhitePoint kD65{};

struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

double srgb_to_linear(double encoded);
double linear_to_srgb(double linear);

// Linear RGB with sRGB primaries -> CIELab relative to `white`.
Lab linear_rgb_to_lab(double r, double g, double b, const WhitePoint& white = kD65);

// 3-channel linear RGB raster -> 3-channel (L*, a*, b*) raster.
Image rgb_to_cielab(const Image& rgb, const WhitePoint& white = kD65);

double luminance(double r, double g, double b);

}  // namespace lfi
