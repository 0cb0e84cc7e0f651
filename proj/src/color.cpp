#include "lfi/color.hpp"

#include <cmath>

namespace lfi {

namespace {

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  if (t > delta * delta * delta) return std::cbrt(t);
  return t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

double srgb_to_linear(double c) {
  if (c <= 0.04045) return c / 12.92;
  return std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
  if (c <= 0.0031308) return 12.92 * c;
  return 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double luminance(double r, double g, double b) {
  return 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
}

Lab linear_rgb_to_lab(double r, double g, double b, const WhitePoint& white) {
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = luminance(r, g, b);
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

  const double fx = lab_f(x / white.x);
  const double fy = lab_f(y / white.y);
  const double fz = lab_f(z / white.z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Image rgb_to_cielab(const Image& rgb, const WhitePoint& white) {
  if (rgb.channels() != 3) {
    fail(ErrorKind::Shape, "rgb_to_cielab: expected a 3-channel image");
  }
  Image out(rgb.width(), rgb.height(), 3);
  auto src = rgb.data();
  auto dst = out.data();
  const auto n = static_cast<long>(rgb.pixels());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const Lab lab = linear_rgb_to_lab(src[3 * i], src[3 * i + 1], src[3 * i + 2], white);
    dst[3 * i] = lab.l;
    dst[3 * i + 1] = lab.a;
    dst[3 * i + 2] = lab.b;
  }
  return out;
}

}  // namespace lfi
