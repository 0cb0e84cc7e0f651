#include "lfi/light_field.hpp"

#include <cmath>

#include "lfi/color.hpp"

namespace lfi {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Index: return "index error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Solver: return "solver error";
  }
  return "error";
}

void check_dims(const Dims& d) {
  if (d.n_u < 1 || d.n_v < 1 || d.width < 1 || d.height < 1) {
    fail(ErrorKind::Shape, "light field dimensions must all be >= 1");
  }
}

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || channels < 1) {
    fail(ErrorKind::Shape, "image dimensions must be >= 1");
  }
  data_.assign(std::size_t(width) * height * channels, fill);
}

Image view(const LightField& lf, int u, int v) { return lf.view(u, v); }

LightField assemble(const Dims& dims, std::span<const Image> views) {
  if (views.size() != dims.views()) {
    fail(ErrorKind::Shape, "assemble: expected " + std::to_string(dims.views()) +
                               " views, got " + std::to_string(views.size()));
  }
  LightField lf(dims);
  for (int v = 0; v < dims.n_v; ++v) {
    for (int u = 0; u < dims.n_u; ++u) {
      lf.set_view(u, v, views[dims.view_index(u, v)]);
    }
  }
  return lf;
}

namespace {

template <int C>
EpiSlice epi_h(const BasicLightField<C>& lf, int y, int v) {
  const Dims& d = lf.dims();
  if (y < 0 || y >= d.height || v < 0 || v >= d.n_v) {
    fail(ErrorKind::Index, "epi_horizontal: (y, v) out of range");
  }
  EpiSlice out(d.width, d.n_u, C);
  for (int u = 0; u < d.n_u; ++u) {
    for (int x = 0; x < d.width; ++x) {
      for (int c = 0; c < C; ++c) out.at(x, u, c) = lf.at(u, v, x, y, c);
    }
  }
  return out;
}

}  // namespace

EpiSlice epi_horizontal(const LightField& lf, int y, int v) { return epi_h(lf, y, v); }
EpiSlice epi_horizontal(const ScalarLightField& lf, int y, int v) { return epi_h(lf, y, v); }

EpiSlice epi_vertical(const LightField& lf, int x, int u) {
  const Dims& d = lf.dims();
  if (x < 0 || x >= d.width || u < 0 || u >= d.n_u) {
    fail(ErrorKind::Index, "epi_vertical: (x, u) out of range");
  }
  EpiSlice out(d.height, d.n_v, 3);
  for (int v = 0; v < d.n_v; ++v) {
    for (int y = 0; y < d.height; ++y) {
      for (int c = 0; c < 3; ++c) out.at(y, v, c) = lf.at(u, v, x, y, c);
    }
  }
  return out;
}

ScalarLightField per_ray_l2_norm(const LightField& lf) {
  return reduce_channels(lf, ChannelReduction::L2Norm);
}

ScalarLightField reduce_channels(const LightField& lf, ChannelReduction mode) {
  ScalarLightField out(lf.dims());
  auto src = lf.samples();
  auto dst = out.samples();
  const auto n = static_cast<long>(dst.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const double r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    switch (mode) {
      case ChannelReduction::L2Norm:
        dst[i] = std::sqrt(r * r + g * g + b * b);
        break;
      case ChannelReduction::Mean:
        dst[i] = (r + g + b) / 3.0;
        break;
      case ChannelReduction::Luminance:
        dst[i] = linear_rgb_to_lab(r, g, b).l / 100.0;
        break;
    }
  }
  return out;
}

LightField divide_by_scalar_field(const LightField& lf, const ScalarLightField& s,
                                  double eps_div) {
  if (!(lf.dims() == s.dims())) {
    fail(ErrorKind::Shape, "divide_by_scalar_field: dimension mismatch");
  }
  if (!(eps_div > 0.0)) fail(ErrorKind::Validation, "eps_div must be > 0");
  LightField out(lf.dims());
  auto src = lf.samples();
  auto den = s.samples();
  auto dst = out.samples();
  const auto n = static_cast<long>(den.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const double d = std::max(den[i], eps_div);
    for (int c = 0; c < 3; ++c) dst[3 * i + c] = src[3 * i + c] / d;
  }
  return out;
}

ScalarLightField divide_by_scalar_field(const ScalarLightField& num,
                                        const ScalarLightField& s, double eps_div) {
  if (!(num.dims() == s.dims())) {
    fail(ErrorKind::Shape, "divide_by_scalar_field: dimension mismatch");
  }
  if (!(eps_div > 0.0)) fail(ErrorKind::Validation, "eps_div must be > 0");
  ScalarLightField out(num.dims());
  auto a = num.samples();
  auto b = s.samples();
  auto dst = out.samples();
  const auto n = static_cast<long>(dst.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) dst[i] = a[i] / std::max(b[i], eps_div);
  return out;
}

LightField multiply_by_scalar_field(const LightField& lf, const ScalarLightField& s) {
  if (!(lf.dims() == s.dims())) {
    fail(ErrorKind::Shape, "multiply_by_scalar_field: dimension mismatch");
  }
  LightField out(lf.dims());
  auto src = lf.samples();
  auto f = s.samples();
  auto dst = out.samples();
  const auto n = static_cast<long>(f.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) dst[3 * i + c] = src[3 * i + c] * f[i];
  }
  return out;
}

LogView to_log(const Image& img, double eps_log) {
  if (img.channels() != 1) fail(ErrorKind::Shape, "to_log: expected one channel");
  if (!(eps_log > 0.0)) fail(ErrorKind::Validation, "eps_log must be > 0");
  LogView out{Image(img.width(), img.height(), 1), eps_log};
  auto src = img.data();
  auto dst = out.values.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::log(std::max(src[i], eps_log));
  return out;
}

Image from_log(const LogView& lv) {
  Image out(lv.values.width(), lv.values.height(), 1);
  auto src = lv.values.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(src[i]);
  return out;
}

bool all_finite(std::span<const double> values) {
  for (double x : values) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void validate_radiance(const LightField& lf) {
  for (double x : lf.samples()) {
    if (!std::isfinite(x) || x < 0.0) {
      fail(ErrorKind::Validation, "light field samples must be finite and >= 0");
    }
  }
}

}  // namespace lfi
