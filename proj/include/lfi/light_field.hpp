#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lfi/error.hpp"

namespace lfi {

// Angular (n_u x n_v) and spatial (width x height) resolution of a light field.
struct Dims {
  int n_u = 1;
  int n_v = 1;
  int width = 1;
  int height = 1;

  std::size_t views() const { return std::size_t(n_u) * std::size_t(n_v); }
  std::size_t pixels() const { return std::size_t(width) * std::size_t(height); }
  std::size_t rays() const { return views() * pixels(); }
  std::size_t view_index(int u, int v) const { return std::size_t(v) * n_u + u; }
  int center_u() const { return n_u / 2; }
  int center_v() const { return n_v / 2; }

  bool operator==(const Dims&) const = default;
};

void check_dims(const Dims& dims);

// 2D raster with interleaved channels, row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixels() const { return std::size_t(width_) * height_; }

  double& at(int x, int y, int c = 0) {
    return data_[(std::size_t(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c = 0) const {
    return data_[(std::size_t(y) * width_ + x) * channels_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Single-channel natural-log raster; values are >= log(eps_log).
struct LogView {
  Image values;
  double eps_log = 1e-4;
};

// Horizontal EPI: width x n_u, row u holds scanline y of view (u, v).
// Vertical EPI: height x n_v, row v holds column x of view (u, v).
using EpiSlice = Image;

// Samples are stored view-major: ((v * n_u + u) * height + y) * width + x,
// channels interleaved, so each view is one contiguous block.
template <int Channels>
class BasicLightField {
 public:
  static constexpr int kChannels = Channels;

  BasicLightField() = default;
  explicit BasicLightField(const Dims& dims, double fill = 0.0)
      : dims_(dims) {
    check_dims(dims);
    samples_.assign(dims.rays() * Channels, fill);
  }

  const Dims& dims() const { return dims_; }
  bool empty() const { return samples_.empty(); }

  std::size_t offset(int u, int v, int x, int y) const {
    return ((dims_.view_index(u, v) * dims_.height + y) * dims_.width + x) *
           Channels;
  }
  double& at(int u, int v, int x, int y, int c = 0) {
    return samples_[offset(u, v, x, y) + c];
  }
  double at(int u, int v, int x, int y, int c = 0) const {
    return samples_[offset(u, v, x, y) + c];
  }

  std::span<double> samples() { return samples_; }
  std::span<const double> samples() const { return samples_; }

  std::span<double> view_span(int u, int v) {
    check_view_index(u, v);
    return std::span<double>(samples_).subspan(offset(u, v, 0, 0),
                                               dims_.pixels() * Channels);
  }
  std::span<const double> view_span(int u, int v) const {
    check_view_index(u, v);
    return std::span<const double>(samples_).subspan(
        offset(u, v, 0, 0), dims_.pixels() * Channels);
  }

  Image view(int u, int v) const {
    auto src = view_span(u, v);
    Image out(dims_.width, dims_.height, Channels);
    std::copy(src.begin(), src.end(), out.data().begin());
    return out;
  }

  void set_view(int u, int v, const Image& img) {
    if (img.width() != dims_.width || img.height() != dims_.height ||
        img.channels() != Channels) {
      fail(ErrorKind::Shape, "set_view: image shape does not match light field");
    }
    auto dst = view_span(u, v);
    std::copy(img.data().begin(), img.data().end(), dst.begin());
  }

  void check_view_index(int u, int v) const {
    if (u < 0 || v < 0 || u >= dims_.n_u || v >= dims_.n_v) {
      fail(ErrorKind::Index, "view index (" + std::to_string(u) + ", " +
                                 std::to_string(v) + ") out of range");
    }
  }

 private:
  Dims dims_;
  std::vector<double> samples_;
};

using LightField = BasicLightField<3>;
using ScalarLightField = BasicLightField<1>;

// Collapses RGB to the single channel used as S0 and as the Retinex input.
enum class ChannelReduction { L2Norm, Mean, Luminance };

Image view(const LightField& lf, int u, int v);
LightField assemble(const Dims& dims, std::span<const Image> views);

EpiSlice epi_horizontal(const LightField& lf, int y, int v);
EpiSlice epi_vertical(const LightField& lf, int x, int u);
EpiSlice epi_horizontal(const ScalarLightField& lf, int y, int v);

ScalarLightField per_ray_l2_norm(const LightField& lf);
ScalarLightField reduce_channels(const LightField& lf, ChannelReduction mode);

// out = lf / max(s, eps_div) per channel.
LightField divide_by_scalar_field(const LightField& lf,
                                  const ScalarLightField& s, double eps_div);
ScalarLightField divide_by_scalar_field(const ScalarLightField& num,
                                        const ScalarLightField& s,
                                        double eps_div);
LightField multiply_by_scalar_field(const LightField& lf,
                                    const ScalarLightField& s);

LogView to_log(const Image& single_channel, double eps_log);
Image from_log(const LogView& log_view);

// Throws Validation unless every sample is finite and non-negative.
void validate_radiance(const LightField& lf);
bool all_finite(std::span<const double> values);

}  // namespace lfi
