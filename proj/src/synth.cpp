#include "lfi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lfi {

void SceneSpec::validate() const {
  check_dims(dims);
  if (patches_x < 1 || patches_y < 1) fail(ErrorKind::Validation, "synth: patch counts must be >= 1");
  for (const Rgb& c : palette) {
    for (double x : c) {
      if (!(x > 0.0 && x <= 1.0)) fail(ErrorKind::Validation, "synth: albedo must lie in (0, 1]");
    }
  }
  if (!(shading_min > 0.0 && shading_max <= 1.0 && shading_min <= shading_max)) {
    fail(ErrorKind::Validation, "synth: shading range must lie in (0, 1]");
  }
  if (disparity < 0.0 || noise < 0.0) fail(ErrorKind::Validation, "synth: disparity and noise must be >= 0");
  if (occluder) {
    const Occluder& o = *occluder;
    if (o.x0 < 0 || o.y0 < 0 || o.width < 1 || o.height < 1 || o.x0 + o.width > dims.width ||
        o.y0 + o.height > dims.height) {
      fail(ErrorKind::Validation, "synth: occluder rectangle lies outside the frame");
    }
    if (o.disparity < 0.0 || !(o.shading_scale > 0.0 && o.shading_scale <= 1.0)) {
      fail(ErrorKind::Validation, "synth: invalid occluder disparity or shading scale");
    }
    if (o.patches_x < 1 || o.patches_y < 1) fail(ErrorKind::Validation, "synth: occluder patch counts must be >= 1");
  }
}

const std::vector<Rgb>& default_palette() {
  static const std::vector<Rgb> palette = {
      {0.85, 0.25, 0.20}, {0.25, 0.70, 0.30}, {0.25, 0.35, 0.85}, {0.90, 0.80, 0.25},
      {0.75, 0.35, 0.80}, {0.30, 0.80, 0.80}, {0.95, 0.55, 0.25},
  };
  return palette;
}

namespace {

// A planar layer rendered on a padded canvas around the central frame.
struct Layer {
  int pad = 0;
  Image albedo;
  Image shading;

  void sample(double px, double py, double* rgb, double& s) const {
    const double cx = std::clamp(px + pad, 0.0, double(albedo.width() - 1));
    const double cy = std::clamp(py + pad, 0.0, double(albedo.height() - 1));
    const int x0 = std::min(int(cx), albedo.width() - 2);
    const int y0 = std::min(int(cy), albedo.height() - 2);
    const double fx = cx - x0, fy = cy - y0;
    const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy), w01 = (1 - fx) * fy, w11 = fx * fy;
    for (int c = 0; c < 3; ++c) {
      rgb[c] = w00 * albedo.at(x0, y0, c) + w10 * albedo.at(x0 + 1, y0, c) +
               w01 * albedo.at(x0, y0 + 1, c) + w11 * albedo.at(x0 + 1, y0 + 1, c);
    }
    s = w00 * shading.at(x0, y0) + w10 * shading.at(x0 + 1, y0) + w01 * shading.at(x0, y0 + 1) +
        w11 * shading.at(x0 + 1, y0 + 1);
  }
};

// Palette index per patch cell; neighbours differ whenever the palette allows.
std::vector<int> assign_patches(int nx, int ny, std::size_t palette_size, std::mt19937_64& rng) {
  std::vector<int> cells(std::size_t(nx) * ny, 0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const int left = x > 0 ? cells[std::size_t(y) * nx + x - 1] : -1;
      const int top = y > 0 ? cells[std::size_t(y - 1) * nx + x] : -1;
      int pick = int(rng() % palette_size);
      for (std::size_t tries = 0; tries < 4 * palette_size && palette_size > 2; ++tries) {
        if (pick != left && pick != top) break;
        pick = int(rng() % palette_size);
      }
      if (palette_size == 2 && pick == left) pick = 1 - pick;
      cells[std::size_t(y) * nx + x] = pick;
    }
  }
  return cells;
}

double shading_value(ShadingModel model, double px, double py, int w, int h, double lo, double hi,
                     bool reversed) {
  const double tx = w > 1 ? px / (w - 1) : 0.5;
  const double ty = h > 1 ? py / (h - 1) : 0.5;
  double t = 0.0;  // 0 -> lo, 1 -> hi
  switch (model) {
    case ShadingModel::LinearRamp:
      t = reversed ? 1.0 - tx : tx;
      break;
    case ShadingModel::Radial: {
      const double dx = tx - 0.5, dy = ty - 0.5;
      t = 1.0 - (dx * dx + dy * dy) / 0.5;
      break;
    }
    case ShadingModel::ProductRamps: {
      const double a = 0.5 + 0.5 * (reversed ? 1.0 - tx : tx);
      const double b = 1.0 - 0.5 * ty;
      t = (a * b - 0.25) / 0.75;
      break;
    }
  }
  return std::clamp(lo + (hi - lo) * t, 0.02, 1.0);
}

Layer make_layer(int pad, int w, int h, double origin_x, double origin_y, double patch_w,
                 double patch_h, const std::vector<Rgb>& palette, std::mt19937_64& rng,
                 ShadingModel model, double lo, double hi, double scale, bool reversed) {
  Layer layer;
  layer.pad = pad;
  const int cw = w + 2 * pad, ch = h + 2 * pad;
  layer.albedo = Image(cw, ch, 3);
  layer.shading = Image(cw, ch, 1);

  auto cell_of = [&](double p, double origin, double size) {
    return int(std::floor((p - origin) / size));
  };
  const int ix_min = cell_of(-pad, origin_x, patch_w), ix_max = cell_of(w + pad, origin_x, patch_w);
  const int iy_min = cell_of(-pad, origin_y, patch_h), iy_max = cell_of(h + pad, origin_y, patch_h);
  const int nx = ix_max - ix_min + 1, ny = iy_max - iy_min + 1;
  const auto cells = assign_patches(nx, ny, palette.size(), rng);

  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      const double px = cx - pad, py = cy - pad;
      const int ix = cell_of(px, origin_x, patch_w) - ix_min;
      const int iy = cell_of(py, origin_y, patch_h) - iy_min;
      const Rgb& color = palette[cells[std::size_t(iy) * nx + ix]];
      for (int c = 0; c < 3; ++c) layer.albedo.at(cx, cy, c) = color[c];
      layer.shading.at(cx, cy) = scale * shading_value(model, px, py, w, h, lo, hi, reversed);
    }
  }
  return layer;
}

double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Scene generate(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Dims& d = spec.dims;
  const std::vector<Rgb>& palette = spec.palette.empty() ? default_palette() : spec.palette;

  const int max_offset = std::max({d.center_u(), d.n_u - 1 - d.center_u(), d.center_v(),
                                   d.n_v - 1 - d.center_v()});
  const double max_disp = std::max(spec.disparity, spec.occluder ? spec.occluder->disparity : 0.0);
  const int pad = int(std::ceil(max_disp * max_offset)) + 2;

  std::mt19937_64 rng(seed);
  const Layer background =
      make_layer(pad, d.width, d.height, 0.0, 0.0, double(d.width) / spec.patches_x,
                 double(d.height) / spec.patches_y, palette, rng, spec.shading, spec.shading_min,
                 spec.shading_max, 1.0, false);
  std::optional<Layer> foreground;
  double depth_bg = 0.0, depth_fg = 0.0;
  if (spec.occluder) {
    const Occluder& o = *spec.occluder;
    foreground = make_layer(pad, d.width, d.height, o.x0, o.y0, double(o.width) / o.patches_x,
                            double(o.height) / o.patches_y, palette, rng, spec.shading,
                            spec.shading_min, spec.shading_max, o.shading_scale, true);
    const double lo = std::min(spec.disparity, o.disparity);
    const double hi = std::max(spec.disparity, o.disparity);
    if (hi > lo) {
      depth_bg = (hi - spec.disparity) / (hi - lo);
      depth_fg = (hi - o.disparity) / (hi - lo);
    }
  }

  Scene scene{LightField(d), {LightField(d), ScalarLightField(d), {}, {}, {}}, spec.disparity};
  GroundTruth& gt = scene.truth;
  gt.depth.resize(d.views());

  for (int v = 0; v < d.n_v; ++v) {
    for (int u = 0; u < d.n_u; ++u) {
      const double du = u - d.center_u(), dv = v - d.center_v();
      DepthMap& depth = gt.depth[d.view_index(u, v)];
      depth.width = d.width;
      depth.height = d.height;
      depth.values.assign(d.pixels(), depth_bg);
      depth.valid.assign(d.pixels(), 1);
      std::mt19937_64 noise_rng(seed ^ (0x9E3779B97F4A7C15ULL * (d.view_index(u, v) + 1)));

      for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
          double rgb[3];
          double s = 0.0;
          bool in_front = false;
          if (foreground) {
            const Occluder& o = *spec.occluder;
            const double fx = x - o.disparity * du, fy = y - o.disparity * dv;
            in_front = fx >= o.x0 - 0.5 && fx < o.x0 + o.width - 0.5 && fy >= o.y0 - 0.5 &&
                       fy < o.y0 + o.height - 0.5;
            if (in_front) {
              foreground->sample(fx, fy, rgb, s);
              depth.values[std::size_t(y) * d.width + x] = depth_fg;
            }
          }
          if (!in_front) background.sample(x - spec.disparity * du, y - spec.disparity * dv, rgb, s);

          gt.shading.at(u, v, x, y) = s;
          for (int c = 0; c < 3; ++c) {
            gt.reflectance.at(u, v, x, y, c) = rgb[c];
            double value = rgb[c] * s;
            if (spec.noise > 0.0) value += spec.noise * (2.0 * unit_uniform(noise_rng) - 1.0);
            scene.radiance.at(u, v, x, y, c) = std::clamp(value, 0.0, 1.0);
          }
        }
      }

      gt.albedo_edges.push_back(albedo_edges_from_reflectance(gt.reflectance.view(u, v)));
      EdgeRaster occ(d.width, d.height, 1.0);
      for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
          if (x + 1 < d.width && depth.at(x, y) != depth.at(x + 1, y)) occ.h(x, y) = 0.0;
          if (y + 1 < d.height && depth.at(x, y) != depth.at(x, y + 1)) occ.v(x, y) = 0.0;
        }
      }
      gt.occlusion_edges.push_back(std::move(occ));
    }
  }
  return scene;
}

SceneSpec preset(const std::string& name) {
  SceneSpec spec;
  if (name == "mondrian") return spec;
  if (name == "noisy") {
    spec.disparity = 1.0;
    spec.noise = 0.02;
    return spec;
  }
  if (name == "two-layer") {
    spec.occluder = Occluder{20, 20, 24, 24, 1.0, 0.55, 2, 2};
    return spec;
  }
  if (name == "flat") {
    spec.palette = {{0.5, 0.5, 0.5}};
    spec.shading_min = spec.shading_max = 1.0;
    return spec;
  }
  fail(ErrorKind::Config, "unknown scene preset '" + name + "'");
}

EdgeRaster albedo_edges_from_reflectance(const Image& r, double tol) {
  if (r.channels() != 3) fail(ErrorKind::Shape, "albedo_edges_from_reflectance: expected RGB");
  const int w = r.width(), h = r.height();
  auto differs = [&](int x0, int y0, int x1, int y1) {
    for (int c = 0; c < 3; ++c) {
      if (std::abs(r.at(x0, y0, c) - r.at(x1, y1, c)) > tol) return true;
    }
    return false;
  };
  EdgeRaster out(w, h, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w && differs(x, y, x + 1, y)) out.h(x, y) = 0.0;
      if (y + 1 < h && differs(x, y, x, y + 1)) out.v(x, y) = 0.0;
    }
  }
  return out;
}

double si_mse(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty()) fail(ErrorKind::Shape, "si_mse: size mismatch");
  double pg = 0.0, pp = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pg += pred[i] * gt[i];
    pp += pred[i] * pred[i];
  }
  const double alpha = pp > 0.0 ? pg / pp : 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = alpha * pred[i] - gt[i];
    err += e * e;
  }
  return err / double(pred.size());
}

double mean_aligned_log_rmse(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    fail(ErrorKind::Shape, "mean_aligned_log_rmse: size mismatch");
  }
  std::vector<double> diff(pred.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    diff[i] = std::log(std::max(pred[i], 1e-12)) - std::log(std::max(gt[i], 1e-12));
    mean += diff[i];
  }
  mean /= double(diff.size());
  double sq = 0.0;
  for (double x : diff) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / double(diff.size()));
}

}  // namespace lfi
