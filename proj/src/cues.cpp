#include "lfi/cues.hpp"

#include <algorithm>
#include <cmath>

namespace lfi {

EdgeRaster::EdgeRaster(int w, int hgt, double fill) : width(w), height(hgt) {
  if (w < 1 || hgt < 1) fail(ErrorKind::Shape, "edge raster dimensions must be >= 1");
  horizontal.assign(std::size_t(w - 1) * hgt, fill);
  vertical.assign(std::size_t(w) * (hgt - 1), fill);
}

std::size_t DepthMap::invalid_count() const {
  return std::size_t(std::count(valid.begin(), valid.end(), std::uint8_t{0}));
}

void CueParams::validate() const {
  if (!(angle_thresh > 0.0) || !(tau2 > 0.0) || !(depth_thresh > 0.0) || !(occ_weight > 0.0)) {
    fail(ErrorKind::Config, "cue thresholds must be positive");
  }
  if (!(tau1 > 0.0 && tau1 < 1.0)) fail(ErrorKind::Config, "tau1 must lie in (0, 1)");
}

double rgb_angle(const double* a, const double* b) {
  const double cx = a[1] * b[2] - a[2] * b[1];
  const double cy = a[2] * b[0] - a[0] * b[2];
  const double cz = a[0] * b[1] - a[1] * b[0];
  const double cross = std::sqrt(cx * cx + cy * cy + cz * cz);
  const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  return std::atan2(cross, dot);
}

namespace {

double norm3(const double* p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

// Applies edge_fn(i, j) to every 4-connected edge, i and j being flat pixel indices.
template <typename Fn>
EdgeRaster map_edges(int w, int h, Fn&& edge_fn) {
  EdgeRaster out(w, h, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      out.h(x, y) = edge_fn(i, i + 1);
    }
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = std::size_t(y) * w + x;
      out.v(x, y) = edge_fn(i, i + w);
    }
  }
  return out;
}

double lab_dist2(const double* p, const Lab& ref) {
  const double dl = p[0] - ref.l, da = p[1] - ref.a, db = p[2] - ref.b;
  return dl * dl + da * da + db * db;
}

}  // namespace

EdgeRaster albedo_angle_weights(const Image& r0, double angle_thresh, double dark_norm) {
  if (r0.channels() != 3) fail(ErrorKind::Shape, "albedo_angle_weights: expected RGB view");
  auto px = r0.data();
  return map_edges(r0.width(), r0.height(), [&](std::size_t i, std::size_t j) {
    const double* a = &px[3 * i];
    const double* b = &px[3 * j];
    if (norm3(a) < dark_norm || norm3(b) < dark_norm) return 1.0;
    return angle_marks_albedo(rgb_angle(a, b), angle_thresh) ? 0.0 : 1.0;
  });
}

BwMaps bw_probabilities(const Image& lab, const Lab& white_ref, const Lab& black_ref) {
  if (lab.channels() != 3) fail(ErrorKind::Shape, "bw_probabilities: expected Lab view");
  BwMaps m;
  m.d_max = (white_ref.l - black_ref.l) * (white_ref.l - black_ref.l) +
            (white_ref.a - black_ref.a) * (white_ref.a - black_ref.a) +
            (white_ref.b - black_ref.b) * (white_ref.b - black_ref.b);
  if (!(m.d_max > 0.0)) fail(ErrorKind::Config, "white and black references coincide");
  const int w = lab.width(), h = lab.height();
  m.d_white = Image(w, h, 1);
  m.d_black = Image(w, h, 1);
  m.p_white = Image(w, h, 1);
  m.p_black = Image(w, h, 1);
  auto src = lab.data();
  for (std::size_t i = 0; i < lab.pixels(); ++i) {
    const double dw = lab_dist2(&src[3 * i], white_ref);
    const double db = lab_dist2(&src[3 * i], black_ref);
    m.d_white.data()[i] = dw;
    m.d_black.data()[i] = db;
    m.p_white.data()[i] = std::exp(-dw / m.d_max);
    m.p_black.data()[i] = std::exp(-db / m.d_max);
  }
  return m;
}

BwLabels bw_gradient_labels(const BwMaps& m, double tau1, double tau2) {
  const int w = m.p_white.width(), h = m.p_white.height();
  auto label = [&](const Image& p, const Image& d) {
    auto pv = p.data();
    auto dv = d.data();
    return map_edges(w, h, [&](std::size_t i, std::size_t j) {
      const bool likely = pv[i] >= tau1 || pv[j] >= tau1;
      const bool real_gradient = std::abs(dv[i] - dv[j]) / m.d_max > tau2;
      return likely && real_gradient ? 0.0 : 1.0;
    });
  };
  return {label(m.p_white, m.d_white), label(m.p_black, m.d_black)};
}

EdgeRaster combine_albedo(const EdgeRaster& color, const EdgeRaster& gw, const EdgeRaster& gb,
                          Combinator combinator) {
  if (color.width != gw.width || color.height != gw.height || color.width != gb.width ||
      color.height != gb.height) {
    fail(ErrorKind::Shape, "combine_albedo: edge grids differ");
  }
  EdgeRaster out = color;
  auto merge = [&](std::vector<double>& dst, const std::vector<double>& a,
                   const std::vector<double>& b) {
    for (std::size_t k = 0; k < dst.size(); ++k) {
      dst[k] = combinator == Combinator::Min ? std::min({dst[k], a[k], b[k]})
                                             : std::max({dst[k], a[k], b[k]});
    }
  };
  merge(out.horizontal, gw.horizontal, gb.horizontal);
  merge(out.vertical, gw.vertical, gb.vertical);
  return out;
}

EdgeRaster occlusion_weights(const DepthMap& depth, int w, int h, double depth_thresh,
                             double occ_weight) {
  if (depth.width != w || depth.height != h) {
    fail(ErrorKind::Shape, "occlusion_weights: depth map is " + std::to_string(depth.width) + "x" +
                               std::to_string(depth.height) + ", view is " + std::to_string(w) +
                               "x" + std::to_string(h));
  }
  return map_edges(w, h, [&](std::size_t i, std::size_t j) {
    if (!depth.valid[i] || !depth.valid[j]) return 1.0;
    return std::abs(depth.values[i] - depth.values[j]) > depth_thresh ? occ_weight : 1.0;
  });
}

ViewCues compute_view_cues(const Image& filtered_view, const Image& r0_view, const DepthMap* depth,
                           const CueParams& p) {
  ViewCues cues;
  cues.omega_color = albedo_angle_weights(r0_view, p.angle_thresh, p.dark_norm);
  cues.bw = bw_probabilities(rgb_to_cielab(filtered_view, p.white_point), p.white_ref, p.black_ref);
  cues.labels = bw_gradient_labels(cues.bw, p.tau1, p.tau2);
  cues.omega_a = combine_albedo(cues.omega_color, cues.labels.white, cues.labels.black, p.combinator);
  const int w = filtered_view.width(), h = filtered_view.height();
  cues.omega_occ = depth ? occlusion_weights(*depth, w, h, p.depth_thresh, p.occ_weight)
                         : EdgeRaster(w, h, 1.0);
  return cues;
}

Image edge_raster_to_image(const EdgeRaster& e) {
  Image out(e.width, e.height, 1, 1.0);
  for (int y = 0; y < e.height; ++y) {
    for (int x = 0; x < e.width; ++x) {
      double m = 1.0;
      if (x + 1 < e.width) m = std::min(m, e.h(x, y));
      if (y + 1 < e.height) m = std::min(m, e.v(x, y));
      out.at(x, y) = m;
    }
  }
  return out;
}

}  // namespace lfi
