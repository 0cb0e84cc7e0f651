#include "lfi/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

namespace lfi {

void PipelineConfig::validate() const {
  init_tv.validate();
  coherence_tv.validate();
  cues.validate();
  lambdas.validate();
  retinex.validate();
  if (!(eps_log > 0.0) || !(eps_div > 0.0)) fail(ErrorKind::Config, "eps_log and eps_div must be > 0");
}

void PipelineConfig::set_literal_l1(bool enabled) {
  const TvForm form = enabled ? TvForm::LiteralL1 : TvForm::Gradient;
  init_tv.form = form;
  coherence_tv.form = form;
}

long peak_rss_kb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream in(line.substr(6));
      long kb = 0;
      in >> kb;
      return kb;
    }
  }
  return 0;
}

namespace {

class StageRunner {
 public:
  explicit StageRunner(std::vector<StageTiming>& timings) : timings_(timings) {}

  template <typename Fn>
  void run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const Error& e) {
      throw Error(e.kind(), "stage '" + name + "': " + e.what());
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    timings_.push_back({name, elapsed.count()});
  }

 private:
  std::vector<StageTiming>& timings_;
};

// Runs fn(u, v) for every view in parallel; rethrows the first failure in view order.
template <typename Fn>
void for_each_view(const Dims& d, Fn&& fn) {
  const long n = long(d.views());
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      fn(int(i % d.n_u), int(i / d.n_u));
    } catch (...) {
      errors[std::size_t(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void store_view(ScalarLightField& dst, int u, int v, const Image& img) { dst.set_view(u, v, img); }

}  // namespace

std::vector<DepthMap> depth_per_view(const DepthInput& depth, const Dims& d,
                                     std::vector<std::string>& warnings) {
  for (const DepthMap& m : depth.maps) {
    if (m.width != d.width || m.height != d.height) {
      fail(ErrorKind::Shape, "depth map dimensions do not match the light field views");
    }
  }
  if (depth.maps.size() == d.views()) return depth.maps;
  if (depth.maps.size() != 1) {
    fail(ErrorKind::Shape, "expected one depth map per view or a single central map, got " +
                               std::to_string(depth.maps.size()));
  }
  const DepthMap& central = depth.maps.front();
  if (!depth.disparity) {
    warnings.push_back("only a central depth map and no disparity given; broadcasting it unwarped");
    return std::vector<DepthMap>(d.views(), central);
  }
  const double disp = *depth.disparity;
  std::vector<DepthMap> out(d.views());
  for (int v = 0; v < d.n_v; ++v) {
    for (int u = 0; u < d.n_u; ++u) {
      DepthMap& m = out[d.view_index(u, v)];
      m.width = d.width;
      m.height = d.height;
      m.values.assign(d.pixels(), 0.0);
      m.valid.assign(d.pixels(), 0);
      for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
          const long cx = std::lround(x - disp * (u - d.center_u()));
          const long cy = std::lround(y - disp * (v - d.center_v()));
          if (cx < 0 || cy < 0 || cx >= d.width || cy >= d.height) continue;
          const std::size_t src = std::size_t(cy) * d.width + std::size_t(cx);
          const std::size_t dst = std::size_t(y) * d.width + x;
          m.values[dst] = central.values[src];
          m.valid[dst] = central.valid[src];
        }
      }
    }
  }
  return out;
}

CoherenceResult global_coherence(const ScalarLightField& r1, const ScalarLightField& filtered_norm,
                                 const LightField& radiance, const PipelineConfig& cfg) {
  if (!(r1.dims() == filtered_norm.dims()) || !(r1.dims() == radiance.dims())) {
    fail(ErrorKind::Shape, "global_coherence: dimension mismatch");
  }
  auto tv = tvl1_filter(r1, cfg.coherence_tv);
  CoherenceResult out{std::move(tv.field), ScalarLightField(r1.dims()), LightField(), tv.diagnostics};

  auto num = filtered_norm.samples();
  auto den = out.r1_filtered.samples();
  auto sf = out.shading.samples();
  const long n = long(sf.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) sf[i] = std::max(num[i], cfg.eps_log) / std::max(den[i], cfg.eps_div);
  out.reflectance = divide_by_scalar_field(radiance, out.shading, cfg.eps_div);
  return out;
}

DecompositionResult decompose(const LightField& radiance, const PipelineConfig& cfg,
                              const DecomposeOptions& options) {
  cfg.validate();
  validate_radiance(radiance);
  const Dims& d = radiance.dims();

  DecompositionResult result;
  StageRunner stages(result.timings);
  Intermediates im;

  stages.run("tv-init", [&] {
    auto tv = tvl1_filter(radiance, cfg.init_tv);
    im.filtered = std::move(tv.field);
    im.init_tv = std::move(tv.diagnostics);
    if (!im.init_tv.converged) {
      result.warnings.push_back("initial TV-L1 pass stopped at max_iters before reaching tol_rel");
    }
  });

  stages.run("init-layers", [&] {
    im.s0 = reduce_channels(im.filtered, cfg.reduction);
    im.r0 = divide_by_scalar_field(im.filtered, im.s0, cfg.eps_div);
  });

  std::vector<EdgeWeightMap> weights(d.views());
  stages.run("cues", [&] {
    std::vector<DepthMap> depth;
    if (cfg.use_occlusion && options.depth && !options.depth->maps.empty()) {
      depth = depth_per_view(*options.depth, d, result.warnings);
    }
    if (options.albedo_override && options.albedo_override->size() != d.views()) {
      fail(ErrorKind::Shape, "albedo override must provide one edge map per view");
    }
    if (cfg.keep_intermediates) im.cues.resize(d.views());
    for_each_view(d, [&](int u, int v) {
      const std::size_t k = d.view_index(u, v);
      ViewCues cues = compute_view_cues(im.filtered.view(u, v), im.r0.view(u, v),
                                        depth.empty() ? nullptr : &depth[k], cfg.cues);
      if (options.albedo_override) {
        const EdgeRaster& forced = (*options.albedo_override)[k];
        if (forced.width != d.width || forced.height != d.height) {
          fail(ErrorKind::Shape, "albedo override has the wrong view size");
        }
        cues.omega_a = forced;
      }
      weights[k] = {cues.omega_a, cues.omega_occ};
      if (cfg.keep_intermediates) im.cues[k] = std::move(cues);
    });
  });

  im.s1 = ScalarLightField(d);
  im.r1 = ScalarLightField(d);
  result.view_stats.resize(d.views());
  stages.run("retinex", [&] {
    for_each_view(d, [&](int u, int v) {
      const std::size_t k = d.view_index(u, v);
      const LogView l = to_log(im.s0.view(u, v), cfg.eps_log);
      const auto pairs = texture_pairs(im.filtered.view(u, v), cfg.retinex.texture);
      const ViewSolution sol = solve_view(l, weights[k], pairs, cfg.lambdas, cfg.retinex);
      auto [s1, r1] = exp_layers(sol.s, sol.r);
      store_view(im.s1, u, v, s1);
      store_view(im.r1, u, v, r1);
      result.view_stats[k] = {u, v, sol.iterations, sol.relative_residual, sol.degenerate};
    });
    for (const auto& st : result.view_stats) {
      if (st.degenerate) {
        result.warnings.push_back("view (" + std::to_string(st.u) + ", " + std::to_string(st.v) +
                                  ") is entirely below eps_log; shading set to the input");
      }
    }
  });

  stages.run("coherence", [&] {
    CoherenceResult coh = global_coherence(im.r1, im.s0, radiance, cfg);
    result.shading = std::move(coh.shading);
    result.reflectance = std::move(coh.reflectance);
    im.r1_filtered = std::move(coh.r1_filtered);
    im.coherence_tv = std::move(coh.diagnostics);
    if (!im.coherence_tv.converged) {
      result.warnings.push_back("coherence TV-L1 pass stopped at max_iters before reaching tol_rel");
    }
  });

  if (cfg.keep_intermediates) result.intermediates = std::move(im);
  result.peak_rss_kb = peak_rss_kb();
  return result;
}

double angular_coherence_score(const ScalarLightField& field, double disparity) {
  const Dims& d = field.dims();
  auto sample = [&](int u, int v, double px, double py) {
    const int x0 = std::min(int(std::floor(px)), std::max(d.width - 2, 0));
    const int y0 = std::min(int(std::floor(py)), std::max(d.height - 2, 0));
    const double fx = d.width > 1 ? px - x0 : 0.0, fy = d.height > 1 ? py - y0 : 0.0;
    const int x1 = std::min(x0 + 1, d.width - 1), y1 = std::min(y0 + 1, d.height - 1);
    return (1 - fx) * (1 - fy) * field.at(u, v, x0, y0) + fx * (1 - fy) * field.at(u, v, x1, y0) +
           (1 - fx) * fy * field.at(u, v, x0, y1) + fx * fy * field.at(u, v, x1, y1);
  };

  double total = 0.0;
  long rays = 0;
  std::vector<double> samples(d.views());
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      bool inside = true;
      for (int v = 0; v < d.n_v && inside; ++v) {
        for (int u = 0; u < d.n_u; ++u) {
          const double px = x + disparity * (u - d.center_u());
          const double py = y + disparity * (v - d.center_v());
          if (px < 0.0 || py < 0.0 || px > d.width - 1 || py > d.height - 1) {
            inside = false;
            break;
          }
          samples[d.view_index(u, v)] = sample(u, v, px, py);
        }
      }
      if (!inside) continue;
      double mean = 0.0;
      for (double s : samples) mean += s;
      mean /= double(samples.size());
      double var = 0.0;
      for (double s : samples) var += (s - mean) * (s - mean);
      total += var / double(samples.size());
      ++rays;
    }
  }
  return rays > 0 ? total / double(rays) : 0.0;
}

}  // namespace lfi
