#include "lfi/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "lfi/color.hpp"
#include "lfi/synth.hpp"

namespace lfi::cli {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    fail(ErrorKind::Config, "config: '" + key + "' expects a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double x = parse_double(key, value);
  if (x != std::floor(x)) fail(ErrorKind::Config, "config: '" + key + "' expects an integer");
  return int(x);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  fail(ErrorKind::Config, "config: '" + key + "' expects a boolean, got '" + value + "'");
}

AxisSet parse_axes(const std::string& value) {
  AxisSet axes;
  for (char c : value) {
    switch (c) {
      case 'x': axes.insert(Axis::X); break;
      case 'y': axes.insert(Axis::Y); break;
      case 'u': axes.insert(Axis::U); break;
      case 'v': axes.insert(Axis::V); break;
      default: fail(ErrorKind::Config, "config: axes must be drawn from 'xyuv'");
    }
  }
  return axes;
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(10);
  out << x;
  return out.str();
}

}  // namespace

void apply_config(PipelineConfig& cfg, const io::KeyValues& values) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto both_tv = [&](auto&& fn) {
    fn(cfg.init_tv);
    fn(cfg.coherence_tv);
  };
  const std::map<std::string, Setter> setters = {
      {"beta", [&](auto& k, auto& v) { both_tv([&](TvParams& p) { p.beta = parse_double(k, v); }); }},
      {"init_beta", [&](auto& k, auto& v) { cfg.init_tv.beta = parse_double(k, v); }},
      {"coherence_beta", [&](auto& k, auto& v) { cfg.coherence_tv.beta = parse_double(k, v); }},
      {"rho", [&](auto& k, auto& v) { both_tv([&](TvParams& p) { p.rho = parse_double(k, v); }); }},
      {"tv_max_iters", [&](auto& k, auto& v) { both_tv([&](TvParams& p) { p.max_iters = parse_int(k, v); }); }},
      {"tv_tol", [&](auto& k, auto& v) { both_tv([&](TvParams& p) { p.tol_rel = parse_double(k, v); }); }},
      {"tv_cg_max_iters", [&](auto& k, auto& v) { both_tv([&](TvParams& p) { p.cg_max_iters = parse_int(k, v); }); }},
      {"tv_cg_tol", [&](auto& k, auto& v) { both_tv([&](TvParams& p) { p.cg_tol = parse_double(k, v); }); }},
      {"axes", [&](auto&, auto& v) { both_tv([&](TvParams& p) { p.axes = parse_axes(v); }); }},
      {"literal_l1", [&](auto& k, auto& v) { cfg.set_literal_l1(parse_bool(k, v)); }},
      {"angle_thresh", [&](auto& k, auto& v) { cfg.cues.angle_thresh = parse_double(k, v); }},
      {"tau1", [&](auto& k, auto& v) { cfg.cues.tau1 = parse_double(k, v); }},
      {"tau2", [&](auto& k, auto& v) { cfg.cues.tau2 = parse_double(k, v); }},
      {"depth_thresh", [&](auto& k, auto& v) { cfg.cues.depth_thresh = parse_double(k, v); }},
      {"occ_weight", [&](auto& k, auto& v) { cfg.cues.occ_weight = parse_double(k, v); }},
      {"combinator",
       [&](auto&, auto& v) {
         if (v != "min" && v != "max") fail(ErrorKind::Config, "config: combinator must be min or max");
         cfg.cues.combinator = v == "min" ? Combinator::Min : Combinator::Max;
       }},
      {"white_x", [&](auto& k, auto& v) { cfg.cues.white_point.x = parse_double(k, v); }},
      {"white_y", [&](auto& k, auto& v) { cfg.cues.white_point.y = parse_double(k, v); }},
      {"white_z", [&](auto& k, auto& v) { cfg.cues.white_point.z = parse_double(k, v); }},
      {"lambda1", [&](auto& k, auto& v) { cfg.lambdas.lambda1 = parse_double(k, v); }},
      {"lambda2", [&](auto& k, auto& v) { cfg.lambdas.lambda2 = parse_double(k, v); }},
      {"lambda3", [&](auto& k, auto& v) { cfg.lambdas.lambda3 = parse_double(k, v); }},
      {"anchor_fraction", [&](auto& k, auto& v) { cfg.retinex.anchor_fraction = parse_double(k, v); }},
      {"texture_bins", [&](auto& k, auto& v) { cfg.retinex.texture.bins = parse_int(k, v); }},
      {"texture_partners", [&](auto& k, auto& v) { cfg.retinex.texture.partners = parse_int(k, v); }},
      {"texture_min_distance", [&](auto& k, auto& v) { cfg.retinex.texture.min_distance = parse_double(k, v); }},
      {"retinex_cg_tol", [&](auto& k, auto& v) { cfg.retinex.cg_tol = parse_double(k, v); }},
      {"eps_log", [&](auto& k, auto& v) { cfg.eps_log = parse_double(k, v); }},
      {"eps_div", [&](auto& k, auto& v) { cfg.eps_div = parse_double(k, v); }},
      {"use_occlusion", [&](auto& k, auto& v) { cfg.use_occlusion = parse_bool(k, v); }},
      {"keep_intermediates", [&](auto& k, auto& v) { cfg.keep_intermediates = parse_bool(k, v); }},
      {"reduction",
       [&](auto&, auto& v) {
         if (v == "l2") cfg.reduction = ChannelReduction::L2Norm;
         else if (v == "mean") cfg.reduction = ChannelReduction::Mean;
         else if (v == "luminance") cfg.reduction = ChannelReduction::Luminance;
         else fail(ErrorKind::Config, "config: reduction must be l2, mean or luminance");
       }},
  };
  for (const auto& [key, value] : values) {
    auto it = setters.find(key);
    if (it == setters.end()) fail(ErrorKind::Config, "config: unknown key '" + key + "'");
    it->second(key, value);
  }
}

namespace {

struct PipelineFlags {
  std::string config_path;
  int threads = 0;
  bool no_occlusion = false;
  bool keep_intermediates = false;
  bool literal_l1 = false;
  std::string combinator;
  std::vector<double> beta;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value configuration file");
    cmd->add_option("--threads", threads, "OpenMP thread count (0: runtime default)");
    cmd->add_flag("--no-occlusion", no_occlusion, "ignore depth, omega_occ = 1");
    cmd->add_flag("--keep-intermediates", keep_intermediates, "write every intermediate layer");
    cmd->add_flag("--literal-l1", literal_l1, "elementwise l1 instead of total variation");
    cmd->add_option("--combinator", combinator, "albedo cue combinator")->check(CLI::IsMember({"min", "max"}));
    cmd->add_option("--beta", beta, "TV-L1 weight for both passes")->expected(0, 1);
  }

  PipelineConfig build() const {
    PipelineConfig cfg;
    if (!config_path.empty()) apply_config(cfg, io::read_key_values(config_path));
    if (no_occlusion) cfg.use_occlusion = false;
    if (keep_intermediates) cfg.keep_intermediates = true;
    if (literal_l1) cfg.set_literal_l1(true);
    if (!combinator.empty()) cfg.cues.combinator = combinator == "min" ? Combinator::Min : Combinator::Max;
    if (!beta.empty()) cfg.init_tv.beta = cfg.coherence_tv.beta = beta.front();
    cfg.validate();
    return cfg;
  }

  void apply_threads() const {
    if (threads > 0) omp_set_num_threads(threads);
  }
};

void write_edge_png(const io::fs::path& path, const EdgeRaster& edges) {
  io::write_png(path, edge_raster_to_image(edges), 8);
}

void write_cue_maps(const io::fs::path& dir, const ViewCues& cues, int u, int v) {
  const std::string suffix = "_" + std::to_string(u) + "_" + std::to_string(v) + ".png";
  write_edge_png(dir / ("omega_color" + suffix), cues.omega_color);
  write_edge_png(dir / ("omega_a" + suffix), cues.omega_a);
  write_edge_png(dir / ("g_white" + suffix), cues.labels.white);
  write_edge_png(dir / ("g_black" + suffix), cues.labels.black);
  // omega_occ in {occ_weight, 1}: dark where an occlusion was detected.
  write_edge_png(dir / ("omega_occ" + suffix), cues.omega_occ);
  io::write_png(dir / ("p_white" + suffix), cues.bw.p_white, 8);
  io::write_png(dir / ("p_black" + suffix), cues.bw.p_black, 8);
}

double max_value(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, x);
  return m;
}

int cmd_decompose(const std::string& manifest_path, const std::string& out_dir,
                  const PipelineFlags& flags, bool verbose) {
  const PipelineConfig cfg = flags.build();
  const io::LightFieldManifest manifest = io::read_manifest(manifest_path);
  const LightField radiance = io::load_lightfield(manifest);
  const DepthInput depth = cfg.use_occlusion ? io::load_depth_input(manifest) : DepthInput{};
  if (cfg.use_occlusion && depth.maps.empty()) {
    std::cerr << "note: manifest has no depth; occlusion cue disabled\n";
  }

  DecomposeOptions options;
  options.depth = depth.maps.empty() ? nullptr : &depth;
  const DecompositionResult result = decompose(radiance, cfg, options);

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& t : result.timings) std::cerr << "stage " << t.stage << ": " << fmt(t.seconds) << " s\n";
  std::cerr << "peak memory: " << result.peak_rss_kb / 1024 << " MiB\n";
  if (verbose) {
    for (const auto& s : result.view_stats) {
      std::cerr << "view (" << s.u << ", " << s.v << "): cg iterations " << s.iterations
                << ", relative residual " << s.relative_residual << (s.degenerate ? " (degenerate)" : "")
                << '\n';
    }
  }

  const io::fs::path out(out_dir);
  io::fs::create_directories(out);
  const double scale = std::max(max_value(result.shading.samples()), 1e-12);
  io::save_scalar_field(result.shading, out, "shading_{u}_{v}.png", scale);
  io::save_scalar_field(result.shading, out, "shading_{u}_{v}.pfm");
  io::save_lightfield(result.reflectance, out, "reflectance_{u}_{v}.png", true);
  io::save_lightfield(result.reflectance, out, "reflectance_{u}_{v}.pfm", false);
  io::write_key_values(out / "shading_scale.txt", {{"scale", fmt(scale)}});
  io::write_key_values(out / "layers", {{"n_u", std::to_string(radiance.dims().n_u)},
                                        {"n_v", std::to_string(radiance.dims().n_v)},
                                        {"shading", "shading_{u}_{v}.pfm"},
                                        {"reflectance", "reflectance_{u}_{v}.pfm"}});
  io::KeyValues timing;
  for (const auto& t : result.timings) timing["seconds_" + t.stage] = fmt(t.seconds);
  timing["peak_rss_kb"] = std::to_string(result.peak_rss_kb);
  io::write_key_values(out / "timings.txt", timing);

  if (result.intermediates) {
    const Intermediates& im = *result.intermediates;
    const io::fs::path dir = out / "intermediates";
    io::save_lightfield(im.filtered, dir, "filtered_{u}_{v}.pfm", false);
    io::write_manifest(dir / "manifest",
                       {dir, "filtered_{u}_{v}.pfm", radiance.dims().n_u, radiance.dims().n_v,
                        std::nullopt, manifest.disparity, false});
    io::save_scalar_field(im.s0, dir, "s0_{u}_{v}.pfm");
    io::save_lightfield(im.r0, dir, "r0_{u}_{v}.pfm", false);
    io::save_scalar_field(im.s1, dir, "s1_{u}_{v}.pfm");
    io::save_scalar_field(im.r1, dir, "r1_{u}_{v}.pfm");
    io::save_scalar_field(im.r1_filtered, dir, "r1_filtered_{u}_{v}.pfm");
    const Dims& d = radiance.dims();
    for (int v = 0; v < d.n_v; ++v) {
      for (int u = 0; u < d.n_u; ++u) write_cue_maps(dir, im.cues[d.view_index(u, v)], u, v);
    }
    io::write_key_values(dir / "tv.txt",
                         {{"init_iterations", std::to_string(im.init_tv.iterations)},
                          {"init_objective", fmt(im.init_tv.objective)},
                          {"init_converged", im.init_tv.converged ? "true" : "false"},
                          {"coherence_iterations", std::to_string(im.coherence_tv.iterations)},
                          {"coherence_objective", fmt(im.coherence_tv.objective)},
                          {"coherence_converged", im.coherence_tv.converged ? "true" : "false"}});
  }
  return kExitOk;
}

int cmd_epi(const std::string& manifest_path, const std::string& out_file, int x, int y, int u, int v) {
  const io::LightFieldManifest manifest = io::read_manifest(manifest_path);
  const LightField lf = io::load_lightfield(manifest);
  const bool horizontal = y >= 0 && v >= 0;
  const bool vertical = x >= 0 && u >= 0;
  if (horizontal == vertical) {
    fail(ErrorKind::Validation, "epi: give either --y and --v (horizontal) or --x and --u (vertical)");
  }
  Image epi = horizontal ? epi_horizontal(lf, y, v) : epi_vertical(lf, x, u);
  const io::fs::path path(out_file);
  if (manifest.srgb && path.extension() != ".pfm") {
    for (double& s : epi.data()) s = linear_to_srgb(std::clamp(s, 0.0, 1.0));
  }
  if (path.has_parent_path()) io::fs::create_directories(path.parent_path());
  io::write_image(path, epi);
  return kExitOk;
}

int cmd_cues(const std::string& manifest_path, const std::string& out_dir, const PipelineFlags& flags,
             const std::vector<int>& only_view) {
  const PipelineConfig cfg = flags.build();
  const io::LightFieldManifest manifest = io::read_manifest(manifest_path);
  const LightField radiance = io::load_lightfield(manifest);
  const Dims& d = radiance.dims();
  std::vector<std::string> warnings;
  std::vector<DepthMap> depth;
  if (cfg.use_occlusion) {
    const DepthInput in = io::load_depth_input(manifest);
    if (!in.maps.empty()) depth = depth_per_view(in, d, warnings);
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  const LightField filtered = tvl1_filter(radiance, cfg.init_tv).field;
  const LightField r0 = divide_by_scalar_field(filtered, reduce_channels(filtered, cfg.reduction), cfg.eps_div);
  const io::fs::path out(out_dir);
  io::fs::create_directories(out);
  for (int v = 0; v < d.n_v; ++v) {
    for (int u = 0; u < d.n_u; ++u) {
      if (!only_view.empty() && (only_view[0] != u || only_view[1] != v)) continue;
      const DepthMap* dm = depth.empty() ? nullptr : &depth[d.view_index(u, v)];
      write_cue_maps(out, compute_view_cues(filtered.view(u, v), r0.view(u, v), dm, cfg.cues), u, v);
    }
  }
  return kExitOk;
}

int cmd_synth(const std::string& preset_name, const std::string& out_dir, std::uint64_t seed,
              const std::vector<int>& size, double noise, double disparity) {
  SceneSpec spec = preset(preset_name);
  if (!size.empty()) spec.dims = Dims{size[0], size[1], size[2], size[3]};
  if (noise >= 0.0) spec.noise = noise;
  if (disparity >= 0.0) spec.disparity = disparity;
  const Scene scene = generate(spec, seed);
  const Dims& d = spec.dims;

  const io::fs::path out(out_dir);
  io::save_lightfield(scene.radiance, out, "view_{u}_{v}.png", true);
  for (int v = 0; v < d.n_v; ++v) {
    for (int u = 0; u < d.n_u; ++u) {
      io::save_depth(out / io::expand_pattern("depth_{u}_{v}.pfm", u, v), scene.truth.depth[d.view_index(u, v)]);
    }
  }
  io::write_manifest(out / "manifest", {out, "view_{u}_{v}.png", d.n_u, d.n_v,
                                        std::string("depth_{u}_{v}.pfm"), scene.disparity, true});
  const io::fs::path gt = out / "gt";
  io::save_scalar_field(scene.truth.shading, gt, "shading_{u}_{v}.pfm");
  io::save_lightfield(scene.truth.reflectance, gt, "reflectance_{u}_{v}.pfm", false);
  io::write_key_values(gt / "layers", {{"n_u", std::to_string(d.n_u)},
                                       {"n_v", std::to_string(d.n_v)},
                                       {"shading", "shading_{u}_{v}.pfm"},
                                       {"reflectance", "reflectance_{u}_{v}.pfm"},
                                       {"disparity", fmt(scene.disparity)},
                                       {"seed", std::to_string(seed)},
                                       {"preset", preset_name}});
  return kExitOk;
}

struct Layers {
  ScalarLightField shading;
  LightField reflectance;
  std::optional<double> disparity;
};

Layers read_layers(const io::fs::path& dir) {
  const io::fs::path file = dir / "layers";
  if (!io::fs::exists(file)) fail(ErrorKind::Validation, "no layers file in " + dir.string());
  const io::KeyValues kv = io::read_key_values(file);
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) fail(ErrorKind::Config, file.string() + ": missing key '" + k + "'");
    return it->second;
  };
  const int n_u = parse_int("n_u", get("n_u")), n_v = parse_int("n_v", get("n_v"));
  Layers l{io::load_scalar_field(dir, get("shading"), n_u, n_v),
           io::load_rgb_field(dir, get("reflectance"), n_u, n_v), std::nullopt};
  if (auto it = kv.find("disparity"); it != kv.end()) l.disparity = parse_double("disparity", it->second);
  return l;
}

int cmd_eval(const std::string& result_dir, const std::string& gt_dir, double disparity_flag) {
  const Layers result = read_layers(result_dir);
  const Layers gt = read_layers(gt_dir);
  if (!(result.shading.dims() == gt.shading.dims())) {
    fail(ErrorKind::Shape, "eval: result and ground truth dimensions differ");
  }
  const double disparity = disparity_flag >= 0.0 ? disparity_flag : gt.disparity.value_or(0.0);
  std::cout << "si_mse_shading=" << fmt(si_mse(result.shading.samples(), gt.shading.samples())) << '\n'
            << "si_mse_reflectance=" << fmt(si_mse(result.reflectance.samples(), gt.reflectance.samples()))
            << '\n'
            << "log_shading_rmse="
            << fmt(mean_aligned_log_rmse(result.shading.samples(), gt.shading.samples())) << '\n'
            << "angular_coherence=" << fmt(angular_coherence_score(result.shading, disparity)) << '\n'
            << "angular_coherence_gt=" << fmt(angular_coherence_score(gt.shading, disparity)) << '\n'
            << "disparity=" << fmt(disparity) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Intrinsic decomposition of 4D light fields into reflectance and shading", "lfintrinsic"};
  app.require_subcommand(1);
  app.fallthrough();

  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "per-view solver diagnostics");

  std::string manifest, out;
  PipelineFlags flags;

  auto* decompose_cmd = app.add_subcommand("decompose", "decompose a light field");
  decompose_cmd->add_option("manifest", manifest, "manifest file or directory")->required();
  decompose_cmd->add_option("--out", out, "output directory")->required();
  flags.attach(decompose_cmd);

  int epi_x = -1, epi_y = -1, epi_u = -1, epi_v = -1;
  auto* epi_cmd = app.add_subcommand("epi", "extract an epipolar plane image");
  epi_cmd->add_option("manifest", manifest, "manifest file or directory")->required();
  epi_cmd->add_option("--out", out, "output image (.png, .ppm or .pfm)")->required();
  epi_cmd->add_option("--y", epi_y, "scanline for a horizontal EPI");
  epi_cmd->add_option("--v", epi_v, "angular row for a horizontal EPI");
  epi_cmd->add_option("--x", epi_x, "column for a vertical EPI");
  epi_cmd->add_option("--u", epi_u, "angular column for a vertical EPI");

  std::vector<int> only_view;
  PipelineFlags cue_flags;
  auto* cues_cmd = app.add_subcommand("cues", "write albedo and occlusion cue maps");
  cues_cmd->add_option("manifest", manifest, "manifest file or directory")->required();
  cues_cmd->add_option("--out", out, "output directory")->required();
  cues_cmd->add_option("--view", only_view, "restrict to one view: U V")->expected(2);
  cue_flags.attach(cues_cmd);

  std::string preset_name = "mondrian";
  std::uint64_t seed = 1;
  std::vector<int> size;
  double noise = -1.0, disparity = -1.0;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene with ground truth");
  synth_cmd->add_option("--preset", preset_name, "mondrian, noisy, two-layer or flat");
  synth_cmd->add_option("--out", out, "output directory")->required();
  synth_cmd->add_option("--seed", seed, "random seed");
  synth_cmd->add_option("--size", size, "N_U N_V WIDTH HEIGHT")->expected(4);
  synth_cmd->add_option("--noise", noise, "uniform noise amplitude");
  synth_cmd->add_option("--disparity", disparity, "background disparity (pixels per view)");

  std::string result_dir, gt_dir;
  double eval_disparity = -1.0;
  auto* eval_cmd = app.add_subcommand("eval", "score a decomposition against ground truth");
  eval_cmd->add_option("result", result_dir, "decompose output directory")->required();
  eval_cmd->add_option("gt", gt_dir, "ground-truth directory")->required();
  eval_cmd->add_option("--disparity", eval_disparity, "override the ground-truth disparity");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*decompose_cmd) {
      flags.apply_threads();
      return cmd_decompose(manifest, out, flags, verbose);
    }
    if (*epi_cmd) return cmd_epi(manifest, out, epi_x, epi_y, epi_u, epi_v);
    if (*cues_cmd) {
      cue_flags.apply_threads();
      return cmd_cues(manifest, out, cue_flags, only_view);
    }
    if (*synth_cmd) return cmd_synth(preset_name, out, seed, size, noise, disparity);
    if (*eval_cmd) return cmd_eval(result_dir, gt_dir, eval_disparity);
  } catch (const Error& e) {
    std::cerr << "lfintrinsic: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::Solver ? kExitSolver : kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "lfintrinsic: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace lfi::cli
