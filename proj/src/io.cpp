#include "lfi/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "lfi/color.hpp"

namespace lfi::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
  fail(ErrorKind::Io, path.string() + ": " + what);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---- PNG -------------------------------------------------------------------

Image read_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) io_fail(path, "cannot open");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail(path, "libpng initialization failed");
  }
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail(path, "not a readable PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int out_channels = channels >= 3 ? 3 : 1;
  Image img(int(width), int(height), out_channels);
  const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      for (int c = 0; c < out_channels; ++c) {
        const std::size_t k = std::size_t(x) * channels + c;
        const double raw = depth == 16 ? double((rows[y][2 * k] << 8) | rows[y][2 * k + 1])
                                       : double(rows[y][k]);
        img.at(int(x), int(y), c) = raw * scale;
      }
    }
  }
  return img;
}

// ---- PPM / PGM -------------------------------------------------------------

std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  return {};
}

Image read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P6") io_fail(path, "unsupported PNM variant '" + magic + "'");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    io_fail(path, "malformed PNM header");
  }
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) io_fail(path, "malformed PNM header");
  in.get();
  const int channels = magic == "P6" ? 3 : 1;
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(std::size_t(w) * h * channels * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (!in) io_fail(path, "truncated PNM data");
  Image img(w, h, channels);
  auto dst = img.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double v = bytes == 2 ? double((raw[2 * i] << 8) | raw[2 * i + 1]) : double(raw[i]);
    dst[i] = v / maxval;
  }
  return img;
}

// ---- PFM -------------------------------------------------------------------

Image read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open");
  const std::string magic = next_token(in);
  if (magic != "PF" && magic != "Pf") io_fail(path, "not a PFM file");
  int w = 0, h = 0;
  double scale = 0.0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    scale = std::stod(next_token(in));
  } catch (const std::exception&) {
    io_fail(path, "malformed PFM header");
  }
  if (w < 1 || h < 1 || scale == 0.0) io_fail(path, "malformed PFM header");
  in.get();
  const int channels = magic == "PF" ? 3 : 1;
  const bool little = scale < 0.0;
  std::vector<unsigned char> raw(std::size_t(w) * h * channels * 4);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (!in) io_fail(path, "truncated PFM data");
  Image img(w, h, channels);
  for (int row = 0; row < h; ++row) {
    const int y = h - 1 - row;  // stored bottom-to-top
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        const unsigned char* p = &raw[((std::size_t(row) * w + x) * channels + c) * 4];
        std::uint32_t bits = little ? (std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                                       std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24)
                                    : (std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 |
                                       std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24);
        img.at(x, y, c) = double(std::bit_cast<float>(bits));
      }
    }
  }
  return img;
}

void check_writable_channels(const fs::path& path, const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) io_fail(path, "only 1- or 3-channel images can be written");
}

std::uint32_t quantize(double v, std::uint32_t maxval) {
  const double c = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
  return std::uint32_t(std::lround(c * maxval));
}

Image expand_to_rgb(const Image& img) {
  if (img.channels() == 3) return img;
  Image out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, 0);
    }
  }
  return out;
}

bool is_integer_format(const fs::path& p) { return lower_extension(p) != ".pfm"; }

}  // namespace

KeyValues read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open");
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::Config, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

void write_key_values(const fs::path& path, const KeyValues& values) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot write");
  for (const auto& [k, v] : values) out << k << " = " << v << '\n';
}

Image read_image(const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
  if (ext == ".pfm") return read_pfm(path);
  io_fail(path, "unsupported image extension");
}

void write_png(const fs::path& path, const Image& img, int bit_depth) {
  check_writable_channels(path, img);
  if (bit_depth != 8 && bit_depth != 16) io_fail(path, "PNG bit depth must be 8 or 16");
  const int w = img.width(), h = img.height(), ch = img.channels();
  const int bytes = bit_depth / 8;
  std::vector<png_byte> pixels(std::size_t(w) * h * ch * bytes);
  const std::uint32_t maxval = bit_depth == 16 ? 65535u : 255u;
  auto src = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const std::uint32_t q = quantize(src[i], maxval);
    if (bytes == 2) {
      pixels[2 * i] = png_byte(q >> 8);
      pixels[2 * i + 1] = png_byte(q & 0xff);
    } else {
      pixels[i] = png_byte(q);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = pixels.data() + std::size_t(y) * w * ch * bytes;

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) io_fail(path, "cannot write");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    io_fail(path, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    io_fail(path, "PNG encoding failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), bit_depth,
               ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_ppm(const fs::path& path, const Image& img, int bit_depth) {
  check_writable_channels(path, img);
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot write");
  const std::uint32_t maxval = bit_depth == 16 ? 65535u : 255u;
  out << (img.channels() == 3 ? "P6" : "P5") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << maxval << '\n';
  for (double v : img.data()) {
    const std::uint32_t q = quantize(v, maxval);
    if (maxval > 255) out.put(char(q >> 8));
    out.put(char(q & 0xff));
  }
}

void write_pfm(const fs::path& path, const Image& img) {
  check_writable_channels(path, img);
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot write");
  out << (img.channels() == 3 ? "PF" : "Pf") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << "-1.0\n";
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(float(img.at(x, y, c)));
        const char le[4] = {char(bits & 0xff), char((bits >> 8) & 0xff), char((bits >> 16) & 0xff),
                            char(bits >> 24)};
        out.write(le, 4);
      }
    }
  }
}

void write_image(const fs::path& path, const Image& img) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return write_png(path, img, 16);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return write_ppm(path, img, 16);
  if (ext == ".pfm") return write_pfm(path, img);
  io_fail(path, "unsupported image extension");
}

std::string expand_pattern(const std::string& pattern, int u, int v) {
  std::string out = pattern;
  for (const auto& [key, value] : {std::pair{std::string("{u}"), u}, std::pair{std::string("{v}"), v}}) {
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key)) {
      out.replace(pos, key.size(), std::to_string(value));
    }
  }
  return out;
}

LightFieldManifest read_manifest(const fs::path& path) {
  fs::path file = path;
  if (fs::is_directory(file)) file /= "manifest";
  if (!fs::exists(file)) fail(ErrorKind::Validation, "manifest not found: " + file.string());
  const KeyValues kv = read_key_values(file);
  auto require = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::Config, file.string() + ": missing key '" + key + "'");
    return it->second;
  };
  LightFieldManifest m;
  m.directory = file.parent_path();
  m.pattern = require("pattern");
  try {
    m.n_u = std::stoi(require("n_u"));
    m.n_v = std::stoi(require("n_v"));
    if (auto it = kv.find("disparity"); it != kv.end()) m.disparity = std::stod(it->second);
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::Config, file.string() + ": malformed numeric value");
  }
  if (m.n_u < 1 || m.n_v < 1) fail(ErrorKind::Config, file.string() + ": n_u and n_v must be >= 1");
  if (auto it = kv.find("depth"); it != kv.end()) m.depth = it->second;
  if (auto it = kv.find("gamma"); it != kv.end()) {
    if (it->second != "srgb" && it->second != "linear") {
      fail(ErrorKind::Config, file.string() + ": gamma must be 'srgb' or 'linear'");
    }
    m.srgb = it->second == "srgb";
  }
  return m;
}

void write_manifest(const fs::path& path, const LightFieldManifest& m) {
  KeyValues kv{{"pattern", m.pattern},
               {"n_u", std::to_string(m.n_u)},
               {"n_v", std::to_string(m.n_v)},
               {"gamma", m.srgb ? "srgb" : "linear"}};
  if (m.depth) kv["depth"] = *m.depth;
  if (m.disparity) {
    std::ostringstream d;
    d.precision(17);
    d << *m.disparity;
    kv["disparity"] = d.str();
  }
  write_key_values(path, kv);
}

namespace {

// Decodes views(u, v) in parallel after checking that every file exists.
std::vector<Image> load_views(const fs::path& dir, const std::string& pattern, int n_u, int n_v) {
  std::vector<std::string> missing;
  for (int v = 0; v < n_v; ++v) {
    for (int u = 0; u < n_u; ++u) {
      const fs::path p = dir / expand_pattern(pattern, u, v);
      if (!fs::exists(p)) missing.push_back(p.filename().string());
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    fail(ErrorKind::Validation, "missing view files: " + list);
  }
  const long count = long(n_u) * n_v;
  std::vector<Image> views(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      views[i] = read_image(dir / expand_pattern(pattern, int(i % n_u), int(i / n_u)));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (long i = 0; i < count; ++i) {
    if (views[i].width() != views[0].width() || views[i].height() != views[0].height()) {
      fail(ErrorKind::Validation,
           "view " + expand_pattern(pattern, int(i % n_u), int(i / n_u)) + " is " +
               std::to_string(views[i].width()) + "x" + std::to_string(views[i].height()) +
               ", expected " + std::to_string(views[0].width()) + "x" +
               std::to_string(views[0].height()));
    }
  }
  return views;
}

}  // namespace

LightField load_lightfield(const LightFieldManifest& m) {
  std::vector<Image> views = load_views(m.directory, m.pattern, m.n_u, m.n_v);
  const bool linearize = m.srgb && is_integer_format(m.pattern);
  for (Image& img : views) {
    img = expand_to_rgb(img);
    if (linearize) {
      for (double& x : img.data()) x = srgb_to_linear(x);
    }
  }
  const Dims dims{m.n_u, m.n_v, views[0].width(), views[0].height()};
  return assemble(dims, views);
}

void save_lightfield(const LightField& lf, const fs::path& dir, const std::string& pattern, bool srgb) {
  fs::create_directories(dir);
  const Dims& d = lf.dims();
  const bool encode = srgb && is_integer_format(pattern);
  for (int v = 0; v < d.n_v; ++v) {
    for (int u = 0; u < d.n_u; ++u) {
      Image img = lf.view(u, v);
      if (encode) {
        for (double& x : img.data()) x = linear_to_srgb(std::clamp(x, 0.0, 1.0));
      }
      write_image(dir / expand_pattern(pattern, u, v), img);
    }
  }
}

void save_scalar_field(const ScalarLightField& lf, const fs::path& dir, const std::string& pattern,
                       double scale) {
  fs::create_directories(dir);
  const Dims& d = lf.dims();
  for (int v = 0; v < d.n_v; ++v) {
    for (int u = 0; u < d.n_u; ++u) {
      Image img = lf.view(u, v);
      if (scale != 1.0) {
        for (double& x : img.data()) x /= scale;
      }
      write_image(dir / expand_pattern(pattern, u, v), img);
    }
  }
}

ScalarLightField load_scalar_field(const fs::path& dir, const std::string& pattern, int n_u, int n_v) {
  std::vector<Image> views = load_views(dir, pattern, n_u, n_v);
  ScalarLightField out(Dims{n_u, n_v, views[0].width(), views[0].height()});
  for (int v = 0; v < n_v; ++v) {
    for (int u = 0; u < n_u; ++u) {
      const Image& img = views[std::size_t(v) * n_u + u];
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) out.at(u, v, x, y) = img.at(x, y, 0);
      }
    }
  }
  return out;
}

LightField load_rgb_field(const fs::path& dir, const std::string& pattern, int n_u, int n_v) {
  std::vector<Image> views = load_views(dir, pattern, n_u, n_v);
  for (Image& img : views) img = expand_to_rgb(img);
  return assemble(Dims{n_u, n_v, views[0].width(), views[0].height()}, views);
}

DepthMap load_depth(const fs::path& path, bool normalize) {
  if (!fs::exists(path)) io_fail(path, "depth file not found");
  const Image img = read_image(path);
  DepthMap d;
  d.width = img.width();
  d.height = img.height();
  d.values.resize(img.pixels());
  d.valid.resize(img.pixels());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    const double x = img.data()[i * img.channels()];
    d.valid[i] = std::isfinite(x) ? 1 : 0;
    d.values[i] = d.valid[i] ? x : 0.0;
    if (d.valid[i]) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (normalize) {
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      if (!d.valid[i]) continue;
      d.values[i] = hi > lo ? (d.values[i] - lo) / (hi - lo) : 0.0;
    }
  }
  return d;
}

void save_depth(const fs::path& path, const DepthMap& depth) {
  Image img(depth.width, depth.height, 1);
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    img.data()[i] = depth.valid[i] ? depth.values[i] : std::numeric_limits<double>::quiet_NaN();
  }
  write_image(path, img);
}

DepthInput load_depth_input(const LightFieldManifest& m) {
  DepthInput in;
  in.disparity = m.disparity;
  if (!m.depth) return in;
  const bool per_view = m.depth->find("{u}") != std::string::npos ||
                        m.depth->find("{v}") != std::string::npos;
  if (per_view) {
    for (int v = 0; v < m.n_v; ++v) {
      for (int u = 0; u < m.n_u; ++u) {
        in.maps.push_back(load_depth(m.directory / expand_pattern(*m.depth, u, v)));
      }
    }
  } else {
    in.maps.push_back(load_depth(m.directory / *m.depth));
  }
  return in;
}

}  // namespace lfi::io
