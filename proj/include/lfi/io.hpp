#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "lfi/cues.hpp"
#include "lfi/light_field.hpp"
#include "lfi/pipeline.hpp"

namespace lfi::io {

namespace fs = std::filesystem;

using KeyValues = std::map<std::string, std::string>;

// `key = value` lines; blank lines and lines starting with '#' are skipped.
KeyValues read_key_values(const fs::path& path);
void write_key_values(const fs::path& path, const KeyValues& values);

// Raw decode: integer formats scaled to [0, 1] without gamma handling, PFM
// as stored. Gray stays 1 channel, RGB(A) becomes 3 channels.
Image read_image(const fs::path& path);
void write_png(const fs::path& path, const Image& img, int bit_depth = 16);
void write_ppm(const fs::path& path, const Image& img, int bit_depth = 8);
void write_pfm(const fs::path& path, const Image& img);
// Dispatch on extension: .png (16-bit), .ppm/.pgm, .pfm.
void write_image(const fs::path& path, const Image& img);

struct LightFieldManifest {
  fs::path directory;
  std::string pattern;  // e.g. view_{u}_{v}.png
  int n_u = 1;
  int n_v = 1;
  std::optional<std::string> depth;  // per-view pattern or single central file
  std::optional<double> disparity;
  bool srgb = true;  // integer formats are sRGB-encoded
};

std::string expand_pattern(const std::string& pattern, int u, int v);

// `path` may be the manifest file or a directory holding a file named `manifest`.
LightFieldManifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const LightFieldManifest& manifest);

LightField load_lightfield(const LightFieldManifest& manifest);

// Writes every view with `pattern`; sRGB-encodes integer formats if srgb.
void save_lightfield(const LightField& lf, const fs::path& directory, const std::string& pattern,
                     bool srgb);
void save_scalar_field(const ScalarLightField& lf, const fs::path& directory,
                       const std::string& pattern, double scale = 1.0);
ScalarLightField load_scalar_field(const fs::path& directory, const std::string& pattern,
                                   int n_u, int n_v);
LightField load_rgb_field(const fs::path& directory, const std::string& pattern, int n_u, int n_v);

// PFM or 16-bit PNG; min-max normalized to [0, 1] when `normalize` (constant
// maps to 0); non-finite samples are marked invalid.
DepthMap load_depth(const fs::path& path, bool normalize = true);
void save_depth(const fs::path& path, const DepthMap& depth);

// Depth maps referenced by the manifest (none when the manifest has no depth key).
DepthInput load_depth_input(const LightFieldManifest& manifest);

}  // namespace lfi::io
