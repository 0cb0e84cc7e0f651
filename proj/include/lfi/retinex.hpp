#pragma once

#include <span>
#include <utility>
#include <vector>

#include "lfi/cues.hpp"
#include "lfi/kernels.hpp"
#include "lfi/light_field.hpp"

namespace lfi {

struct RetinexWeights {
  double lambda1 = 1.0;     // Retinex smoothness/reflectance term
  double lambda2 = 1.0;     // absolute scale
  double lambda3 = 1000.0;  // non-local texture

  void validate() const;
};

struct TextureParams {
  int bins = 16;            // chromaticity quantization per channel
  int partners = 4;         // nearest same-bin partners per pixel
  double min_distance = 2.0;
};

struct RetinexParams {
  double anchor_fraction = 0.01;
  TextureParams texture;
  double cg_tol = 1e-8;     // relative residual ||As - b|| / ||b||
  int cg_iter_factor = 10;  // max iterations = factor * pixel count
  kernels::Backend backend = kernels::Backend::Parallel;

  void validate() const;
};

struct PixelPair {
  int i = 0;
  int j = 0;
  bool operator==(const PixelPair&) const = default;
  auto operator<=>(const PixelPair&) const = default;
};

// Energy written as 1/2 s^T A s - b^T s + c.
struct RetinexSystem {
  kernels::SparseMatrix a;
  std::vector<double> b;
  double c = 0.0;
  std::vector<int> anchors;
  std::vector<PixelPair> pairs;
};

// Brightest ceil(fraction * N) pixels of l; ties resolved by row-major index.
std::vector<int> absolute_scale_anchors(const LogView& l, double fraction);

// Pixel pairs sharing a quantized chromaticity bin (RGB / sum). Each pixel
// contributes up to `partners` nearest same-bin pixels farther than
// min_distance; ties by row-major index. Returned sorted, i < j, unique.
std::vector<PixelPair> texture_pairs(const Image& rgb_view, const TextureParams& params);

RetinexSystem build_system(const LogView& l, const EdgeWeightMap& weights,
                           std::vector<int> anchors, std::vector<PixelPair> pairs,
                           const RetinexWeights& lambdas);

// Direct evaluation of lambda1 f1 + lambda2 f2 + lambda3 f3 at s.
double retinex_energy(const LogView& l, const EdgeWeightMap& weights, std::span<const int> anchors,
                      std::span<const PixelPair> pairs, const RetinexWeights& lambdas,
                      std::span<const double> s);

double quadratic_value(const RetinexSystem& sys, std::span<const double> s);
// A s - b
std::vector<double> quadratic_gradient(const RetinexSystem& sys, std::span<const double> s);

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradient on an SPD CSR matrix; x holds the
// initial guess on entry.
CgResult preconditioned_cg(const kernels::SparseMatrix& a, std::span<const double> b,
                           std::span<double> x, double tol, int max_iters,
                           kernels::Backend backend = kernels::Backend::Parallel);

struct ViewSolution {
  LogView s;
  LogView r;
  int iterations = 0;
  double relative_residual = 0.0;
  bool degenerate = false;
};

// Minimizes the per-view energy for log-shading s; r = l - s.
ViewSolution solve_view(const LogView& l, const EdgeWeightMap& weights,
                        std::span<const PixelPair> pairs, const RetinexWeights& lambdas,
                        const RetinexParams& params);

// (S1, R1) = (e^s, e^r)
std::pair<Image, Image> exp_layers(const LogView& s, const LogView& r);

}  // namespace lfi
