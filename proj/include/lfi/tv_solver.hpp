#pragma once

#include <span>
#include <vector>

#include "lfi/kernels.hpp"
#include "lfi/light_field.hpp"

namespace lfi {

using kernels::Axis;
using kernels::AxisSet;

enum class TvForm {
  // 1/2 ||X - L||^2 + beta ||D X||_1 (anisotropic total variation)
  Gradient,
  // 1/2 ||X - L||^2 + beta ||X||_1, solved in closed form by shrinkage
  LiteralL1,
};

struct TvParams {
  double beta = 0.05;
  double rho = 1.0;
  int max_iters = 100;
  double tol_rel = 1e-4;
  AxisSet axes = AxisSet::all();
  int cg_max_iters = 50;
  double cg_tol = 1e-6;
  TvForm form = TvForm::Gradient;
  kernels::Backend backend = kernels::Backend::Parallel;

  void validate() const;
};

struct TvDiagnostics {
  int iterations = 0;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  double objective = 0.0;
  bool converged = false;
  long cg_iterations = 0;
};

template <typename Field>
struct TvResult {
  Field field;
  TvDiagnostics diagnostics;
};

// ADMM with the split z = D X; the X-update solves (I + rho D^T D) X = rhs by
// conjugate gradient warm-started from the previous iterate.
TvDiagnostics tvl1_filter(const kernels::Grid& grid, std::span<const double> input,
                          std::span<double> output, const TvParams& params);

TvResult<LightField> tvl1_filter(const LightField& field, const TvParams& params);
TvResult<ScalarLightField> tvl1_filter(const ScalarLightField& field, const TvParams& params);

template <int C>
kernels::Grid grid_of(const BasicLightField<C>& f) {
  return {f.dims(), C};
}

template <int C>
BasicLightField<C> forward_diff(const BasicLightField<C>& field, Axis axis) {
  BasicLightField<C> out(field.dims());
  kernels::forward_diff(grid_of(field), axis, field.samples(), out.samples());
  return out;
}

// Returns -D^T y for the stacked differences y, one field per axis in `axes`
// order (X, Y, U, V).
template <int C>
BasicLightField<C> divergence(std::span<const BasicLightField<C>> stacked, AxisSet axes) {
  const auto list = axes.list();
  if (stacked.size() != list.size() || stacked.empty()) {
    fail(ErrorKind::Shape, "divergence: one difference field per axis expected");
  }
  BasicLightField<C> out(stacked.front().dims());
  for (std::size_t i = 0; i < list.size(); ++i) {
    kernels::adjoint_diff_add(grid_of(out), list[i], stacked[i].samples(), out.samples());
  }
  for (double& x : out.samples()) x = -x;
  return out;
}

std::vector<double> shrink(std::span<const double> v, double kappa);

// ||D X||_1 summed over `axes`.
double total_variation(const kernels::Grid& grid, std::span<const double> x, AxisSet axes);

template <int C>
double total_variation(const BasicLightField<C>& f, AxisSet axes = AxisSet::all()) {
  return total_variation(grid_of(f), f.samples(), axes);
}

}  // namespace lfi
