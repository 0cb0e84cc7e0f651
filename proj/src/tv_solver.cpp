#include "lfi/tv_solver.hpp"

#include <algorithm>
#include <cmath>

namespace lfi {

using kernels::Grid;
using kernels::KernelSet;

void TvParams::validate() const {
  if (!(beta > 0.0)) fail(ErrorKind::Config, "tv: beta must be > 0");
  if (!(rho > 0.0)) fail(ErrorKind::Config, "tv: rho must be > 0");
  if (max_iters < 1) fail(ErrorKind::Config, "tv: max_iters must be >= 1");
  if (!(tol_rel > 0.0)) fail(ErrorKind::Config, "tv: tol_rel must be > 0");
  if (axes.empty()) fail(ErrorKind::Config, "tv: at least one axis is required");
  if (cg_max_iters < 1 || !(cg_tol > 0.0)) fail(ErrorKind::Config, "tv: invalid CG settings");
}

std::vector<double> shrink(std::span<const double> v, double kappa) {
  if (kappa < 0.0) fail(ErrorKind::Validation, "shrink: kappa must be >= 0");
  std::vector<double> out(v.size());
  kernels::shrink(v, kappa, out);
  return out;
}

double total_variation(const Grid& grid, std::span<const double> x, AxisSet axes) {
  std::vector<double> d(x.size());
  double tv = 0.0;
  for (Axis a : axes.list()) {
    kernels::forward_diff(grid, a, x, d);
    tv += kernels::abs_sum(d);
  }
  return tv;
}

namespace {

class AdmmTv {
 public:
  AdmmTv(const Grid& grid, const TvParams& p)
      : grid_(grid),
        params_(p),
        k_(kernels::kernel_set(p.backend)),
        parallel_(p.backend == kernels::Backend::Parallel),
        axes_(p.axes.list()),
        n_(grid.size()),
        z_(axes_.size(), std::vector<double>(n_)),
        u_(axes_.size(), std::vector<double>(n_, 0.0)),
        rhs_(n_),
        tmp_(n_),
        dx_(n_),
        dz_(n_),
        r_(n_),
        p_(n_),
        ap_(n_) {}

  TvDiagnostics run(std::span<const double> f, std::span<double> x) {
    TvDiagnostics diag;
    std::copy(f.begin(), f.end(), x.begin());
    for (std::size_t a = 0; a < axes_.size(); ++a) k_.forward_diff(grid_, axes_[a], x, z_[a]);

    const double rho = params_.rho;
    const double kappa = params_.beta / rho;
    for (int it = 0; it < params_.max_iters; ++it) {
      // rhs = f + rho D^T (z - u)
      std::copy(f.begin(), f.end(), rhs_.begin());
      for (std::size_t a = 0; a < axes_.size(); ++a) {
        const auto& z = z_[a];
        const auto& u = u_[a];
        const long n = long(n_);
#pragma omp parallel for schedule(static) if (parallel_)
        for (long i = 0; i < n; ++i) tmp_[i] = rho * (z[i] - u[i]);
        k_.adjoint_diff_add(grid_, axes_[a], tmp_, rhs_);
      }
      diag.cg_iterations += conjugate_gradient(rhs_, x);

      double primal_sq = 0.0, dx_sq = 0.0, z_sq = 0.0;
      std::fill(rhs_.begin(), rhs_.end(), 0.0);  // reused: D^T (z_new - z_old)
      std::fill(tmp_.begin(), tmp_.end(), 0.0);  // reused: D^T u
      for (std::size_t a = 0; a < axes_.size(); ++a) {
        k_.forward_diff(grid_, axes_[a], x, dx_);
        dx_sq += k_.dot(dx_, dx_);
        primal_sq += k_.admm_split_update(dx_, kappa, z_[a], u_[a], dz_);
        z_sq += k_.dot(z_[a], z_[a]);
        k_.adjoint_diff_add(grid_, axes_[a], dz_, rhs_);
        k_.adjoint_diff_add(grid_, axes_[a], u_[a], tmp_);
      }
      const double primal = std::sqrt(primal_sq);
      const double dual = rho * std::sqrt(k_.dot(rhs_, rhs_));
      diag.primal_residuals.push_back(primal);
      diag.dual_residuals.push_back(dual);
      diag.iterations = it + 1;

      const double primal_scale = std::max(std::sqrt(dx_sq), std::sqrt(z_sq));
      const double dual_scale = rho * std::sqrt(k_.dot(tmp_, tmp_));
      if (primal <= params_.tol_rel * primal_scale && dual <= params_.tol_rel * dual_scale) {
        diag.converged = true;
        break;
      }
    }

    double fidelity = 0.0;
    for (std::size_t i = 0; i < n_; ++i) fidelity += (x[i] - f[i]) * (x[i] - f[i]);
    double tv = 0.0;
    for (Axis a : axes_) {
      k_.forward_diff(grid_, a, x, dx_);
      tv += k_.abs_sum(dx_);
    }
    diag.objective = 0.5 * fidelity + params_.beta * tv;
    return diag;
  }

 private:
  // out = (I + rho D^T D) in
  void apply_system(std::span<const double> in, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (Axis a : axes_) k_.apply_dtd_add(grid_, a, in, out);
    k_.xpay(in, params_.rho, out);
  }

  int conjugate_gradient(std::span<const double> b, std::span<double> x) {
    apply_system(x, ap_);
    const long n = long(n_);
#pragma omp parallel for schedule(static) if (parallel_)
    for (long i = 0; i < n; ++i) r_[i] = b[i] - ap_[i];
    const double b_norm = std::sqrt(k_.dot(b, b));
    const double stop = params_.cg_tol * b_norm;
    double rr = k_.dot(r_, r_);
    if (std::sqrt(rr) <= stop) return 0;
    std::copy(r_.begin(), r_.end(), p_.begin());
    int it = 0;
    while (it < params_.cg_max_iters) {
      ++it;
      apply_system(p_, ap_);
      const double alpha = rr / k_.dot(p_, ap_);
      k_.axpy(alpha, p_, x);
      k_.axpy(-alpha, ap_, r_);
      const double rr_next = k_.dot(r_, r_);
      if (std::sqrt(rr_next) <= stop) break;
      k_.xpay(r_, rr_next / rr, p_);
      rr = rr_next;
    }
    return it;
  }

  Grid grid_;
  TvParams params_;
  const KernelSet& k_;
  bool parallel_;
  std::vector<Axis> axes_;
  std::size_t n_;
  std::vector<std::vector<double>> z_;
  std::vector<std::vector<double>> u_;
  std::vector<double> rhs_, tmp_, dx_, dz_, r_, p_, ap_;
};

}  // namespace

TvDiagnostics tvl1_filter(const Grid& grid, std::span<const double> input,
                          std::span<double> output, const TvParams& params) {
  params.validate();
  if (input.size() != grid.size() || output.size() != grid.size()) {
    fail(ErrorKind::Shape, "tvl1_filter: buffer size does not match grid");
  }
  if (!all_finite(input)) fail(ErrorKind::Validation, "tvl1_filter: input is not finite");

  if (params.form == TvForm::LiteralL1) {
    kernels::kernel_set(params.backend).shrink(input, params.beta, output);
    TvDiagnostics diag;
    double fidelity = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < input.size(); ++i) {
      fidelity += (output[i] - input[i]) * (output[i] - input[i]);
      l1 += std::abs(output[i]);
    }
    diag.objective = 0.5 * fidelity + params.beta * l1;
    diag.converged = true;
    return diag;
  }

  AdmmTv solver(grid, params);
  return solver.run(input, output);
}

TvResult<LightField> tvl1_filter(const LightField& field, const TvParams& params) {
  TvResult<LightField> result{LightField(field.dims()), {}};
  result.diagnostics = tvl1_filter(grid_of(field), field.samples(), result.field.samples(), params);
  return result;
}

TvResult<ScalarLightField> tvl1_filter(const ScalarLightField& field, const TvParams& params) {
  TvResult<ScalarLightField> result{ScalarLightField(field.dims()), {}};
  result.diagnostics = tvl1_filter(grid_of(field), field.samples(), result.field.samples(), params);
  return result;
}

}  // namespace lfi
