#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lfi/light_field.hpp"

// Data-parallel building blocks shared by the TV and Retinex solvers.
// lfi::kernels holds the OpenMP versions; lfi::kernels::serial holds plain
// loops kept as the reference the parallel versions are tested against.
namespace lfi::kernels {

enum class Axis : std::uint8_t { X = 0, Y = 1, U = 2, V = 3 };

inline constexpr Axis kAllAxes[] = {Axis::X, Axis::Y, Axis::U, Axis::V};

class AxisSet {
 public:
  constexpr AxisSet() = default;
  constexpr AxisSet(std::initializer_list<Axis> axes) {
    for (Axis a : axes) insert(a);
  }
  static constexpr AxisSet all() { return {Axis::X, Axis::Y, Axis::U, Axis::V}; }

  constexpr void insert(Axis a) { bits_ |= std::uint8_t(1u << unsigned(a)); }
  constexpr bool contains(Axis a) const { return bits_ & (1u << unsigned(a)); }
  constexpr bool empty() const { return bits_ == 0; }
  std::vector<Axis> list() const;

 private:
  std::uint8_t bits_ = 0;
};

// Flat (v, u, y, x, channel) layout of a light field sample buffer.
struct Grid {
  Dims dims;
  int channels = 1;

  std::size_t size() const { return dims.rays() * std::size_t(channels); }
  int extent(Axis a) const;
  std::size_t stride(Axis a) const;
};

// Compressed sparse row matrix (full storage, also used for symmetric systems).
struct SparseMatrix {
  int rows = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
};

// out = D_a in (forward difference, zero at the last index of the axis).
void forward_diff(const Grid& g, Axis a, std::span<const double> in, std::span<double> out);
// out += D_a^T diff
void adjoint_diff_add(const Grid& g, Axis a, std::span<const double> diff, std::span<double> out);
// out += D_a^T D_a in
void apply_dtd_add(const Grid& g, Axis a, std::span<const double> in, std::span<double> out);

// out_i = sign(in_i) * max(|in_i| - kappa, 0); in and out may alias.
void shrink(std::span<const double> in, double kappa, std::span<double> out);

// One ADMM splitting step for a single axis. With w = dx + u:
//   dz <- shrink(w, kappa) - z;  z <- shrink(w, kappa);  u <- w - z.
// Returns sum((dx - z_new)^2).
double admm_split_update(std::span<const double> dx, double kappa, std::span<double> z,
                         std::span<double> u, std::span<double> dz);

// Sum reductions are blocked with a fixed block size, so results do not
// depend on the thread count.
double dot(std::span<const double> a, std::span<const double> b);
double abs_sum(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += alpha x
void xpay(std::span<const double> x, double alpha, std::span<double> y);  // y = x + alpha y
void csr_matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y);

namespace serial {

void forward_diff(const Grid& g, Axis a, std::span<const double> in, std::span<double> out);
void adjoint_diff_add(const Grid& g, Axis a, std::span<const double> diff, std::span<double> out);
void apply_dtd_add(const Grid& g, Axis a, std::span<const double> in, std::span<double> out);
void shrink(std::span<const double> in, double kappa, std::span<double> out);
double admm_split_update(std::span<const double> dx, double kappa, std::span<double> z,
                         std::span<double> u, std::span<double> dz);
double dot(std::span<const double> a, std::span<const double> b);
double abs_sum(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpay(std::span<const double> x, double alpha, std::span<double> y);
void csr_matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y);

}  // namespace serial

// Function table so solvers can be run on either backend.
struct KernelSet {
  decltype(&kernels::forward_diff) forward_diff;
  decltype(&kernels::adjoint_diff_add) adjoint_diff_add;
  decltype(&kernels::apply_dtd_add) apply_dtd_add;
  decltype(&kernels::shrink) shrink;
  decltype(&kernels::admm_split_update) admm_split_update;
  decltype(&kernels::dot) dot;
  decltype(&kernels::abs_sum) abs_sum;
  decltype(&kernels::axpy) axpy;
  decltype(&kernels::xpay) xpay;
  decltype(&kernels::csr_matvec) csr_matvec;
};

enum class Backend { Parallel, Serial };

const KernelSet& kernel_set(Backend backend);

}  // namespace lfi::kernels
