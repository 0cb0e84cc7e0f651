#include "lfi/kernels.hpp"

namespace lfi::kernels {

std::vector<Axis> AxisSet::list() const {
  std::vector<Axis> out;
  for (Axis a : kAllAxes) {
    if (contains(a)) out.push_back(a);
  }
  return out;
}

int Grid::extent(Axis a) const {
  switch (a) {
    case Axis::X: return dims.width;
    case Axis::Y: return dims.height;
    case Axis::U: return dims.n_u;
    case Axis::V: return dims.n_v;
  }
  return 1;
}

std::size_t Grid::stride(Axis a) const {
  const std::size_t c = std::size_t(channels);
  switch (a) {
    case Axis::X: return c;
    case Axis::Y: return c * dims.width;
    case Axis::U: return c * dims.pixels();
    case Axis::V: return c * dims.pixels() * dims.n_u;
  }
  return c;
}

const KernelSet& kernel_set(Backend backend) {
  static const KernelSet parallel{
      &kernels::forward_diff, &kernels::adjoint_diff_add, &kernels::apply_dtd_add,
      &kernels::shrink,       &kernels::admm_split_update, &kernels::dot,
      &kernels::abs_sum,      &kernels::axpy,             &kernels::xpay,
      &kernels::csr_matvec};
  static const KernelSet reference{
      &serial::forward_diff, &serial::adjoint_diff_add, &serial::apply_dtd_add,
      &serial::shrink,       &serial::admm_split_update, &serial::dot,
      &serial::abs_sum,      &serial::axpy,             &serial::xpay,
      &serial::csr_matvec};
  return backend == Backend::Parallel ? parallel : reference;
}

}  // namespace lfi::kernels
