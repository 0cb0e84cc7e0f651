#include <doctest.h>
#include <omp.h>

#include <random>

#include "lfi/kernels.hpp"

using namespace lfi;
using namespace lfi::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(g);
  return v;
}

const Grid kGrid{Dims{3, 4, 17, 11}, 3};

}  // namespace

TEST_CASE("grid strides follow the view-major layout") {
  CHECK(kGrid.stride(Axis::X) == 3);
  CHECK(kGrid.stride(Axis::Y) == 3 * 17);
  CHECK(kGrid.stride(Axis::U) == 3 * 17 * 11);
  CHECK(kGrid.stride(Axis::V) == 3 * 17 * 11 * 3);
  CHECK(kGrid.extent(Axis::U) == 3);
  CHECK(kGrid.extent(Axis::V) == 4);
}

TEST_CASE("forward difference is zero at the last index") {
  const Grid g{Dims{1, 1, 4, 1}, 1};
  const std::vector<double> in{1, 3, 6, 10};
  std::vector<double> out(4);
  forward_diff(g, Axis::X, in, out);
  CHECK(out == std::vector<double>{2, 3, 4, 0});
}

TEST_CASE("adjoint difference satisfies <Dx, y> = <x, D^T y>") {
  const auto x = random_vector(kGrid.size(), 1);
  const auto y = random_vector(kGrid.size(), 2);
  for (Axis a : {Axis::X, Axis::Y, Axis::U, Axis::V}) {
    std::vector<double> dx(x.size()), dty(x.size(), 0.0);
    forward_diff(kGrid, a, x, dx);
    adjoint_diff_add(kGrid, a, y, dty);
    CHECK(dot(dx, y) == doctest::Approx(dot(x, dty)).epsilon(1e-12));
  }
}

TEST_CASE("parallel kernels match the serial reference") {
  const auto x = random_vector(kGrid.size(), 3);
  const auto y = random_vector(kGrid.size(), 4);
  for (Axis a : {Axis::X, Axis::Y, Axis::U, Axis::V}) {
    std::vector<double> p(x.size()), s(x.size());
    forward_diff(kGrid, a, x, p);
    serial::forward_diff(kGrid, a, x, s);
    CHECK(p == s);

    std::vector<double> pa(x.size(), 0.5), sa(x.size(), 0.5);
    adjoint_diff_add(kGrid, a, y, pa);
    serial::adjoint_diff_add(kGrid, a, y, sa);
    CHECK(pa == sa);

    std::vector<double> pd(x.size(), 0.0), sd(x.size(), 0.0);
    apply_dtd_add(kGrid, a, x, pd);
    serial::apply_dtd_add(kGrid, a, x, sd);
    CHECK(pd == sd);
  }

  std::vector<double> p(x.size()), s(x.size());
  shrink(x, 0.3, p);
  serial::shrink(x, 0.3, s);
  CHECK(p == s);

  std::vector<double> zp(x.size(), 0.1), up(x.size(), 0.0), dzp(x.size());
  std::vector<double> zs = zp, us = up, dzs = dzp;
  const double rp = admm_split_update(x, 0.2, zp, up, dzp);
  const double rs = serial::admm_split_update(x, 0.2, zs, us, dzs);
  CHECK(zp == zs);
  CHECK(up == us);
  CHECK(dzp == dzs);
  CHECK(rp == doctest::Approx(rs).epsilon(1e-12));

  CHECK(dot(x, y) == doctest::Approx(serial::dot(x, y)).epsilon(1e-12));
  CHECK(abs_sum(x) == doctest::Approx(serial::abs_sum(x)).epsilon(1e-12));

  std::vector<double> ap = y, as = y;
  axpy(0.7, x, ap);
  serial::axpy(0.7, x, as);
  CHECK(ap == as);
  xpay(x, -0.3, ap);
  serial::xpay(x, -0.3, as);
  CHECK(ap == as);
}

TEST_CASE("apply_dtd_add equals adjoint of forward difference") {
  const auto x = random_vector(kGrid.size(), 5);
  for (Axis a : {Axis::X, Axis::Y, Axis::U, Axis::V}) {
    std::vector<double> dx(x.size()), two_step(x.size(), 0.0), fused(x.size(), 0.0);
    forward_diff(kGrid, a, x, dx);
    adjoint_diff_add(kGrid, a, dx, two_step);
    apply_dtd_add(kGrid, a, x, fused);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(fused[k] == doctest::Approx(two_step[k]).epsilon(1e-12));
  }
}

TEST_CASE("reductions do not depend on the thread count") {
  const auto x = random_vector(100003, 6);
  const auto y = random_vector(100003, 7);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double d1 = dot(x, y), a1 = abs_sum(x);
  omp_set_num_threads(4);
  const double d4 = dot(x, y), a4 = abs_sum(x);
  omp_set_num_threads(saved);
  CHECK(d1 == d4);
  CHECK(a1 == a4);
}

TEST_CASE("soft thresholding") {
  const std::vector<double> in{-2.0, -0.5, 0.0, 0.5, 2.0};
  std::vector<double> out(in.size());
  shrink(in, 1.0, out);
  CHECK(out == std::vector<double>{-1.0, 0.0, 0.0, 0.0, 1.0});
}

TEST_CASE("csr matvec") {
  // [2 -1 0; -1 2 -1; 0 -1 2]
  SparseMatrix m{3, {0, 2, 5, 7}, {0, 1, 0, 1, 2, 1, 2}, {2, -1, -1, 2, -1, -1, 2}};
  const std::vector<double> x{1, 2, 3};
  std::vector<double> p(3), s(3);
  csr_matvec(m, x, p);
  serial::csr_matvec(m, x, s);
  CHECK(p == std::vector<double>{0, 0, 4});
  CHECK(p == s);
}

TEST_CASE("kernel sets dispatch to each backend") {
  CHECK(kernel_set(Backend::Parallel).dot == &kernels::dot);
  CHECK(kernel_set(Backend::Serial).dot == &kernels::serial::dot);
}
