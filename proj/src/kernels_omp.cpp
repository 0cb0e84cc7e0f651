#include <algorithm>
#include <cmath>

#include "lfi/kernels.hpp"

namespace lfi::kernels {

namespace {

constexpr std::size_t kReduceBlock = 8192;

double soft(double x, double kappa) {
  const double m = std::abs(x) - kappa;
  return m > 0.0 ? std::copysign(m, x) : 0.0;
}

// Fixed-size blocks summed in block order: bit-identical for any thread count.
template <typename BlockFn>
double blocked_sum(std::size_t n, BlockFn&& block_fn) {
  const long blocks = static_cast<long>((n + kReduceBlock - 1) / kReduceBlock);
  if (blocks <= 1) return n == 0 ? 0.0 : block_fn(0, n);
  std::vector<double> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (long b = 0; b < blocks; ++b) {
    const std::size_t lo = std::size_t(b) * kReduceBlock;
    partial[b] = block_fn(lo, std::min(n, lo + kReduceBlock));
  }
  double acc = 0.0;
  for (double p : partial) acc += p;
  return acc;
}

}  // namespace

void forward_diff(const Grid& g, Axis a, std::span<const double> in, std::span<double> out) {
  const long n = g.extent(a), s = long(g.stride(a)), outer = long(g.size()) / (n * s);
#pragma omp parallel for collapse(2) schedule(static)
  for (long o = 0; o < outer; ++o) {
    for (long k = 0; k < n; ++k) {
      const std::size_t base = std::size_t((o * n + k) * s);
      if (k + 1 < n) {
        for (long i = 0; i < s; ++i) out[base + i] = in[base + s + i] - in[base + i];
      } else {
        for (long i = 0; i < s; ++i) out[base + i] = 0.0;
      }
    }
  }
}

void adjoint_diff_add(const Grid& g, Axis a, std::span<const double> d, std::span<double> out) {
  const long n = g.extent(a), s = long(g.stride(a)), outer = long(g.size()) / (n * s);
#pragma omp parallel for collapse(2) schedule(static)
  for (long o = 0; o < outer; ++o) {
    for (long k = 0; k < n; ++k) {
      const std::size_t base = std::size_t((o * n + k) * s);
      const bool has_prev = k >= 1, has_next = k + 1 < n;
      for (long i = 0; i < s; ++i) {
        double acc = 0.0;
        if (has_prev) acc += d[base - s + i];
        if (has_next) acc -= d[base + i];
        out[base + i] += acc;
      }
    }
  }
}

void apply_dtd_add(const Grid& g, Axis a, std::span<const double> p, std::span<double> out) {
  const long n = g.extent(a), s = long(g.stride(a)), outer = long(g.size()) / (n * s);
#pragma omp parallel for collapse(2) schedule(static)
  for (long o = 0; o < outer; ++o) {
    for (long k = 0; k < n; ++k) {
      const std::size_t base = std::size_t((o * n + k) * s);
      const bool has_prev = k >= 1, has_next = k + 1 < n;
      for (long i = 0; i < s; ++i) {
        const double c = p[base + i];
        double acc = 0.0;
        if (has_prev) acc += c - p[base - s + i];
        if (has_next) acc -= p[base + s + i] - c;
        out[base + i] += acc;
      }
    }
  }
}

void shrink(std::span<const double> in, double kappa, std::span<double> out) {
  const long n = long(in.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) out[i] = soft(in[i], kappa);
}

double admm_split_update(std::span<const double> dx, double kappa, std::span<double> z,
                         std::span<double> u, std::span<double> dz) {
  return blocked_sum(dx.size(), [&](std::size_t lo, std::size_t hi) {
    double primal = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double w = dx[i] + u[i];
      const double zn = soft(w, kappa);
      dz[i] = zn - z[i];
      z[i] = zn;
      u[i] = w - zn;
      primal += (dx[i] - zn) * (dx[i] - zn);
    }
    return primal;
  });
}

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += a[i] * b[i];
    return acc;
  });
}

double abs_sum(std::span<const double> a) {
  return blocked_sum(a.size(), [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += std::abs(a[i]);
    return acc;
  });
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const long n = long(x.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpay(std::span<const double> x, double alpha, std::span<double> y) {
  const long n = long(x.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

void csr_matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) acc += m.val[k] * x[m.col[k]];
    y[r] = acc;
  }
}

}  // namespace lfi::kernels
