#include <cmath>

#include "lfi/kernels.hpp"

namespace lfi::kernels::serial {

namespace {

double soft(double x, double kappa) {
  const double m = std::abs(x) - kappa;
  return m > 0.0 ? std::copysign(m, x) : 0.0;
}

}  // namespace

void forward_diff(const Grid& g, Axis a, std::span<const double> in, std::span<double> out) {
  const std::size_t n = g.extent(a), s = g.stride(a), outer = g.size() / (n * s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t base = (o * n + k) * s;
      for (std::size_t i = 0; i < s; ++i) {
        out[base + i] = k + 1 < n ? in[base + s + i] - in[base + i] : 0.0;
      }
    }
  }
}

void adjoint_diff_add(const Grid& g, Axis a, std::span<const double> d, std::span<double> out) {
  const std::size_t n = g.extent(a), s = g.stride(a), outer = g.size() / (n * s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t base = (o * n + k) * s;
      for (std::size_t i = 0; i < s; ++i) {
        double acc = 0.0;
        if (k >= 1) acc += d[base - s + i];
        if (k + 1 < n) acc -= d[base + i];
        out[base + i] += acc;
      }
    }
  }
}

void apply_dtd_add(const Grid& g, Axis a, std::span<const double> p, std::span<double> out) {
  const std::size_t n = g.extent(a), s = g.stride(a), outer = g.size() / (n * s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t base = (o * n + k) * s;
      for (std::size_t i = 0; i < s; ++i) {
        const double c = p[base + i];
        double acc = 0.0;
        if (k >= 1) acc += c - p[base - s + i];
        if (k + 1 < n) acc -= p[base + s + i] - c;
        out[base + i] += acc;
      }
    }
  }
}

void shrink(std::span<const double> in, double kappa, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = soft(in[i], kappa);
}

double admm_split_update(std::span<const double> dx, double kappa, std::span<double> z,
                         std::span<double> u, std::span<double> dz) {
  double primal = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double w = dx[i] + u[i];
    const double zn = soft(w, kappa);
    dz[i] = zn - z[i];
    z[i] = zn;
    u[i] = w - zn;
    primal += (dx[i] - zn) * (dx[i] - zn);
  }
  return primal;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double abs_sum(std::span<const double> a) {
  double acc = 0.0;
  for (double x : a) acc += std::abs(x);
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpay(std::span<const double> x, double alpha, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + alpha * y[i];
}

void csr_matvec(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
  for (int r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) acc += m.val[k] * x[m.col[k]];
    y[r] = acc;
  }
}

}  // namespace lfi::kernels::serial
