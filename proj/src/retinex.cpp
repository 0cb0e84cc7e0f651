#include "lfi/retinex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace lfi {

void RetinexWeights::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) {
    fail(ErrorKind::Config, "retinex weights must be >= 0");
  }
  if (lambda1 == 0.0 && lambda2 == 0.0 && lambda3 == 0.0) {
    fail(ErrorKind::Config, "retinex weights must not all be zero");
  }
}

void RetinexParams::validate() const {
  if (!(anchor_fraction > 0.0 && anchor_fraction <= 1.0)) {
    fail(ErrorKind::Config, "anchor fraction must lie in (0, 1]");
  }
  if (texture.bins < 1 || texture.partners < 0 || texture.min_distance < 0.0) {
    fail(ErrorKind::Config, "invalid texture pair parameters");
  }
  if (!(cg_tol > 0.0) || cg_iter_factor < 1) fail(ErrorKind::Config, "invalid CG parameters");
}

std::vector<int> absolute_scale_anchors(const LogView& l, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorKind::Config, "anchor fraction must lie in (0, 1]");
  }
  auto vals = l.values.data();
  const std::size_t n = vals.size();
  const auto count = std::min<std::size_t>(n, std::size_t(std::ceil(fraction * double(n))));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] > vals[b]; });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<PixelPair> texture_pairs(const Image& view, const TextureParams& tp) {
  if (view.channels() != 3) fail(ErrorKind::Shape, "texture_pairs: expected RGB view");
  const int w = view.width(), h = view.height();
  const std::size_t n = view.pixels();
  auto px = view.data();

  std::vector<int> bin(n, -1);
  int max_bin = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = px[3 * i], g = px[3 * i + 1], b = px[3 * i + 2];
    const double sum = r + g + b;
    if (!(sum > 1e-12)) continue;
    auto q = [&](double c) { return std::clamp(int(c / sum * tp.bins), 0, tp.bins - 1); };
    bin[i] = (q(r) * tp.bins + q(g)) * tp.bins + q(b);
    max_bin = std::max(max_bin, bin[i]);
  }
  if (tp.partners == 0 || max_bin < 0) return {};

  std::vector<std::vector<int>> members(static_cast<std::size_t>(max_bin) + 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (bin[i] >= 0) members[bin[i]].push_back(int(i));
  }

  const double min_d2 = tp.min_distance * tp.min_distance;
  constexpr std::size_t kBruteForceLimit = 256;

  // Offsets ordered by (distance^2, dy, dx): for a fixed pixel this is the
  // same order as (distance^2, row-major index of the partner).
  std::vector<std::tuple<long, int, int>> offsets;
  const bool need_offsets = std::any_of(members.begin(), members.end(), [&](const auto& m) {
    return m.size() > kBruteForceLimit;
  });
  if (need_offsets) {
    for (int dy = -(h - 1); dy <= h - 1; ++dy) {
      for (int dx = -(w - 1); dx <= w - 1; ++dx) {
        const long d2 = long(dx) * dx + long(dy) * dy;
        if (double(d2) > min_d2) offsets.emplace_back(d2, dy, dx);
      }
    }
    std::sort(offsets.begin(), offsets.end());
  }

  std::vector<PixelPair> pairs;
  std::vector<std::pair<long, int>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (bin[i] < 0) continue;
    const auto& group = members[bin[i]];
    const int x = int(i % w), y = int(i / w);
    int found = 0;
    if (group.size() <= kBruteForceLimit) {
      candidates.clear();
      for (int j : group) {
        const int dx = j % w - x, dy = j / w - y;
        const long d2 = long(dx) * dx + long(dy) * dy;
        if (double(d2) > min_d2) candidates.emplace_back(d2, j);
      }
      const auto k = std::min<std::size_t>(candidates.size(), std::size_t(tp.partners));
      std::partial_sort(candidates.begin(), candidates.begin() + long(k), candidates.end());
      for (std::size_t c = 0; c < k; ++c) {
        const int j = candidates[c].second;
        pairs.push_back({std::min(int(i), j), std::max(int(i), j)});
      }
    } else {
      for (const auto& [d2, dy, dx] : offsets) {
        const int xx = x + dx, yy = y + dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        const int j = yy * w + xx;
        if (bin[j] != bin[i]) continue;
        pairs.push_back({std::min(int(i), j), std::max(int(i), j)});
        if (++found == tp.partners) break;
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

namespace {

void check_weights(const LogView& l, const EdgeWeightMap& wm) {
  const int w = l.values.width(), h = l.values.height();
  if (wm.albedo.width != w || wm.albedo.height != h || wm.occlusion.width != w ||
      wm.occlusion.height != h) {
    fail(ErrorKind::Shape, "retinex: cue maps are not aligned with the view");
  }
}

// Visits every 4-connected edge (i, j) with its albedo and occlusion weights.
template <typename Fn>
void for_each_edge(const EdgeWeightMap& wm, Fn&& fn) {
  const int w = wm.albedo.width, h = wm.albedo.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      const int i = y * w + x;
      fn(i, i + 1, wm.albedo.h(x, y), wm.occlusion.h(x, y));
    }
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      fn(i, i + w, wm.albedo.v(x, y), wm.occlusion.v(x, y));
    }
  }
}

class SystemBuilder {
 public:
  explicit SystemBuilder(int n) : n_(n), diag_(std::size_t(n), 0.0), b_(std::size_t(n), 0.0) {}

  // Adds k (s_i - s_j)^2 - 2 m d (s_i - s_j) + m d^2.
  void add_difference_term(int i, int j, double k, double m, double d) {
    diag_[i] += 2.0 * k;
    diag_[j] += 2.0 * k;
    off_.push_back({i, j, -2.0 * k});
    b_[i] += 2.0 * m * d;
    b_[j] -= 2.0 * m * d;
    c_ += m * d * d;
  }

  // Adds k (s_i - t)^2.
  void add_anchor_term(int i, double k, double t) {
    diag_[i] += 2.0 * k;
    b_[i] += 2.0 * k * t;
    c_ += k * t * t;
  }

  void finish(RetinexSystem& sys) {
    std::vector<std::tuple<int, int, double>> entries;
    entries.reserve(off_.size() * 2 + std::size_t(n_));
    for (int i = 0; i < n_; ++i) entries.emplace_back(i, i, diag_[i]);
    for (const auto& e : off_) {
      entries.emplace_back(e.i, e.j, e.v);
      entries.emplace_back(e.j, e.i, e.v);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    auto& m = sys.a;
    m.rows = n_;
    m.row_ptr.assign(std::size_t(n_) + 1, 0);
    m.col.clear();
    m.val.clear();
    int prev_r = -1, prev_c = -1;
    for (const auto& [r, c, v] : entries) {
      if (r == prev_r && c == prev_c) {
        m.val.back() += v;
        continue;
      }
      m.col.push_back(c);
      m.val.push_back(v);
      ++m.row_ptr[r + 1];
      prev_r = r;
      prev_c = c;
    }
    for (int r = 0; r < n_; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    sys.b = std::move(b_);
    sys.c = c_;
  }

 private:
  struct Off {
    int i, j;
    double v;
  };
  int n_;
  std::vector<double> diag_;
  std::vector<double> b_;
  std::vector<Off> off_;
  double c_ = 0.0;
};

}  // namespace

RetinexSystem build_system(const LogView& l, const EdgeWeightMap& wm, std::vector<int> anchors,
                           std::vector<PixelPair> pairs, const RetinexWeights& lam) {
  check_weights(l, wm);
  auto lv = l.values.data();
  const int n = int(lv.size());
  SystemBuilder builder(n);

  for_each_edge(wm, [&](int i, int j, double wa, double wocc) {
    const double k = lam.lambda1 * wocc * (1.0 + wa);
    const double m = lam.lambda1 * wocc * wa;
    builder.add_difference_term(i, j, k, m, lv[i] - lv[j]);
  });
  for (int i : anchors) builder.add_anchor_term(i, lam.lambda2, lv[i]);
  for (const auto& p : pairs) {
    builder.add_difference_term(p.i, p.j, lam.lambda3, lam.lambda3, lv[p.i] - lv[p.j]);
  }

  RetinexSystem sys;
  builder.finish(sys);
  sys.anchors = std::move(anchors);
  sys.pairs = std::move(pairs);
  return sys;
}

double retinex_energy(const LogView& l, const EdgeWeightMap& wm, std::span<const int> anchors,
                      std::span<const PixelPair> pairs, const RetinexWeights& lam,
                      std::span<const double> s) {
  check_weights(l, wm);
  auto lv = l.values.data();
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
  for_each_edge(wm, [&](int i, int j, double wa, double wocc) {
    const double ds = s[i] - s[j];
    const double dr = (lv[i] - lv[j]) - ds;
    f1 += wocc * (ds * ds + wa * dr * dr);
  });
  for (int i : anchors) f2 += (s[i] - lv[i]) * (s[i] - lv[i]);
  for (const auto& p : pairs) {
    const double d = (lv[p.i] - s[p.i]) - (lv[p.j] - s[p.j]);
    f3 += d * d;
  }
  return lam.lambda1 * f1 + lam.lambda2 * f2 + lam.lambda3 * f3;
}

double quadratic_value(const RetinexSystem& sys, std::span<const double> s) {
  std::vector<double> as(s.size());
  kernels::serial::csr_matvec(sys.a, s, as);
  double q = sys.c;
  for (std::size_t i = 0; i < s.size(); ++i) q += 0.5 * s[i] * as[i] - sys.b[i] * s[i];
  return q;
}

std::vector<double> quadratic_gradient(const RetinexSystem& sys, std::span<const double> s) {
  std::vector<double> g(s.size());
  kernels::serial::csr_matvec(sys.a, s, g);
  for (std::size_t i = 0; i < s.size(); ++i) g[i] -= sys.b[i];
  return g;
}

CgResult preconditioned_cg(const kernels::SparseMatrix& a, std::span<const double> b,
                           std::span<double> x, double tol, int max_iters,
                           kernels::Backend backend) {
  const auto& k = kernels::kernel_set(backend);
  const std::size_t n = b.size();
  CgResult res;
  const double b_norm = std::sqrt(k.dot(b, b));
  if (b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }

  std::vector<double> inv_diag(n, 1.0);
  for (int r = 0; r < a.rows; ++r) {
    for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      if (a.col[p] == r && a.val[p] != 0.0) inv_diag[r] = 1.0 / a.val[p];
    }
  }

  std::vector<double> r(n), z(n), p(n), ap(n);
  // The recursive residual can drift below the true one; when it claims
  // convergence early, restart from the true residual.
  for (;;) {
    k.csr_matvec(a, x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    double r_norm = std::sqrt(k.dot(r, r));
    res.relative_residual = r_norm / b_norm;
    res.converged = r_norm <= tol * b_norm;
    if (res.converged || res.iterations >= max_iters) break;

    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = k.dot(r, z);
    while (res.iterations < max_iters) {
      ++res.iterations;
      k.csr_matvec(a, p, ap);
      const double alpha = rz / k.dot(p, ap);
      k.axpy(alpha, p, x);
      k.axpy(-alpha, ap, r);
      r_norm = std::sqrt(k.dot(r, r));
      if (r_norm <= tol * b_norm) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_next = k.dot(r, z);
      k.xpay(z, rz_next / rz, p);
      rz = rz_next;
    }
  }
  return res;
}

ViewSolution solve_view(const LogView& l, const EdgeWeightMap& weights,
                        std::span<const PixelPair> pairs, const RetinexWeights& lam,
                        const RetinexParams& params) {
  lam.validate();
  params.validate();
  check_weights(l, weights);
  const int w = l.values.width(), h = l.values.height();
  auto lv = l.values.data();
  const std::size_t n = lv.size();

  ViewSolution sol{LogView{l.values, l.eps_log}, LogView{Image(w, h, 1, 0.0), l.eps_log}};

  const double floor_log = std::log(l.eps_log);
  const bool degenerate =
      std::all_of(lv.begin(), lv.end(), [&](double x) { return x <= floor_log + 1e-12; });
  if (degenerate) {
    sol.degenerate = true;
    return sol;
  }

  std::vector<int> anchors = absolute_scale_anchors(l, params.anchor_fraction);
  if (anchors.empty() || lam.lambda2 == 0.0) {
    fail(ErrorKind::Config, "retinex: empty absolute-scale anchor set, system is singular");
  }
  const RetinexSystem sys =
      build_system(l, weights, std::move(anchors), {pairs.begin(), pairs.end()}, lam);

  std::vector<double> s(lv.begin(), lv.end());
  const long max_iters = std::min<long>(long(params.cg_iter_factor) * long(n), 1L << 30);
  const CgResult cg = preconditioned_cg(sys.a, sys.b, s, params.cg_tol, int(max_iters), params.backend);
  if (!cg.converged) {
    fail(ErrorKind::Solver, "retinex CG did not converge: relative residual " +
                                std::to_string(cg.relative_residual) + " after " +
                                std::to_string(cg.iterations) + " iterations");
  }
  sol.iterations = cg.iterations;
  sol.relative_residual = cg.relative_residual;

  auto sv = sol.s.values.data();
  auto rv = sol.r.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    sv[i] = s[i];
    rv[i] = lv[i] - s[i];
  }
  return sol;
}

std::pair<Image, Image> exp_layers(const LogView& s, const LogView& r) {
  if (!s.values.same_shape(r.values)) fail(ErrorKind::Shape, "exp_layers: shape mismatch");
  return {from_log(s), from_log(r)};
}

}  // namespace lfi
