#pragma once

// Adaptive quadrature: Gauss-Kronrod (7, 15) in one dimension and the
// Genz-Malik degree-7 rule with an embedded degree-5 error estimate in two or
// more dimensions. Both run a global priority queue that always bisects the
// region carrying the largest error estimate. Unbounded axes are mapped onto
// finite intervals with rational substitutions before integration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "pprior/error.hpp"

namespace pprior {

struct QuadOptions {
  double abs_tol = 1e-6;
  double rel_tol = 1e-4;
  std::size_t max_evals = 10'000'000;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evals = 0;
  bool converged = false;
};

inline double tolerance_for(const QuadOptions& opts, double value) {
  return std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
}

inline double require_converged(const QuadResult& r, const std::string& what) {
  if (!r.converged || !std::isfinite(r.value)) {
    fail(ErrorCode::NonConverged, what + " (estimate " + std::to_string(r.value) + ", error " +
                                      std::to_string(r.error) + ", " + std::to_string(r.evals) + " evaluations)");
  }
  return r.value;
}

/// One integration axis. Either end may be infinite; `center` and `scale`
/// place the bulk of an unbounded axis so the substitution resolves it.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double center = 0.0;
  double scale = 1.0;

  static Axis finite(double lo, double hi) { return {lo, hi, 0.5 * (lo + hi), hi - lo}; }
  static Axis real_line(double center = 0.0, double scale = 1.0) {
    return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), center, scale};
  }
  static Axis positive(double scale = 1.0) { return {0.0, std::numeric_limits<double>::infinity(), 0.0, scale}; }
};

namespace detail {

enum class AxisKind { Finite, Upper, Lower, Both };

struct AxisMap {
  AxisKind kind = AxisKind::Finite;
  double lo = 0.0, hi = 1.0, center = 0.0, scale = 1.0;

  explicit AxisMap(const Axis& a) : lo(a.lo), hi(a.hi), center(a.center), scale(a.scale > 0 ? a.scale : 1.0) {
    const bool lo_inf = std::isinf(lo), hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) kind = AxisKind::Both;
    else if (hi_inf) kind = AxisKind::Upper;
    else if (lo_inf) kind = AxisKind::Lower;
  }

  double t_lo() const { return kind == AxisKind::Finite ? lo : (kind == AxisKind::Both ? -1.0 : 0.0); }
  double t_hi() const { return kind == AxisKind::Finite ? hi : 1.0; }

  // x(t) and dx/dt
  std::pair<double, double> operator()(double t) const {
    switch (kind) {
      case AxisKind::Finite: return {t, 1.0};
      case AxisKind::Upper: {
        const double d = 1.0 - t;
        return {lo + scale * t / d, scale / (d * d)};
      }
      case AxisKind::Lower: {
        const double d = 1.0 - t;
        return {hi - scale * t / d, scale / (d * d)};
      }
      case AxisKind::Both: {
        const double d = 1.0 - t * t;
        return {center + scale * t / d, scale * (1.0 + t * t) / (d * d)};
      }
    }
    return {t, 1.0};
  }

  double to_t(double x) const {
    switch (kind) {
      case AxisKind::Finite: return x;
      case AxisKind::Upper: {
        if (std::isinf(x)) return 1.0;
        const double u = (x - lo) / scale;
        return u / (1.0 + u);
      }
      case AxisKind::Lower: {
        if (std::isinf(x)) return 1.0;
        const double u = (hi - x) / scale;
        return u / (1.0 + u);
      }
      case AxisKind::Both: {
        if (std::isinf(x)) return x > 0 ? 1.0 : -1.0;
        const double u = (x - center) / scale;
        return 2.0 * u / (1.0 + std::sqrt(1.0 + 4.0 * u * u));
      }
    }
    return x;
  }
};

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

// QUADPACK qk15 error heuristic.
template <class G>
Interval gauss_kronrod15(G& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = g(center - dx);
    f2[j] = g(center + dx);
    resk += kWgk[j] * (f1[j] + f2[j]);
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1[j] + f2[j]);
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(err, 50.0 * eps * resabs);
  return {a, b, value, err};
}

}  // namespace detail

/// Adaptive 1-D integration over a finite interval, optionally seeded with
/// interior breakpoints where the integrand has kinks or narrow peaks.
template <class F>
QuadResult integrate_interval(F&& f, double a, double b, const QuadOptions& opts = {},
                              std::span<const double> breakpoints = {}) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin() + 1, cuts.end() - 1);

  std::priority_queue<detail::Interval> heap;
  double total = 0.0, total_err = 0.0, frozen_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    auto iv = detail::gauss_kronrod15(f, cuts[i], cuts[i + 1]);
    out.evals += 15;
    total += iv.value;
    total_err += iv.error;
    heap.push(iv);
  }
  const double min_width = 64.0 * std::numeric_limits<double>::epsilon();
  while (!heap.empty() && total_err > tolerance_for(opts, total)) {
    if (out.evals + 30 > opts.max_evals) break;
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (std::abs(worst.b - worst.a) <= min_width * std::max(std::abs(mid), std::numeric_limits<double>::min())) {
      frozen_err += worst.error;
      continue;
    }
    auto left = detail::gauss_kronrod15(f, worst.a, mid);
    auto right = detail::gauss_kronrod15(f, mid, worst.b);
    out.evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Recompute from the pieces to shed accumulated cancellation in `total`.
  double sum = 0.0, err = frozen_err;
  for (; !heap.empty(); heap.pop()) {
    sum += heap.top().value;
    err += heap.top().error;
  }
  out.value = sum;
  out.error = err;
  out.converged = std::isfinite(sum) && err <= tolerance_for(opts, sum);
  return out;
}

/// Adaptive 1-D integration over an axis that may be unbounded. Breakpoints
/// are given in the original coordinate.
template <class F>
QuadResult integrate_1d(F&& f, const Axis& axis, const QuadOptions& opts = {},
                        std::span<const double> breakpoints = {}) {
  const detail::AxisMap map(axis);
  if (map.kind == detail::AxisKind::Finite) return integrate_interval(f, axis.lo, axis.hi, opts, breakpoints);
  auto g = [&](double t) {
    const auto [x, jac] = map(t);
    if (!std::isfinite(x) || !std::isfinite(jac)) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * jac;
  };
  std::vector<double> tb;
  tb.reserve(breakpoints.size());
  for (double p : breakpoints) {
    if (map.kind == detail::AxisKind::Upper && p <= axis.lo) continue;
    if (map.kind == detail::AxisKind::Lower && p >= axis.hi) continue;
    tb.push_back(map.to_t(p));
  }
  return integrate_interval(g, map.t_lo(), map.t_hi(), opts, tb);
}

namespace detail {

struct Box {
  std::vector<double> center, half;
  double value = 0.0, error = 0.0;
  std::size_t split_axis = 0;
  bool operator<(const Box& o) const { return error < o.error; }
};

class GenzMalik {
 public:
  explicit GenzMalik(std::size_t dim) : dim_(dim) {
    const double d = static_cast<double>(dim);
    w1_ = (12824.0 - 9120.0 * d + 400.0 * d * d) / 19683.0;
    w3_ = (1820.0 - 400.0 * d) / 19683.0;
    w5_ = 6859.0 / 19683.0 / std::ldexp(1.0, static_cast<int>(dim));
    we1_ = (729.0 - 950.0 * d + 50.0 * d * d) / 729.0;
    we3_ = (265.0 - 100.0 * d) / 1458.0;
  }

  std::size_t points_per_box() const {
    return 1 + 4 * dim_ + 2 * dim_ * (dim_ - 1) + (std::size_t{1} << dim_);
  }

  template <class G>
  void apply(G& g, Box& box) const {
    static constexpr double l2 = 0.358568582800318091990645153907937495454;  // sqrt(9/70)
    static constexpr double l4 = 0.948683298050513799599668063329815560116;  // sqrt(9/10)
    static constexpr double l5 = 0.688247201611685297721628734293623525127;  // sqrt(9/19)
    static constexpr double w2 = 980.0 / 6561.0, w4 = 200.0 / 19683.0;
    static constexpr double we2 = 245.0 / 486.0, we4 = 25.0 / 729.0;
    const double ratio = (l2 * l2) / (l4 * l4);

    std::vector<double> x = box.center;
    const double f0 = g(std::span<const double>(x));
    double sum2 = 0.0, sum3 = 0.0, sum4 = 0.0, sum5 = 0.0;
    double best_diff = -1.0;
    std::size_t best_axis = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double c = box.center[i], h = box.half[i];
      x[i] = c - l2 * h;
      const double a = g(std::span<const double>(x));
      x[i] = c + l2 * h;
      const double b = g(std::span<const double>(x));
      x[i] = c - l4 * h;
      const double cc = g(std::span<const double>(x));
      x[i] = c + l4 * h;
      const double d = g(std::span<const double>(x));
      x[i] = c;
      sum2 += a + b;
      sum3 += cc + d;
      const double diff = std::abs(a + b - 2.0 * f0 - ratio * (cc + d - 2.0 * f0));
      // Ties go to the widest axis.
      if (diff > best_diff * (1.0 + 1e-10) ||
          (std::abs(diff - best_diff) <= 1e-10 * best_diff && h > box.half[best_axis])) {
        best_diff = diff;
        best_axis = i;
      }
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i + 1; j < dim_; ++j) {
        for (int si : {-1, 1}) {
          for (int sj : {-1, 1}) {
            x[i] = box.center[i] + si * l4 * box.half[i];
            x[j] = box.center[j] + sj * l4 * box.half[j];
            sum4 += g(std::span<const double>(x));
          }
        }
        x[i] = box.center[i];
        x[j] = box.center[j];
      }
    }
    const std::size_t corners = std::size_t{1} << dim_;
    for (std::size_t mask = 0; mask < corners; ++mask) {
      for (std::size_t i = 0; i < dim_; ++i)
        x[i] = box.center[i] + ((mask >> i) & 1U ? l5 : -l5) * box.half[i];
      sum5 += g(std::span<const double>(x));
    }
    double vol = 1.0;
    for (double h : box.half) vol *= 2.0 * h;
    const double r7 = vol * (w1_ * f0 + w2 * sum2 + w3_ * sum3 + w4 * sum4 + w5_ * sum5);
    const double r5 = vol * (we1_ * f0 + we2 * sum2 + we3_ * sum3 + we4 * sum4);
    box.value = r7;
    box.error = std::abs(r7 - r5);
    box.split_axis = best_axis;
  }

 private:
  std::size_t dim_;
  double w1_, w3_, w5_, we1_, we3_;
};

}  // namespace detail

/// Adaptive cubature over a product of axes (any of which may be unbounded).
/// `f` receives the point as std::span<const double>.
template <class F>
QuadResult cubature(F&& f, const std::vector<Axis>& axes, const QuadOptions& opts = {}) {
  const std::size_t dim = axes.size();
  if (dim == 0) fail(ErrorCode::Domain, "cubature needs at least one axis");
  if (dim == 1) {
    return integrate_1d([&](double x) { return f(std::span<const double>(&x, 1)); }, axes[0], opts);
  }
  std::vector<detail::AxisMap> maps;
  maps.reserve(dim);
  for (const auto& a : axes) maps.emplace_back(a);

  std::vector<double> xs(dim);
  auto g = [&](std::span<const double> t) {
    double jac = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const auto [x, j] = maps[i](t[i]);
      if (!std::isfinite(x) || !std::isfinite(j)) return 0.0;
      xs[i] = x;
      jac *= j;
    }
    const double v = f(std::span<const double>(xs));
    return v == 0.0 ? 0.0 : v * jac;
  };

  QuadResult out;
  detail::GenzMalik rule(dim);
  detail::Box root;
  for (const auto& m : maps) {
    const double a = m.t_lo(), b = m.t_hi();
    if (!(b > a)) {
      out.converged = true;
      return out;
    }
    root.center.push_back(0.5 * (a + b));
    root.half.push_back(0.5 * (b - a));
  }
  rule.apply(g, root);
  out.evals += rule.points_per_box();
  std::priority_queue<detail::Box> heap;
  double total = root.value, total_err = root.error;
  heap.push(std::move(root));
  while (total_err > tolerance_for(opts, total)) {
    if (out.evals + 2 * rule.points_per_box() > opts.max_evals) break;
    detail::Box worst = heap.top();
    heap.pop();
    const std::size_t ax = worst.split_axis;
    detail::Box left = worst, right = worst;
    left.half[ax] *= 0.5;
    right.half[ax] *= 0.5;
    left.center[ax] -= left.half[ax];
    right.center[ax] += right.half[ax];
    rule.apply(g, left);
    rule.apply(g, right);
    out.evals += 2 * rule.points_per_box();
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }
  double sum = 0.0, err = 0.0;
  for (; !heap.empty(); heap.pop()) {
    sum += heap.top().value;
    err += heap.top().error;
  }
  out.value = sum;
  out.error = err;
  out.converged = std::isfinite(sum) && err <= tolerance_for(opts, sum);
  return out;
}

}  // namespace pprior
