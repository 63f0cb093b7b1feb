#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pprior/error.hpp"
#include "pprior/random.hpp"

namespace pprior {

struct GridOptions {
  std::size_t nodes = 4096;
  /// Window edges sit where the density drops below this fraction of its peak.
  double peak_floor = 1e-12;
};

/// A univariate law tabulated on a sinh-spaced grid: nodes are dense near the
/// mode and geometrically spread in the tails, so heavy-tailed densities
/// (Cauchy-like posteriors) and bounded ones share one representation.
/// Sampling is by inverse CDF with linear interpolation inside a cell.
class GridDistribution {
 public:
  GridDistribution() = default;

  /// `density` need not be normalized. `lo`/`hi` bound its support and may be
  /// infinite; `start` and `scale` hint where the bulk of the mass lies.
  static GridDistribution build(const std::function<double(double)>& density, double lo, double hi, double start,
                                double scale, const GridOptions& opts = {}) {
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    auto safe = [&](double x) {
      double v = density(x);
      return std::isfinite(v) && v > 0.0 ? v : 0.0;
    };
    auto inside = [&](double x) { return x > lo && x < hi; };

    // Coarse mode search on a sinh probe set around `start`.
    double mode = std::clamp(start, std::nextafter(lo, hi), std::nextafter(hi, lo));
    double peak = safe(mode);
    const double vmax = std::asinh(1e8);
    constexpr int probes = 4001;
    for (int k = 0; k < probes; ++k) {
      const double v = -vmax + 2.0 * vmax * k / (probes - 1);
      const double x = start + scale * std::sinh(v);
      if (!inside(x)) continue;
      const double d = safe(x);
      if (d > peak) {
        peak = d;
        mode = x;
      }
    }
    if (!(peak > 0.0)) fail(ErrorCode::ZeroIntensity, "grid distribution: density vanishes on every probe");

    // Half-maximum widths give the grid scale; the window edges come from
    // doubling outward until the floor is crossed or the support ends.
    auto expand = [&](double dir, double threshold) {
      double step = scale;
      for (int it = 0; it < 400; ++it) {
        const double x = mode + dir * step;
        if (!inside(x)) return dir > 0 ? hi : lo;
        if (safe(x) < threshold * peak) return x;
        step *= 2.0;
      }
      return mode + dir * step;
    };
    auto half_width = [&](double dir) {
      const double edge = expand(dir, 0.5);
      // A side that reaches the support before halving says nothing about width.
      if (!std::isfinite(edge) || edge == lo || edge == hi) return std::numeric_limits<double>::infinity();
      double near = mode, far = edge;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (near + far);
        (safe(mid) >= 0.5 * peak ? near : far) = mid;
      }
      return std::abs(far - mode);
    };
    GridDistribution g;
    g.lower_ = expand(-1.0, opts.peak_floor);
    g.upper_ = expand(1.0, opts.peak_floor);
    if (!std::isfinite(g.lower_) || !std::isfinite(g.upper_))
      fail(ErrorCode::NonNormalizable, "grid distribution: density does not decay on an unbounded side");
    double hw = std::numeric_limits<double>::infinity();
    for (double dir : {-1.0, 1.0}) {
      const double w = half_width(dir);
      if (w > 0.0 && std::isfinite(w)) hw = std::min(hw, w);
    }
    g.center_ = mode;
    g.scale_ = std::isfinite(hw) ? hw : scale;

    const std::size_t n = std::max<std::size_t>(opts.nodes, 16);
    const double u0 = std::asinh((g.lower_ - mode) / g.scale_);
    const double u1 = std::asinh((g.upper_ - mode) / g.scale_);
    const double du = (u1 - u0) / static_cast<double>(n - 1);
    g.u_.resize(n);
    g.weight_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (i + 1 == n) ? u1 : u0 + du * static_cast<double>(i);
      g.u_[i] = u;
      double x = g.to_x(u);
      double d = safe(x);
      if (d == 0.0 && (i == 0 || i + 1 == n)) {
        // Support endpoints can be 0 * inf in the raw density; probe just inside.
        const double nudge = (i == 0 ? 1.0 : -1.0) * 1e-6 * du;
        d = safe(g.to_x(u + nudge));
      }
      g.weight_[i] = d * g.scale_ * std::cosh(u);
    }
    g.cdf_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i)
      g.cdf_[i] = g.cdf_[i - 1] + 0.5 * (g.weight_[i - 1] + g.weight_[i]) * (g.u_[i] - g.u_[i - 1]);
    g.mass_ = g.cdf_.back();
    if (!(g.mass_ > 0.0) || !std::isfinite(g.mass_)) fail(ErrorCode::NonConverged, "grid distribution: no mass");
    for (double& c : g.cdf_) c /= g.mass_;
    return g;
  }

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  /// Integral of the unnormalized density over the window.
  double mass() const { return mass_; }

  double cdf(double x) const {
    if (x <= lower_) return 0.0;
    if (x >= upper_) return 1.0;
    const double u = std::asinh((x - center_) / scale_);
    const auto it = std::upper_bound(u_.begin(), u_.end(), u);
    if (it == u_.begin()) return 0.0;
    if (it == u_.end()) return 1.0;
    const std::size_t i = static_cast<std::size_t>(it - u_.begin()) - 1;
    const double f = (u - u_[i]) / (u_[i + 1] - u_[i]);
    return cdf_[i] + f * (cdf_[i + 1] - cdf_[i]);
  }

  double quantile(double p) const {
    p = std::clamp(p, 0.0, 1.0);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
    if (it == cdf_.begin()) return to_x(u_.front());
    if (it == cdf_.end()) return to_x(u_.back());
    const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[i - 1], c1 = cdf_[i];
    const double f = c1 > c0 ? (p - c0) / (c1 - c0) : 0.5;
    return to_x(u_[i - 1] + f * (u_[i] - u_[i - 1]));
  }

  double sample(Rng& rng) const { return quantile(uniform01(rng)); }

  double median() const { return quantile(0.5); }

 private:
  double to_x(double u) const { return std::clamp(center_ + scale_ * std::sinh(u), lower_, upper_); }

  double lower_ = 0.0, upper_ = 0.0, center_ = 0.0, scale_ = 1.0, mass_ = 0.0;
  std::vector<double> u_, weight_, cdf_;
};

}  // namespace pprior
