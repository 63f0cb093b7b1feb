#pragma once

// Cauchy sequences with location-scale prior d(theta1) d(theta2) / theta2^p.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pprior/error.hpp"
#include "pprior/measure.hpp"
#include "pprior/quadrature.hpp"

namespace pprior::cauchy {

struct CauchyImproperModel {
  std::size_t n = 3;
  double p = 2.0;

  void validate() const {
    if (n < 2 || !(p > 0.0) || !(p < static_cast<double>(n)))
      fail(ErrorCode::Domain, "cauchy model needs 0 < p < n and n >= 2 (n=" + std::to_string(n) +
                                  ", p=" + std::to_string(p) + ")");
  }

  bool integer_p() const { return p == std::floor(p); }
  /// Whether a closed form exists: integer p >= 2, or the (2, 1) case.
  bool has_closed_form() const { return integer_p() && (p >= 2.0 || (n == 2 && p == 1.0)); }
};

inline double cauchy_density(double y, double loc, double scale) {
  const double u = (y - loc) / scale;
  return 1.0 / (std::numbers::pi * scale * (1.0 + u * u));
}

/// Product Cauchy density f_n(y; theta).
inline double cauchy_likelihood(PointView y, double loc, double scale) {
  if (!(scale > 0.0)) return 0.0;
  double f = 1.0;
  for (double v : y) f *= cauchy_density(v, loc, scale);
  return f;
}

namespace detail {

// Smallest pairwise gap relative to the range of y.
inline double relative_gap(PointView y) {
  std::vector<double> s(y.begin(), y.end());
  std::sort(s.begin(), s.end());
  const double range = s.back() - s.front();
  double gap = kInfinity;
  for (std::size_t i = 1; i < s.size(); ++i) gap = std::min(gap, s[i] - s[i - 1]);
  return range > 0.0 ? gap / range : 0.0;
}

// Neumaier-compensated accumulator in extended precision.
struct CompensatedSum {
  long double sum = 0.0L, comp = 0.0L;
  void add(long double v) {
    const long double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  long double value() const { return sum + comp; }
};

}  // namespace detail

inline constexpr double kCoincidentGap = 1e-8;

/// Result of the alternating-sum closed form with its conditioning.
struct ClosedFormEvaluation {
  double value = 0.0;
  /// |sum| / sum |terms|; small values mean heavy cancellation.
  double condition = 1.0;
  bool special_case = false;
};

/// Evaluates the alternating closed form for integer p >= 2, or the
/// registered special cases lambda_{2,1} and lambda_{3,2}.
inline ClosedFormEvaluation cauchy_closed_form(const CauchyImproperModel& m, PointView y) {
  m.validate();
  if (y.size() != m.n) fail(ErrorCode::Domain, "cauchy_intensity: expected " + std::to_string(m.n) + " values");
  if (!m.has_closed_form()) fail(ErrorCode::Domain, "no closed form for this (n, p); use quadrature");
  if (detail::relative_gap(y) < kCoincidentGap)
    fail(ErrorCode::CoincidentCoordinates, "cauchy_intensity: coordinates coincide");
  constexpr double pi = std::numbers::pi;
  if (m.n == 2 && m.p == 1.0) return {1.0 / (2.0 * std::abs(y[0] - y[1])), 1.0, true};
  if (m.n == 3 && m.p == 2.0)
    return {1.0 / (2.0 * pi * std::abs((y[0] - y[1]) * (y[1] - y[2]) * (y[0] - y[2]))), 1.0, true};

  const std::size_t n = m.n;
  const int k = static_cast<int>(n) - static_cast<int>(m.p);
  std::vector<long double> d(n, 1.0L);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t t = 0; t < n; ++t)
      if (t != r) d[r] *= static_cast<long double>(y[t]) - static_cast<long double>(y[r]);

  detail::CompensatedSum pos, neg;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = r + 1; s < n; ++s) {
      const long double diff = static_cast<long double>(y[s]) - static_cast<long double>(y[r]);
      long double term = std::pow(std::abs(diff), static_cast<long double>(k)) / (d[r] * d[s]);
      if (k % 2 == 0) term *= std::log(std::abs(diff));
      // (r, s) and (s, r) contribute equally.
      term *= 2.0L;
      (term >= 0.0L ? pos : neg).add(term);
    }
  }
  const long double total = pos.value() + neg.value();
  const long double magnitude = pos.value() - neg.value();
  long double value;
  if (k % 2 != 0) {
    const long double sign = ((k + 1) / 2) % 2 == 0 ? 1.0L : -1.0L;
    value = sign * total / (std::pow(static_cast<long double>(pi), static_cast<long double>(n - 2)) *
                            std::pow(2.0L, static_cast<long double>(k + 1)));
  } else {
    // Sign (-1)^{k/2 + 1}: the log sum is negative when k/2 is even and
    // positive when it is odd, checked against quadrature for k = 2, 4.
    const long double sign = (k / 2) % 2 == 0 ? -1.0L : 1.0L;
    value = sign * total / (std::pow(static_cast<long double>(pi), static_cast<long double>(n - 1)) *
                            std::pow(2.0L, static_cast<long double>(k)));
  }
  const double condition = magnitude > 0.0L ? static_cast<double>(std::abs(total) / magnitude) : 0.0;
  return {static_cast<double>(value), condition, false};
}

/// lambda_{n,p}(y) by 2-D adaptive quadrature of f_n(y; theta) theta2^-p.
inline double cauchy_intensity_quadrature(const CauchyImproperModel& m, PointView y,
                                          const QuadOptions& opts = {0.0, 1e-9, 20'000'000}) {
  m.validate();
  if (y.size() != m.n) fail(ErrorCode::Domain, "cauchy_intensity: expected " + std::to_string(m.n) + " values");
  if (detail::relative_gap(y) < kCoincidentGap)
    fail(ErrorCode::CoincidentCoordinates, "cauchy_intensity: coordinates coincide");
  std::vector<double> s(y.begin(), y.end());
  std::sort(s.begin(), s.end());
  const double range = s.back() - s.front();
  const double center = 0.5 * (s.front() + s.back());
  QuadOptions inner = opts;
  inner.rel_tol = opts.rel_tol * 1e-1;
  std::vector<double> cuts;
  auto outer = integrate_1d(
      [&](double scale) {
        if (!(scale > 0.0)) return 0.0;
        // Peaks of width `scale` sit at every y_r.
        cuts.clear();
        for (double v : s)
          for (double off : {-50.0, -5.0, -1.0, 0.0, 1.0, 5.0, 50.0}) cuts.push_back(v + off * scale);
        auto r = integrate_1d([&](double loc) { return cauchy_likelihood(y, loc, scale); },
                              Axis::real_line(center, std::max(scale, range)), inner, cuts);
        return r.value * std::pow(scale, -m.p);
      },
      Axis{0.0, kInfinity, range, range}, opts, std::vector<double>{range * 1e-3, range * 1e-2, range * 0.1});
  return require_converged(outer, "cauchy_intensity_quadrature");
}

/// The closed form with a quadrature fallback under heavy cancellation.
inline double cauchy_intensity_closed(const CauchyImproperModel& m, PointView y) {
  const auto e = cauchy_closed_form(m, y);
  if (e.special_case || e.condition >= 1e-8) return e.value;
  return cauchy_intensity_quadrature(m, y);
}

/// Closed form where one exists, quadrature otherwise.
inline double cauchy_intensity(const CauchyImproperModel& m, PointView y) {
  return m.has_closed_form() ? cauchy_intensity_closed(m, y) : cauchy_intensity_quadrature(m, y);
}

/// |pi y_tail^2 lambda_{n,p}(head, tail) / lambda_{n-1,p-1}(head) - 1|.
inline double recurrence_check(const CauchyImproperModel& m, PointView head, double tail) {
  m.validate();
  if (head.size() + 1 != m.n) fail(ErrorCode::Domain, "recurrence_check: head must have n-1 values");
  const CauchyImproperModel reduced{m.n - 1, m.p - 1.0};
  reduced.validate();
  std::vector<double> full(head.begin(), head.end());
  full.push_back(tail);
  const double top = cauchy_intensity(m, full);
  const double bottom = cauchy_intensity(reduced, head);
  return std::abs(std::numbers::pi * tail * tail * top / bottom - 1.0);
}

inline IntensityModel make_model(const CauchyImproperModel& c) {
  c.validate();
  IntensityModel m;
  m.id = "cauchy";
  m.param_dim = 2;
  m.obs_dim = c.n;
  m.params = {{"theta1", -kInfinity, kInfinity}, {"theta2", 0.0, kInfinity}};
  const double p = c.p;
  m.prior_density = [p](PointView x) { return x[1] > 0.0 ? std::pow(x[1], -p) : 0.0; };
  m.likelihood_density = [](PointView x, PointView y) { return cauchy_likelihood(y, x[0], x[1]); };
  // Coincident coordinates are part of the singular set, where the
  // intensity is infinite.
  m.marginal_intensity = [c](PointView y) {
    if (detail::relative_gap(y) < kCoincidentGap) return kInfinity;
    return cauchy_intensity(c, y);
  };
  m.closed_form_marginal = c.has_closed_form();
  m.marginal_quadrature = [c](PointView y) { return cauchy_intensity_quadrature(c, y); };
  m.singular_distance = [](PointView y) {
    double gap = kInfinity;
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = i + 1; j < y.size(); ++j) gap = std::min(gap, std::abs(y[i] - y[j]));
    return gap / std::numbers::sqrt2;
  };
  m.posterior_hint = [](PointView y) {
    std::vector<double> s(y.begin(), y.end());
    std::sort(s.begin(), s.end());
    const double med = s[s.size() / 2];
    const double spread = std::max(1e-300, 0.5 * (s.back() - s.front()));
    return std::vector<AxisHint>{{med, spread}, {spread, spread}};
  };
  return m;
}

}  // namespace pprior::cauchy
