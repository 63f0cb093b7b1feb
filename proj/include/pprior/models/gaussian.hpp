#pragma once

// Gaussian sequences with location-scale prior d(theta) d(sigma) / sigma^p.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "pprior/error.hpp"
#include "pprior/measure.hpp"
#include "pprior/quadrature.hpp"
#include "pprior/random.hpp"

namespace pprior::gaussian {

struct GaussianImproperModel {
  std::size_t n = 2;
  double p = 1.0;
  /// Mutation hook: scales the closed-form intensity by (1 + perturbation).
  /// Exists so the verification suite can prove it notices a wrong formula.
  double perturbation = 0.0;

  void validate() const {
    if (n < 2 || !(static_cast<double>(n) > 2.0 - p) || !std::isfinite(p))
      fail(ErrorCode::Domain, "gaussian model needs n >= 2 and n > 2 - p (n=" + std::to_string(n) +
                                  ", p=" + std::to_string(p) + ")");
  }

  /// Degrees of freedom n + p - 2 of the predictive Student-t.
  double dof() const { return static_cast<double>(n) + p - 2.0; }

  GaussianImproperModel extended(std::size_t k) const { return {n + k, p, perturbation}; }
};

struct Moments {
  double mean = 0.0;
  double ssq = 0.0;
};

/// Two-pass mean and sum of squared deviations.
inline Moments moments(PointView y) {
  Moments m;
  for (double v : y) m.mean += v;
  m.mean /= static_cast<double>(y.size());
  for (double v : y) m.ssq += (v - m.mean) * (v - m.mean);
  return m;
}

/// Running (length, mean, ssq) with Welford's update.
struct ExtensionState {
  std::size_t length = 0;
  double mean = 0.0;
  double ssq = 0.0;

  static ExtensionState from(PointView y) {
    ExtensionState s;
    for (double v : y) s.push(v);
    return s;
  }

  void push(double v) {
    ++length;
    const double delta = v - mean;
    mean += delta / static_cast<double>(length);
    ssq += delta * (v - mean);
  }

  /// Sample standard deviation s = sqrt(ssq / (length - 1)).
  double sd() const { return length > 1 ? std::sqrt(ssq / static_cast<double>(length - 1)) : 0.0; }
};

inline double log_intensity_constant(const GaussianImproperModel& m) {
  const double n = static_cast<double>(m.n);
  return std::lgamma(0.5 * m.dof()) + 0.5 * (m.p - 3.0) * std::log(2.0) - 0.5 * (n - 1.0) * std::log(M_PI) -
         0.5 * std::log(n);
}

/// lambda_n(y); +inf on the diagonal.
inline double gaussian_intensity(const GaussianImproperModel& m, PointView y) {
  m.validate();
  if (y.size() != m.n) fail(ErrorCode::Domain, "gaussian_intensity: expected " + std::to_string(m.n) + " values");
  const double ssq = moments(y).ssq;
  if (!(ssq > 0.0)) return kInfinity;
  const double v = std::exp(log_intensity_constant(m) - 0.5 * m.dof() * std::log(ssq));
  return m.perturbation == 0.0 ? v : v * (1.0 + m.perturbation);
}

/// phi_n(y; theta, sigma), the product normal density.
inline double normal_likelihood(PointView y, double theta, double sigma) {
  if (!(sigma > 0.0)) return 0.0;
  double q = 0.0;
  for (double v : y) q += (v - theta) * (v - theta);
  const double n = static_cast<double>(y.size());
  return std::exp(-0.5 * q / (sigma * sigma) - n * std::log(sigma) - 0.5 * n * std::log(2.0 * M_PI));
}

/// lambda_n(y) by adaptive 2-D quadrature of phi_n(y; theta, sigma) sigma^-p,
/// without using the closed form.
inline double gaussian_intensity_quadrature(const GaussianImproperModel& m, PointView y,
                                            const QuadOptions& opts = {0.0, 1e-9, 10'000'000}) {
  m.validate();
  const auto mo = moments(y);
  if (!(mo.ssq > 0.0)) return kInfinity;
  const double n = static_cast<double>(y.size());
  const double spread = std::sqrt(mo.ssq / n);
  QuadOptions inner = opts;
  inner.rel_tol = opts.rel_tol * 1e-1;
  auto outer = integrate_1d(
      [&](double sigma) {
        if (!(sigma > 0.0)) return 0.0;
        auto r = integrate_1d([&](double theta) { return normal_likelihood(y, theta, sigma); },
                              Axis::real_line(mo.mean, sigma / std::sqrt(n)), inner);
        return r.value * std::pow(sigma, -m.p);
      },
      Axis{0.0, kInfinity, spread, spread}, opts);
  return require_converged(outer, "gaussian_intensity_quadrature");
}

inline double gaussian_posterior_density(const GaussianImproperModel& m, PointView y, double theta, double sigma) {
  const double lambda = gaussian_intensity(m, y);
  if (std::isinf(lambda)) fail(ErrorCode::DivergentIntensity, "posterior undefined on the diagonal");
  if (!(sigma > 0.0)) return 0.0;
  return normal_likelihood(y, theta, sigma) * std::pow(sigma, -m.p) / lambda;
}

/// lambda_{n+k}(y, x) / lambda_n(y).
inline double student_predictive_density(const GaussianImproperModel& m, PointView y, PointView x) {
  const double base = gaussian_intensity(m, y);
  if (std::isinf(base)) fail(ErrorCode::DivergentIntensity, "predictive undefined on the diagonal");
  std::vector<double> yx(y.begin(), y.end());
  yx.insert(yx.end(), x.begin(), x.end());
  const double ext = gaussian_intensity(m.extended(x.size()), yx);
  return ext / base;
}

struct GossetOptions {
  /// Test hook: use this innovation instead of a Student-t draw.
  std::optional<double> forced_innovation;
};

struct GossetPath {
  std::vector<double> sequence;
  ExtensionState state;
};

namespace detail {

inline void check_extendable(const GaussianImproperModel& m, const ExtensionState& s) {
  if (!(s.ssq > 0.0)) fail(ErrorCode::DegenerateSsq, "gosset rule needs a sequence with nonzero spread");
  if (!(static_cast<double>(s.length) + m.p - 2.0 > 0.0))
    fail(ErrorCode::Domain, "gosset rule needs n + p - 2 > 0");
}

// One step of the recursion from a state of length m.
inline double gosset_step(const GaussianImproperModel& model, const ExtensionState& s, double eps) {
  const double m = static_cast<double>(s.length);
  return s.mean + s.sd() * eps * std::sqrt((m * m - 1.0) / (m * (m + model.p - 2.0)));
}

}  // namespace detail

/// Extends y by `steps` values of the Gosset recursion.
inline GossetPath gosset_extend(const GaussianImproperModel& model, PointView y, std::size_t steps,
                                std::uint64_t seed, const GossetOptions& opts = {}) {
  auto state = ExtensionState::from(y);
  detail::check_extendable(model, state);
  GossetPath out;
  out.sequence.assign(y.begin(), y.end());
  out.sequence.reserve(y.size() + steps);
  Rng rng = make_stream(seed, 0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double df = static_cast<double>(state.length) + model.p - 2.0;
    const double eps = opts.forced_innovation ? *opts.forced_innovation : sample_student_t(df, rng);
    const double next = detail::gosset_step(model, state, eps);
    out.sequence.push_back(next);
    state.push(next);
  }
  out.state = state;
  return out;
}

struct GossetTerminal {
  double ybar = 0.0;
  double s = 0.0;
  /// |ybar_m - ybar_{m/2}|, a convergence diagnostic.
  double drift = 0.0;
};

/// Terminal (ybar, s) of `paths` independent extensions; path i draws from
/// stream i of `seed`.
inline std::vector<GossetTerminal> gosset_limit(const GaussianImproperModel& model, PointView y,
                                                std::size_t steps, std::size_t paths, std::uint64_t seed) {
  const auto start = ExtensionState::from(y);
  detail::check_extendable(model, start);
  std::vector<GossetTerminal> out(paths);
  parallel_for(paths, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    auto state = start;
    double half_mean = state.mean;
    for (std::size_t k = 0; k < steps; ++k) {
      const double df = static_cast<double>(state.length) + model.p - 2.0;
      state.push(detail::gosset_step(model, state, sample_student_t(df, rng)));
      if (k + 1 == steps / 2) half_mean = state.mean;
    }
    out[i] = {state.mean, state.sd(), std::abs(state.mean - half_mean)};
  });
  return out;
}

/// Exact posterior draw of (theta, sigma): precision from a gamma law, then
/// theta given sigma from a normal law.
inline std::vector<double> sample_conjugate_posterior(const GaussianImproperModel& m, PointView y, Rng& rng) {
  const auto mo = moments(y);
  const double n = static_cast<double>(y.size());
  const double tau = std::gamma_distribution<double>(0.5 * m.dof(), 2.0 / mo.ssq)(rng);
  const double sigma = 1.0 / std::sqrt(tau);
  const double theta = std::normal_distribution<double>(mo.mean, sigma / std::sqrt(n))(rng);
  return {theta, sigma};
}

inline IntensityModel make_model(const GaussianImproperModel& g) {
  g.validate();
  IntensityModel m;
  m.id = "gaussian";
  m.param_dim = 2;
  m.obs_dim = g.n;
  m.params = {{"theta", -kInfinity, kInfinity}, {"sigma", 0.0, kInfinity}};
  const double p = g.p;
  m.prior_density = [p](PointView x) { return x[1] > 0.0 ? std::pow(x[1], -p) : 0.0; };
  m.likelihood_density = [](PointView x, PointView y) { return normal_likelihood(y, x[0], x[1]); };
  m.marginal_intensity = [g](PointView y) { return gaussian_intensity(g, y); };
  m.closed_form_marginal = true;
  m.marginal_quadrature = [g](PointView y) { return gaussian_intensity_quadrature(g, y); };
  // Distance to the diagonal line {c * 1}.
  m.singular_distance = [](PointView y) { return std::sqrt(moments(y).ssq); };
  m.posterior_hint = [](PointView y) {
    const auto mo = moments(y);
    const double spread = std::sqrt(mo.ssq / static_cast<double>(y.size()));
    return std::vector<AxisHint>{{mo.mean, spread}, {spread, spread}};
  };
  m.posterior_sampler = [g](PointView y, Rng& rng) { return sample_conjugate_posterior(g, y, rng); };
  return m;
}

}  // namespace pprior::gaussian
