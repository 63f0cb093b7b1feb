#pragma once

// The exponential-ratio model: X ~ Exp(theta phi), Y ~ Exp(phi), prior
// pi(theta) d(theta) rho(phi) d(phi). The ratio of interest is z = y / x
// throughout; the reciprocal x / y = 1 / z maps the wedge a < x/y < b onto
// 1/b < z < 1/a.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "pprior/divergence.hpp"
#include "pprior/error.hpp"
#include "pprior/measure.hpp"
#include "pprior/quadrature.hpp"
#include "pprior/random.hpp"

namespace pprior::paradox {

/// A named prior on (0, inf) with the integrability facts routing needs.
struct NamedPrior {
  std::string id;
  Json params = Json::object();
  std::function<double(double)> density;
  bool locally_finite = true;
  bool totally_finite = false;
  double total_mass = kInfinity;
  /// Upper end of the support (inf unless truncated).
  double support_upper = kInfinity;
  /// For phi priors: closed form of the moment integral
  /// M(a) = int phi^2 exp(-phi a) rho(phi) d(phi), when known.
  std::function<double(double)> moment;

  Json to_json() const { return {{"id", id}, {"params", params}}; }
};

/// theta priors: "flat" (pi = 1), "flat-truncated" {upper} (pi = 1 on
/// (0, upper)), "exp" {rate} (pi = exp(-rate theta)).
inline NamedPrior make_theta_prior(const std::string& id, const Json& params = Json::object()) {
  NamedPrior p;
  p.id = id;
  p.params = params.is_null() ? Json::object() : params;
  if (id == "flat") {
    p.density = [](double t) { return t > 0.0 ? 1.0 : 0.0; };
  } else if (id == "flat-truncated") {
    const double upper = p.params.value("upper", 10.0);
    if (!(upper > 0.0)) fail(ErrorCode::Config, "flat-truncated prior needs upper > 0");
    p.params["upper"] = upper;
    p.density = [upper](double t) { return t > 0.0 && t < upper ? 1.0 : 0.0; };
    p.totally_finite = true;
    p.total_mass = upper;
    p.support_upper = upper;
  } else if (id == "exp") {
    const double rate = p.params.value("rate", 1.0);
    if (!(rate > 0.0)) fail(ErrorCode::Config, "exp prior needs rate > 0");
    p.params["rate"] = rate;
    p.density = [rate](double t) { return t > 0.0 ? std::exp(-rate * t) : 0.0; };
    p.totally_finite = true;
    p.total_mass = 1.0 / rate;
  } else {
    fail(ErrorCode::Config, "unknown theta prior '" + id + "'");
  }
  return p;
}

/// phi priors: "one" (rho = 1, the baseline), "exp" {rate}.
inline NamedPrior make_phi_prior(const std::string& id, const Json& params = Json::object()) {
  NamedPrior p;
  p.id = id;
  p.params = params.is_null() ? Json::object() : params;
  if (id == "one") {
    p.density = [](double f) { return f > 0.0 ? 1.0 : 0.0; };
    p.moment = [](double a) { return 2.0 / (a * a * a); };
  } else if (id == "exp") {
    const double rate = p.params.value("rate", 1.0);
    if (!(rate > 0.0)) fail(ErrorCode::Config, "exp prior needs rate > 0");
    p.params["rate"] = rate;
    p.density = [rate](double f) { return f > 0.0 ? std::exp(-rate * f) : 0.0; };
    p.moment = [rate](double a) { return 2.0 / ((a + rate) * (a + rate) * (a + rate)); };
    p.totally_finite = true;
    p.total_mass = 1.0 / rate;
  } else {
    fail(ErrorCode::Config, "unknown phi prior '" + id + "'");
  }
  return p;
}

struct ParadoxModel {
  NamedPrior theta = make_theta_prior("flat");
  NamedPrior phi = make_phi_prior("one");

  bool baseline() const { return theta.id == "flat" && phi.id == "one"; }
};

inline ParadoxModel make_paradox(const std::string& theta_id, const std::string& phi_id = "one",
                                 const Json& theta_params = Json::object(), const Json& phi_params = Json::object()) {
  return {make_theta_prior(theta_id, theta_params), make_phi_prior(phi_id, phi_params)};
}

/// theta phi^2 exp(-phi (theta x + y)).
inline double joint_density(double theta, double phi, double x, double y) {
  if (!(theta > 0.0 && phi > 0.0 && x > 0.0 && y > 0.0)) return 0.0;
  return theta * phi * phi * std::exp(-phi * (theta * x + y));
}

inline const QuadOptions kTight{0.0, 1e-11, 5'000'000};

/// int phi^2 exp(-phi a) rho(phi) d(phi).
inline double phi_moment(const ParadoxModel& m, double a) {
  if (m.phi.moment) return m.phi.moment(a);
  const auto r = integrate_1d([&](double f) { return f * f * std::exp(-f * a) * m.phi.density(f); },
                              Axis{0.0, kInfinity, 2.0 / a, 2.0 / a}, kTight);
  return require_converged(r, "phi moment");
}

inline Axis theta_axis(const ParadoxModel& m, double scale) {
  if (std::isfinite(m.theta.support_upper)) return Axis::finite(0.0, m.theta.support_upper);
  return Axis{0.0, kInfinity, scale, scale};
}

/// 1 / (x^2 y), the intensity for pi = 1, rho = 1.
inline double bivariate_intensity_closed(double x, double y) { return 1.0 / (x * x * y); }

/// lambda(x, y) = int pi(theta) theta M(theta x + y) d(theta), which is
/// 2 int theta pi(theta) (theta x + y)^-3 d(theta) in the baseline.
inline double bivariate_intensity(const ParadoxModel& m, double x, double y, const QuadOptions& opts = kTight) {
  if (!(x > 0.0 && y > 0.0)) fail(ErrorCode::Domain, "bivariate intensity needs x, y > 0");
  auto integrand = [&](double t) { return t > 0.0 ? m.theta.density(t) * t * phi_moment(m, t * x + y) : 0.0; };
  const auto axis = theta_axis(m, y / x);
  auto r = integrate_1d(integrand, axis, opts);
  if (r.converged && std::isfinite(r.value)) return r.value;
  const auto cert = divergence_certificate(integrand, expanding_upper_ladder(0.0, y / x, 48), opts);
  if (cert.verdict == MassVerdict::Infinite) fail(ErrorCode::DivergentIntensity, "bivariate intensity diverges");
  if (cert.verdict == MassVerdict::Finite) return cert.value;
  fail(ErrorCode::NonConverged, "bivariate intensity: " + cert.rule);
}

/// Method 1 posterior for theta given (x, y): pi(theta) theta / (theta + z)^3
/// normalized, with rho = 1 as that method assumes.
struct Method1Posterior {
  double z = 0.0;
  double normalizer = 0.0;
  std::function<double(double)> theta_density;

  double density(double theta) const { return theta > 0.0 ? kernel(theta) / normalizer : 0.0; }
  double kernel(double theta) const { return theta_density(theta) * theta / std::pow(theta + z, 3); }
};

inline Method1Posterior method1_posterior(const ParadoxModel& m, double x, double y) {
  if (!(x > 0.0 && y > 0.0)) fail(ErrorCode::Domain, "method1_posterior needs x, y > 0");
  Method1Posterior out;
  out.z = y / x;
  out.theta_density = m.theta.density;
  if (m.theta.id == "flat") {
    // int theta / (theta + z)^3 d(theta) = 1 / (2 z)
    out.normalizer = 1.0 / (2.0 * out.z);
    return out;
  }
  auto k = [&](double t) { return out.kernel(t); };
  auto r = integrate_1d(k, theta_axis(m, out.z), kTight);
  if (!r.converged || !std::isfinite(r.value)) {
    const auto cert = divergence_certificate(k, expanding_upper_ladder(0.0, out.z, 48), kTight);
    if (cert.verdict != MassVerdict::Finite) fail(ErrorCode::DivergentIntensity, "method 1 kernel not integrable");
    out.normalizer = cert.value;
  } else {
    out.normalizer = r.value;
  }
  if (!(out.normalizer > 0.0)) fail(ErrorCode::ZeroIntensity, "method 1 kernel vanishes");
  return out;
}

/// Method 2 kernel pi(theta) theta / (theta + z)^2.
inline double method2_kernel(const ParadoxModel& m, double z, double theta) {
  if (!(theta > 0.0)) return 0.0;
  return m.theta.density(theta) * theta / ((theta + z) * (theta + z));
}

enum class Normalizability { Normalizable, NonNormalizable };

constexpr std::string_view to_string(Normalizability v) {
  return v == Normalizability::Normalizable ? "NORMALIZABLE" : "NON_NORMALIZABLE";
}

struct Method2Result {
  double z = 0.0;
  Normalizability verdict = Normalizability::NonNormalizable;
  double normalizer = kInfinity;
  Certificate certificate;
};

/// Decides whether the Method 2 kernel integrates over theta, from a
/// truncation ladder (0, z 2^k).
inline Method2Result method2_normalization(const ParadoxModel& m, double z) {
  if (!(z > 0.0)) fail(ErrorCode::Domain, "method2 needs z > 0");
  Method2Result out;
  out.z = z;
  auto k = [&](double t) { return method2_kernel(m, z, t); };
  out.certificate = divergence_certificate(k, expanding_upper_ladder(0.0, z, 48), kTight);
  switch (out.certificate.verdict) {
    case MassVerdict::Finite:
      out.verdict = Normalizability::Normalizable;
      // Refine the ladder limit with one integral over the whole half-line.
      out.normalizer = require_converged(integrate_1d(k, theta_axis(m, z), kTight), "method 2 normalizer");
      break;
    case MassVerdict::Infinite: out.verdict = Normalizability::NonNormalizable; break;
    case MassVerdict::Inconclusive: fail(ErrorCode::Inconclusive, "method 2 ladder: " + out.certificate.rule);
  }
  return out;
}

inline double method2_density(const ParadoxModel& m, const Method2Result& r, double theta) {
  if (r.verdict != Normalizability::Normalizable) fail(ErrorCode::NonNormalizable, "method 2 kernel");
  return method2_kernel(m, r.z, theta) / r.normalizer;
}

/// Density of z = y/x given (theta, phi), by quadrature over x of the joint
/// density after the change of variables y = z x.
inline double z_density_given(double theta, double phi, double z) {
  if (!(z > 0.0)) return 0.0;
  const double scale = 1.0 / (phi * (theta + z));
  const auto r = integrate_1d([&](double x) { return x * joint_density(theta, phi, x, z * x); },
                              Axis{0.0, kInfinity, scale, scale}, QuadOptions{0.0, 1e-13, 200'000});
  return r.value;
}

/// P(a < z < b | theta): z / theta ~ F(2, 2), whose CDF is w / (1 + w).
inline double z_interval_probability(double theta, double a, double b) {
  return b / (theta + b) - a / (theta + a);
}

struct ZMarginalResult {
  Observability verdict = Observability::NotObservableZero;
  double value = 0.0;
  Certificate certificate;
};

/// Lambda_z((a, b)) = P_nu({a < y/x < b}). The wedge is mapped to the box
/// (a, b) x (0, inf) in (z, x) with Jacobian x, and the x-range is widened
/// to (2^-k, 2^k) rung by rung.
inline ZMarginalResult z_marginal_observability(const ParadoxModel& m, double a, double b,
                                                const QuadOptions& opts = {0.0, 1e-8, 5'000'000}) {
  if (!(a > 0.0) || !(b < kInfinity) || b < a) fail(ErrorCode::Domain, "z-marginal needs 0 < a <= b < inf");
  ZMarginalResult out;
  if (a == b) return out;
  const bool closed = m.baseline();
  QuadOptions inner = opts;
  inner.rel_tol = opts.rel_tol * 1e-1;
  auto lambda = [&](double x, double y) {
    return closed ? bivariate_intensity_closed(x, y) : bivariate_intensity(m, x, y, inner);
  };
  auto shell = [&](double x0, double x1) {
    return require_converged(
        integrate_interval(
            [&](double z) {
              return integrate_interval([&](double x) { return x * lambda(x, z * x); }, x0, x1, inner).value;
            },
            a, b, opts),
        "z-marginal shell");
  };
  double running = 0.0;
  out.certificate = divergence_certificate(
      [&](std::size_t k) {
        if (k == 0) running = shell(0.5, 2.0);
        else {
          const double lo = std::ldexp(1.0, -static_cast<int>(k) - 1), hi = std::ldexp(1.0, static_cast<int>(k) + 1);
          running += shell(lo, 2.0 * lo) + shell(hi / 2.0, hi);
        }
        return running;
      },
      DivergenceOptions{});
  switch (out.certificate.verdict) {
    case MassVerdict::Finite:
      out.value = out.certificate.value;
      out.verdict = out.value > 0.0 ? Observability::Observable : Observability::NotObservableZero;
      break;
    case MassVerdict::Infinite:
      out.value = kInfinity;
      out.verdict = Observability::NotObservableInfinite;
      break;
    case MassVerdict::Inconclusive: fail(ErrorCode::Inconclusive, "z-marginal ladder: " + out.certificate.rule);
  }
  return out;
}

/// Second route to Lambda_z((a, b)) for a multiplicative prior with finite
/// rho: rho(R+) int pi(theta) P(a < z < b | theta) d(theta).
inline double z_marginal_direct(const ParadoxModel& m, double a, double b) {
  if (!m.phi.totally_finite) fail(ErrorCode::Domain, "direct z-marginal needs a finite phi prior");
  auto f = [&](double t) { return m.theta.density(t) * z_interval_probability(t, a, b); };
  const auto r = integrate_1d(f, theta_axis(m, b), kTight);
  return m.phi.total_mass * require_converged(r, "direct z-marginal");
}

/// Conditional law of (theta, phi) given the ratio z, proportional to
/// pi(theta) rho(phi) p(z | theta, phi), where p(z | .) comes from
/// quadrature over x.
struct ZConditional {
  double z = 0.0;
  double normalizer = 0.0;
  const ParadoxModel* model = nullptr;

  double density(double theta, double phi) const {
    if (!(theta > 0.0 && phi > 0.0)) return 0.0;
    return model->theta.density(theta) * model->phi.density(phi) * z_density_given(theta, phi, z) / normalizer;
  }

  double theta_marginal(double theta) const {
    if (!(theta > 0.0)) return 0.0;
    const auto r = integrate_1d([&](double phi) { return density(theta, phi); }, Axis{0.0, kInfinity, 1.0, 1.0},
                                QuadOptions{0.0, 1e-11, 2'000'000});
    return require_converged(r, "z-conditional theta marginal");
  }
};

inline ZConditional conditional_given_z(const ParadoxModel& m, double z) {
  if (!(z > 0.0)) fail(ErrorCode::Domain, "conditional_given_z needs z > 0");
  if (!m.phi.totally_finite) fail(ErrorCode::NonNormalizable, "conditional given z needs a finite phi prior");
  ZConditional out;
  out.z = z;
  out.model = &m;
  const QuadOptions q{0.0, 1e-11, 5'000'000};
  auto theta_part = [&](double t) {
    if (!(t > 0.0)) return 0.0;
    const auto r = integrate_1d(
        [&](double phi) { return m.phi.density(phi) * z_density_given(t, phi, z); }, Axis{0.0, kInfinity, 1.0, 1.0},
        q);
    return m.theta.density(t) * r.value;
  };
  const auto axis = theta_axis(m, z);
  const auto r = integrate_1d(theta_part, axis, q);
  if (!r.converged || !std::isfinite(r.value)) {
    const auto cert = divergence_certificate(theta_part, expanding_upper_ladder(0.0, z, 48), q);
    if (cert.verdict != MassVerdict::Finite) fail(ErrorCode::NonNormalizable, "conditional given z: " + cert.rule);
    out.normalizer = cert.value;
  } else {
    out.normalizer = r.value;
  }
  if (!(out.normalizer > 0.0)) fail(ErrorCode::NonNormalizable, "conditional given z has no mass");
  return out;
}

/// theta-marginal of the conditional given (x, y), proportional to
/// pi(theta) theta M(theta x + y).
inline std::function<double(double)> xy_theta_marginal(const ParadoxModel& m, double x, double y) {
  const double norm = bivariate_intensity(m, x, y);
  return [&m, x, y, norm](double t) {
    return t > 0.0 ? m.theta.density(t) * t * phi_moment(m, t * x + y) / norm : 0.0;
  };
}

/// z draws for fixed (theta, phi) from the generative model.
inline std::vector<double> sample_ratios(double theta, double phi, std::size_t count, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0);
  std::vector<double> out(count);
  std::exponential_distribution<double> ex(theta * phi), ey(phi);
  for (auto& z : out) {
    const double x = ex(rng);
    z = ey(rng) / x;
  }
  return out;
}

inline const bool ratio_wedge_registered = register_predicate("ratio-wedge", [](const Json& params, std::size_t dim) {
  if (dim != 2) fail(ErrorCode::Config, "ratio-wedge lives in two dimensions");
  const double a = params.at("a").get<double>(), b = params.at("b").get<double>();
  return Predicate([a, b](PointView v) { return v[0] > 0.0 && v[1] > 0.0 && v[1] > a * v[0] && v[1] < b * v[0]; });
});

/// IntensityModel over theta with phi integrated against rho.
inline IntensityModel make_model(const ParadoxModel& pm) {
  IntensityModel m;
  m.id = "paradox";
  m.param_dim = 1;
  m.obs_dim = 2;
  m.params = {{"theta", 0.0, pm.theta.support_upper}};
  m.prior_density = [pm](PointView t) { return pm.theta.density(t[0]); };
  m.likelihood_density = [pm](PointView t, PointView v) {
    if (!(v[0] > 0.0 && v[1] > 0.0 && t[0] > 0.0)) return 0.0;
    return t[0] * phi_moment(pm, t[0] * v[0] + v[1]);
  };
  if (pm.baseline()) {
    m.marginal_intensity = [](PointView v) {
      return v[0] > 0.0 && v[1] > 0.0 ? bivariate_intensity_closed(v[0], v[1]) : 0.0;
    };
    m.closed_form_marginal = true;
  } else {
    m.marginal_intensity = [pm](PointView v) {
      return v[0] > 0.0 && v[1] > 0.0 ? bivariate_intensity(pm, v[0], v[1]) : 0.0;
    };
  }
  m.marginal_quadrature = [pm](PointView v) { return bivariate_intensity(pm, v[0], v[1]); };
  m.singular_distance = [](PointView v) { return std::max(0.0, std::min(v[0], v[1])); };
  m.posterior_hint = [](PointView v) {
    const double z = v[1] / v[0];
    return std::vector<AxisHint>{{z, z}};
  };
  return m;
}

/// Method 1 densities on a uniform midpoint grid of theta.
struct GridDensities {
  double step = 0.0;
  std::vector<double> theta;
  std::vector<double> density;

  Json to_json() const { return {{"step", step}, {"theta", theta}, {"density", density}}; }
  double riemann_sum() const {
    double s = 0.0;
    for (double d : density) s += d;
    return s * step;
  }
};

inline GridDensities tabulate(const std::function<double(double)>& f, double upper, double step) {
  GridDensities g;
  g.step = step;
  const auto count = static_cast<std::size_t>(std::floor(upper / step));
  g.theta.reserve(count);
  g.density.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * step;
    g.theta.push_back(t);
    g.density.push_back(f(t));
  }
  return g;
}

struct ReportOptions {
  double x = 1.0, y = 1.0;
  double a = 0.5, b = 2.0;
  /// Grid upper end and step, in units of z.
  double grid_upper = 4000.0;
  double grid_step = 0.1;
};

/// Method 1 grid, Method 2 verdict, z-marginal verdict and the ladders
/// behind both verdicts.
inline Json paradox_report(const ParadoxModel& m, const ReportOptions& o) {
  const auto m1 = method1_posterior(m, o.x, o.y);
  const double z = m1.z;
  const auto grid = tabulate([&](double t) { return m1.density(t); }, o.grid_upper * z, o.grid_step * z);
  const auto m2 = method2_normalization(m, z);
  Json method2 = {{"verdict", std::string(to_string(m2.verdict))}};
  if (m2.verdict == Normalizability::Normalizable) {
    std::vector<double> d;
    d.reserve(grid.theta.size());
    for (double t : grid.theta) d.push_back(method2_density(m, m2, t));
    method2["density"] = d;
  }
  const auto zm = z_marginal_observability(m, o.a, o.b);
  Json zmj = {{"verdict", std::string(to_string(zm.verdict))}, {"a", o.a}, {"b", o.b}};
  if (zm.verdict == Observability::Observable) zmj["value"] = zm.value;
  return {{"model", {{"theta_prior", m.theta.to_json()}, {"phi_prior", m.phi.to_json()}}},
          {"event", {o.x, o.y}},
          {"z", z},
          {"method1", grid.to_json()},
          {"method2", method2},
          {"z_marginal", zmj},
          {"certificates",
           {{"method2", {{"verdict", std::string(to_string(m2.certificate.verdict))},
                         {"rule", m2.certificate.rule},
                         {"ladder", m2.certificate.ladder}}},
            {"z_marginal", {{"verdict", std::string(to_string(zm.certificate.verdict))},
                            {"rule", zm.certificate.rule},
                            {"ladder", zm.certificate.ladder}}}}}};
}

}  // namespace pprior::paradox
