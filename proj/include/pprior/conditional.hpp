#pragma once

// Per-event conditional laws on parameter space. Each event of an observed
// pattern carries its own posterior, independent of every other event and of
// the region the pattern was observed on.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "pprior/error.hpp"
#include "pprior/grid_distribution.hpp"
#include "pprior/measure.hpp"
#include "pprior/quadrature.hpp"
#include "pprior/random.hpp"

namespace pprior {

struct PosteriorOptions {
  GridOptions grid{};
  QuadOptions quad{0.0, 1e-8, 2'000'000};
  /// Use a model's exact sampler when it has one. Off forces the generic
  /// grid route, which tests use to cross-check the exact sampler.
  bool use_model_sampler = true;
};

namespace detail {

inline Axis param_axis(const ParamAxis& p, const AxisHint& h) {
  const double scale = h.scale > 0.0 && std::isfinite(h.scale) ? h.scale : 1.0;
  if (std::isinf(p.lo) && std::isinf(p.hi)) return Axis::real_line(h.center, scale);
  if (std::isinf(p.hi)) return Axis{p.lo, p.hi, h.center, std::max(scale, h.center - p.lo)};
  if (std::isinf(p.lo)) return Axis{p.lo, p.hi, h.center, std::max(scale, p.hi - h.center)};
  return Axis::finite(p.lo, p.hi);
}

struct LawState {
  IntensityModel model;
  Point event;
  double normalizer = 0.0;
  PosteriorOptions opts;
  std::vector<AxisHint> hints;

  mutable std::once_flag grid_once;
  mutable GridDistribution first_axis;

  double density(PointView x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] >= model.params[i].lo && x[i] <= model.params[i].hi)) return 0.0;
    const double prior = model.prior_density(x);
    if (prior == 0.0) return 0.0;
    // near a scale of zero the likelihood underflows before the prior overflows
    const double lik = model.likelihood_density(x, event);
    if (lik == 0.0) return 0.0;
    return lik * prior / normalizer;
  }

  // Axis-0 law: the density itself in one dimension, the marginal over
  // axis 1 in two.
  const GridDistribution& axis0() const {
    std::call_once(grid_once, [&] {
      const auto& p0 = model.params[0];
      std::function<double(double)> f;
      if (model.param_dim == 1) {
        f = [&](double t) { return density(PointView(&t, 1)); };
      } else {
        // Both two-parameter families are location-scale: far from the
        // location centre the scale posterior moves out proportionally.
        f = [&](double t) {
          AxisHint h1 = hints[1];
          if (hints[0].scale > 0.0) h1.scale *= 1.0 + std::abs(t - hints[0].center) / hints[0].scale;
          const Axis a1 = param_axis(model.params[1], h1);
          double pt[2] = {t, 0.0};
          return integrate_1d(
                     [&](double s) {
                       pt[1] = s;
                       return density(PointView(pt, 2));
                     },
                     a1, opts.quad)
              .value;
        };
      }
      first_axis = GridDistribution::build(f, p0.lo, p0.hi, hints[0].center, hints[0].scale, opts.grid);
    });
    return first_axis;
  }

  Point draw(Rng& rng) const {
    if (opts.use_model_sampler && model.posterior_sampler) return model.posterior_sampler(event, rng);
    const double t0 = axis0().sample(rng);
    if (model.param_dim == 1) return {t0};
    const auto& p1 = model.params[1];
    auto conditional = [&](double s) {
      const double pt[2] = {t0, s};
      return density(PointView(pt, 2));
    };
    const auto g = GridDistribution::build(conditional, p1.lo, p1.hi, hints[1].center, hints[1].scale, opts.grid);
    return {t0, g.sample(rng)};
  }
};

}  // namespace detail

/// The conditional law nu(x) p_x(y) / lambda(y) attached to one event.
class PosteriorLaw {
 public:
  const Point& event() const { return state_->event; }
  double normalizer() const { return state_->normalizer; }
  std::size_t dim() const { return state_->model.param_dim; }
  const std::vector<ParamAxis>& params() const { return state_->model.params; }
  const std::vector<AxisHint>& hints() const { return state_->hints; }

  double density(PointView x) const { return state_->density(x); }
  double log_density(PointView x) const { return std::log(state_->density(x)); }

  Point draw(Rng& rng) const { return state_->draw(rng); }

  /// Grid law of the first parameter coordinate (its marginal when the
  /// parameter is two-dimensional).
  const GridDistribution& first_axis_law() const { return state_->axis0(); }

 private:
  explicit PosteriorLaw(std::shared_ptr<const detail::LawState> s) : state_(std::move(s)) {}
  friend PosteriorLaw posterior_for_event(const IntensityModel&, PointView, const PosteriorOptions&);
  std::shared_ptr<const detail::LawState> state_;
};

inline PosteriorLaw posterior_for_event(const IntensityModel& model, PointView y, const PosteriorOptions& opts = {}) {
  if (y.size() != model.obs_dim) fail(ErrorCode::Domain, "event dimension does not match the model");
  if (model.param_dim > 2) fail(ErrorCode::Domain, "posterior sampling supports at most two parameters");
  const double lambda = model.marginal_intensity(y);
  if (std::isinf(lambda)) fail(ErrorCode::DivergentIntensity, "intensity is infinite at this event");
  if (!(lambda > 0.0)) fail(ErrorCode::ZeroIntensity, "intensity vanishes at this event");
  auto state = std::make_shared<detail::LawState>();
  state->model = model;
  state->event.assign(y.begin(), y.end());
  state->normalizer = lambda;
  state->opts = opts;
  if (model.posterior_hint) state->hints = model.posterior_hint(y);
  state->hints.resize(model.param_dim);
  return PosteriorLaw(std::move(state));
}

/// Product of per-event laws, in the stored order of the pattern.
struct JointPosterior {
  std::vector<PosteriorLaw> laws;

  std::size_t size() const { return laws.size(); }

  /// Product density at one parameter per event.
  double density(const std::vector<Point>& xs) const {
    if (xs.size() != laws.size()) fail(ErrorCode::Domain, "one parameter per event is required");
    double d = 1.0;
    for (std::size_t i = 0; i < laws.size(); ++i) d *= laws[i].density(xs[i]);
    return d;
  }
};

inline JointPosterior joint_posterior(const IntensityModel& model, const PointPattern& pattern,
                                      const PosteriorOptions& opts = {}) {
  JointPosterior out;
  out.laws.reserve(pattern.size());
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    try {
      out.laws.push_back(posterior_for_event(model, pattern.events[i], opts));
    } catch (const Error& e) {
      throw Error(e.code(), "event " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

/// `count` independent draws; stream i of `seed` feeds draw i.
inline std::vector<Point> sample_posterior(const PosteriorLaw& law, std::size_t count, std::uint64_t seed) {
  std::vector<Point> out(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    out[i] = law.draw(rng);
  });
  return out;
}

/// CSV with columns event_index, draw_index, <parameter names...>.
inline void write_posterior_csv(std::ostream& os, const std::vector<std::string>& names,
                                const std::vector<std::vector<Point>>& draws_per_event) {
  os << "event_index,draw_index";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  char buf[32];
  for (std::size_t e = 0; e < draws_per_event.size(); ++e) {
    for (std::size_t d = 0; d < draws_per_event[e].size(); ++d) {
      os << e << ',' << d;
      for (double v : draws_per_event[e][d]) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
      }
      os << '\n';
    }
  }
}

}  // namespace pprior
