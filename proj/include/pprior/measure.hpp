#pragma once

// Mean measures on observation space: intensity models, sampling regions,
// observability, and Poisson point patterns restricted to a region.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pprior/divergence.hpp"
#include "pprior/error.hpp"
#include "pprior/quadrature.hpp"
#include "pprior/random.hpp"

namespace pprior {

using Point = std::vector<double>;
using PointView = std::span<const double>;
using Json = nlohmann::json;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ParamAxis {
  std::string name;
  double lo = -kInfinity;
  double hi = kInfinity;
};

/// Where the posterior mass for one event sits along one parameter axis.
struct AxisHint {
  double center = 0.0;
  double scale = 1.0;
};

/// A model family with its (possibly improper) prior. All evaluators are pure
/// and safe for concurrent use once the model is built.
struct IntensityModel {
  std::string id;
  std::size_t param_dim = 1;
  std::size_t obs_dim = 1;
  std::vector<ParamAxis> params;

  std::function<double(PointView theta)> prior_density;
  std::function<double(PointView theta, PointView y)> likelihood_density;
  /// lambda(y); +inf on singular sets.
  std::function<double(PointView y)> marginal_intensity;
  bool closed_form_marginal = false;
  /// Independent quadrature route for lambda(y), when the model offers one.
  std::function<double(PointView y)> marginal_quadrature;
  /// Distance from y to the set where lambda is infinite (absent: no such set).
  std::function<double(PointView y)> singular_distance;
  std::function<std::vector<AxisHint>(PointView y)> posterior_hint;
  /// Exact posterior sampler, when conjugate structure allows one.
  std::function<Point(PointView y, Rng& rng)> posterior_sampler;
  /// Full enumeration of a finite observation space.
  std::optional<std::vector<Point>> discrete_space;
};

// ---------------------------------------------------------------------------
// Region predicates

using Predicate = std::function<bool(PointView)>;
using PredicateFactory = std::function<Predicate(const Json& params, std::size_t dim)>;

class PredicateRegistry {
 public:
  static PredicateRegistry& instance() {
    static PredicateRegistry registry;
    return registry;
  }

  void add(const std::string& id, PredicateFactory factory) {
    std::lock_guard lock(mutex_);
    factories_[id] = std::move(factory);
  }

  Predicate make(const std::string& id, const Json& params, std::size_t dim) const {
    PredicateFactory factory;
    {
      std::lock_guard lock(mutex_);
      const auto it = factories_.find(id);
      if (it == factories_.end()) fail(ErrorCode::Config, "unknown region predicate '" + id + "'");
      factory = it->second;
    }
    return factory(params, dim);
  }

  bool contains(const std::string& id) const {
    std::lock_guard lock(mutex_);
    return factories_.count(id) > 0;
  }

 private:
  PredicateRegistry();
  mutable std::mutex mutex_;
  std::map<std::string, PredicateFactory> factories_;
};

inline bool register_predicate(const std::string& id, PredicateFactory factory) {
  PredicateRegistry::instance().add(id, std::move(factory));
  return true;
}

enum class MeasureKind { Unknown, Finite, Infinite };

struct MeasureValue {
  MeasureKind kind = MeasureKind::Unknown;
  double value = 0.0;

  static MeasureValue finite(double v) { return {MeasureKind::Finite, v}; }
  static MeasureValue infinite() { return {MeasureKind::Infinite, kInfinity}; }
  bool is_finite() const { return kind == MeasureKind::Finite; }
  bool is_infinite() const { return kind == MeasureKind::Infinite; }
};

struct Interval1 {
  double lo = 0.0;
  double hi = 0.0;
};

/// A subset of observation space: an axis-aligned bounding box intersected
/// with a registered predicate. The measure slot caches Lambda(A).
class SamplingRegion {
 public:
  SamplingRegion() = default;

  SamplingRegion(std::vector<Interval1> bounds, std::string predicate = "box", Json params = Json::object())
      : bounds_(std::move(bounds)), predicate_id_(std::move(predicate)), params_(std::move(params)) {
    if (params_.is_null()) params_ = Json::object();
    predicate_ = PredicateRegistry::instance().make(predicate_id_, params_, bounds_.size());
  }

  static SamplingRegion unit_box(std::size_t dim, std::string predicate = "box", Json params = Json::object()) {
    return SamplingRegion(std::vector<Interval1>(dim, Interval1{0.0, 1.0}), std::move(predicate), std::move(params));
  }

  std::size_t dim() const { return bounds_.size(); }
  const std::vector<Interval1>& bounds() const { return bounds_; }
  const std::string& predicate_id() const { return predicate_id_; }
  const Json& params() const { return params_; }

  bool empty_bounds() const {
    return std::any_of(bounds_.begin(), bounds_.end(), [](const Interval1& b) { return !(b.hi > b.lo); });
  }

  bool in_bounds(PointView y) const {
    if (y.size() != bounds_.size()) return false;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!(y[i] >= bounds_[i].lo && y[i] <= bounds_[i].hi)) return false;
    return true;
  }

  bool contains(PointView y) const { return in_bounds(y) && predicate_(y); }

  const MeasureValue& measure() const { return measure_; }
  void cache_measure(MeasureValue m) { measure_ = m; }

  Json to_json() const {
    Json b = Json::array();
    for (const auto& iv : bounds_) b.push_back({iv.lo, iv.hi});
    return {{"bounds", b}, {"predicate", predicate_id_}, {"params", params_}};
  }

  static SamplingRegion from_json(const Json& j) {
    try {
      std::vector<Interval1> bounds;
      for (const auto& b : j.at("bounds")) bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
      return SamplingRegion(std::move(bounds), j.value("predicate", std::string("box")),
                            j.value("params", Json::object()));
    } catch (const Json::exception& e) {
      fail(ErrorCode::Config, std::string("malformed region: ") + e.what());
    }
  }

 private:
  std::vector<Interval1> bounds_;
  std::string predicate_id_ = "box";
  Json params_ = Json::object();
  Predicate predicate_ = [](PointView) { return true; };
  MeasureValue measure_;
};

inline PredicateRegistry::PredicateRegistry() {
  factories_["box"] = [](const Json&, std::size_t) { return Predicate([](PointView) { return true; }); };
  // Every pair of coordinates at least `delta` apart.
  factories_["diagonal-gap"] = [](const Json& params, std::size_t) {
    const double delta = params.value("delta", 0.0);
    return Predicate([delta](PointView y) {
      for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = i + 1; j < y.size(); ++j)
          if (std::abs(y[i] - y[j]) < delta) return false;
      return true;
    });
  };
  factories_["union"] = [](const Json& params, std::size_t) {
    std::vector<SamplingRegion> parts;
    for (const auto& p : params.at("parts")) parts.push_back(SamplingRegion::from_json(p));
    return Predicate([parts = std::move(parts)](PointView y) {
      return std::any_of(parts.begin(), parts.end(), [&](const SamplingRegion& r) { return r.contains(y); });
    });
  };
}

// ---------------------------------------------------------------------------
// Integration over a region

struct MeasureOptions {
  QuadOptions quad{};
  DivergenceOptions divergence{};
  /// Assign infinite mass to any region that touches the model's singular
  /// set, instead of excluding the (Lebesgue-null) set.
  bool singular_sets_carry_mass = false;
};

namespace detail {

// Points in (lo, hi) where g switches between zero and nonzero, found on a
// coarse scan and refined by bisection. Indicator jumps cost the adaptive
// rule dozens of halvings each; as breakpoints they cost nothing.
template <class G>
std::vector<double> support_breaks(G&& g, double lo, double hi, int scan = 64) {
  std::vector<double> out;
  double prev_x = lo;
  bool prev_on = g(lo) != 0.0;
  for (int i = 1; i <= scan; ++i) {
    const double x = lo + (hi - lo) * i / scan;
    const bool on = g(x) != 0.0;
    if (on != prev_on) {
      double a = prev_x, b = x;
      for (int it = 0; it < 60 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b); ++it) {
        const double mid = 0.5 * (a + b);
        ((g(mid) != 0.0) == prev_on ? a : b) = mid;
      }
      out.push_back(0.5 * (a + b));
    }
    prev_x = x;
    prev_on = on;
  }
  return out;
}

// d = 1: adaptive GK; d = 2: iterated adaptive GK, which localizes the jumps
// an indicator introduces far more cheaply than a 2-D rule; d >= 3: cubature.
template <class F>
QuadResult integrate_box(F&& f, const std::vector<Interval1>& bounds, const QuadOptions& opts) {
  const std::size_t d = bounds.size();
  if (d == 1) {
    return integrate_interval([&](double x) { return f(PointView(&x, 1)); }, bounds[0].lo, bounds[0].hi, opts);
  }
  if (d == 2) {
    QuadOptions inner = opts;
    inner.rel_tol = opts.rel_tol * 1e-2;
    inner.abs_tol = opts.abs_tol * 1e-2 / std::max(1e-300, bounds[0].hi - bounds[0].lo);
    inner.max_evals = std::max<std::size_t>(opts.max_evals / 100, 2000);
    bool inner_ok = true;
    std::size_t evals = 0;
    auto outer = integrate_interval(
        [&](double x0) {
          double pt[2] = {x0, 0.0};
          auto g = [&](double x1) {
            pt[1] = x1;
            return f(PointView(pt, 2));
          };
          const auto cuts = support_breaks(g, bounds[1].lo, bounds[1].hi);
          auto r = integrate_interval(g, bounds[1].lo, bounds[1].hi, inner, cuts);
          evals += r.evals;
          inner_ok = inner_ok && r.converged;
          return r.value;
        },
        bounds[0].lo, bounds[0].hi, opts);
    outer.evals = evals;
    outer.converged = outer.converged && inner_ok;
    return outer;
  }
  std::vector<Axis> axes;
  for (const auto& b : bounds) axes.push_back(Axis::finite(b.lo, b.hi));
  return cubature(f, axes, opts);
}

inline double span_of(const std::vector<Interval1>& bounds) {
  double s = 0.0;
  for (const auto& b : bounds) s = std::max(s, b.hi - b.lo);
  return s;
}

inline bool touches_singular_set(const IntensityModel& model, const SamplingRegion& region) {
  if (!model.singular_distance) return false;
  const std::size_t d = region.dim();
  const std::size_t per_axis = d <= 2 ? 65 : 17;
  std::vector<std::size_t> idx(d, 0);
  Point y(d);
  const double tiny = 1e-12 * span_of(region.bounds());
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto& b = region.bounds()[i];
      y[i] = b.lo + (b.hi - b.lo) * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
    }
    if (region.contains(y) && model.singular_distance(y) <= tiny) return true;
    std::size_t i = 0;
    while (i < d && ++idx[i] == per_axis) idx[i++] = 0;
    if (i == d) return false;
  }
}

}  // namespace detail

/// Lambda(A). Discrete spaces use an exact sum; continuous spaces run a
/// truncation ladder that excises a neighbourhood of the singular set whose
/// radius halves each rung, and certify divergence from its growth.
inline MeasureValue integrate_intensity(const IntensityModel& model, const SamplingRegion& region,
                                        const MeasureOptions& opts = {}) {
  if (region.empty_bounds()) return MeasureValue::finite(0.0);
  if (region.dim() != model.obs_dim) fail(ErrorCode::Domain, "region dimension does not match the model");

  if (model.discrete_space) {
    long double sum = 0.0L, comp = 0.0L;
    for (const auto& y : *model.discrete_space) {
      if (!region.contains(y)) continue;
      const double v = model.marginal_intensity(y);
      if (std::isinf(v)) return MeasureValue::infinite();
      const long double t = sum + (static_cast<long double>(v) - comp);
      comp = (t - sum) - (static_cast<long double>(v) - comp);
      sum = t;
    }
    return MeasureValue::finite(static_cast<double>(sum));
  }

  if (opts.singular_sets_carry_mass && detail::touches_singular_set(model, region)) return MeasureValue::infinite();

  auto masked = [&](double radius) {
    return [&, radius](PointView y) {
      if (!region.contains(y)) return 0.0;
      if (radius > 0.0 && model.singular_distance(y) < radius) return 0.0;
      const double v = model.marginal_intensity(y);
      return std::isfinite(v) ? v : 0.0;
    };
  };

  if (!model.singular_distance) {
    auto r = detail::integrate_box(masked(0.0), region.bounds(), opts.quad);
    return MeasureValue::finite(require_converged(r, "integrate_intensity"));
  }

  const double start = 0.25 * detail::span_of(region.bounds());
  auto cert = divergence_certificate(
      [&](std::size_t k) {
        const double radius = std::ldexp(start, -static_cast<int>(k));
        return require_converged(detail::integrate_box(masked(radius), region.bounds(), opts.quad),
                                 "integrate_intensity rung " + std::to_string(k));
      },
      opts.divergence);
  switch (cert.verdict) {
    case MassVerdict::Finite: return MeasureValue::finite(cert.value);
    case MassVerdict::Infinite: return MeasureValue::infinite();
    case MassVerdict::Inconclusive: break;
  }
  fail(ErrorCode::NonConverged, "integrate_intensity: truncation ladder neither converged nor diverged (" +
                                    cert.rule + ")");
}

enum class Observability { Observable, NotObservableZero, NotObservableInfinite };

constexpr std::string_view to_string(Observability o) {
  switch (o) {
    case Observability::Observable: return "OBSERVABLE";
    case Observability::NotObservableZero: return "NOT_OBSERVABLE_ZERO";
    case Observability::NotObservableInfinite: return "NOT_OBSERVABLE_INFINITE";
  }
  return "UNKNOWN";
}

struct ObservabilityResult {
  Observability verdict = Observability::NotObservableZero;
  MeasureValue measure;
};

/// Observable iff 0 < Lambda(A) < inf. Caches Lambda(A) on the region.
inline ObservabilityResult check_observable(const IntensityModel& model, SamplingRegion& region,
                                            const MeasureOptions& opts = {}) {
  MeasureValue m = region.measure();
  if (m.kind == MeasureKind::Unknown) {
    m = integrate_intensity(model, region, opts);
    region.cache_measure(m);
  }
  if (m.is_infinite()) return {Observability::NotObservableInfinite, m};
  if (!(m.value > 0.0)) return {Observability::NotObservableZero, m};
  return {Observability::Observable, m};
}

// ---------------------------------------------------------------------------
// Point patterns

/// A finite multiset of events observed on a region. Coincident events stay
/// separate entries.
struct PointPattern {
  std::vector<Point> events;
  SamplingRegion region;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return events.size(); }

  Json to_json() const {
    Json j;
    j["region"] = region.to_json();
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["events"] = Json::array();
    for (const auto& e : events) j["events"].push_back(e);
    return j;
  }

  static PointPattern from_json(const Json& j) {
    try {
      PointPattern p;
      p.region = SamplingRegion::from_json(j.at("region"));
      if (j.contains("seed") && !j.at("seed").is_null()) p.seed = j.at("seed").get<std::uint64_t>();
      for (const auto& e : j.at("events")) {
        Point y = e.get<Point>();
        if (y.size() != p.region.dim()) fail(ErrorCode::Config, "event dimension does not match the region");
        if (!p.region.contains(y)) fail(ErrorCode::Config, "event lies outside its region");
        p.events.push_back(std::move(y));
      }
      return p;
    } catch (const Json::exception& e) {
      fail(ErrorCode::Config, std::string("malformed point pattern: ") + e.what());
    }
  }
};

struct SampleOptions {
  MeasureOptions measure{};
  /// Admit regions that are not observable with finite positive mass.
  /// Zero-mass regions then yield an empty pattern.
  bool allow_unobservable = false;
  /// Below this acceptance rate (after `stall_min_proposals`) sampling stops.
  double acceptance_floor = 1e-3;
  std::size_t stall_min_proposals = 10'000;
  double envelope_inflation = 1.2;
};

struct SamplerStats {
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  std::size_t envelope_violations = 0;
};

/// Draws patterns on a fixed (model, region) pair. Building the envelope is
/// the expensive part, so replicates should reuse one sampler.
class PatternSampler {
 public:
  PatternSampler(const IntensityModel& model, SamplingRegion region, const SampleOptions& opts = {})
      : model_(model), region_(std::move(region)), opts_(opts) {
    const auto obs = check_observable(model, region_, opts.measure);
    if (obs.verdict == Observability::NotObservableInfinite)
      fail(ErrorCode::NotObservable, std::string(to_string(obs.verdict)));
    if (obs.verdict == Observability::NotObservableZero) {
      if (!opts.allow_unobservable) fail(ErrorCode::NotObservable, std::string(to_string(obs.verdict)));
      mass_ = 0.0;
      return;
    }
    mass_ = obs.measure.value;
    if (model.discrete_space) build_categorical();
    else build_envelope();
  }

  double mass() const { return mass_; }
  const SamplingRegion& region() const { return region_; }
  const SamplerStats& stats() const { return stats_; }

  PointPattern sample(std::uint64_t seed) {
    PointPattern out;
    out.region = region_;
    out.seed = seed;
    if (mass_ == 0.0) return out;
    Rng rng(stream_seed(seed, 0));
    const auto count = std::poisson_distribution<std::uint64_t>(mass_)(rng);
    out.events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.events.push_back(draw_event(rng));
    return out;
  }

 private:
  void build_categorical() {
    for (const auto& y : *model_.discrete_space) {
      if (!region_.contains(y)) continue;
      atoms_.push_back(y);
      const double w = model_.marginal_intensity(y);
      cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + w);
    }
  }

  void build_envelope() {
    const std::size_t d = region_.dim();
    const int bits = d <= 2 ? 10 : (d <= 4 ? 5 : std::max(1, 20 / static_cast<int>(d)));
    per_axis_ = std::size_t{1} << bits;
    cells_ = 1;
    for (std::size_t i = 0; i < d; ++i) cells_ *= per_axis_;
    width_.resize(d);
    for (std::size_t i = 0; i < d; ++i) width_[i] = (region_.bounds()[i].hi - region_.bounds()[i].lo) / per_axis_;

    auto usable = [&](PointView y, double& best) {
      if (!region_.contains(y)) return false;
      const double v = model_.marginal_intensity(y);
      if (!std::isfinite(v)) return false;
      best = std::max(best, v);
      return true;
    };

    // Corner values are shared between neighbouring cells.
    const std::size_t corners_per_axis = per_axis_ + 1;
    std::size_t corner_count = 1;
    for (std::size_t i = 0; i < d; ++i) corner_count *= corners_per_axis;
    std::vector<double> corner_value(corner_count, -1.0);
    {
      std::vector<std::size_t> idx(d, 0);
      Point y(d);
      for (std::size_t c = 0; c < corner_count; ++c) {
        std::size_t rem = c;
        for (std::size_t i = 0; i < d; ++i) {
          idx[i] = rem % corners_per_axis;
          rem /= corners_per_axis;
          y[i] = region_.bounds()[i].lo + width_[i] * static_cast<double>(idx[i]);
        }
        double v = 0.0;
        if (usable(y, v)) corner_value[c] = v;
      }
    }

    cumulative_.assign(cells_, 0.0);
    double volume = 1.0;
    for (double w : width_) volume *= w;
    envelope_.assign(cells_, 0.0);
    std::vector<std::size_t> idx(d, 0);
    Point y(d);
    double running = 0.0;
    for (std::size_t cell = 0; cell < cells_; ++cell) {
      std::size_t rem = cell;
      for (std::size_t i = 0; i < d; ++i) {
        idx[i] = rem % per_axis_;
        rem /= per_axis_;
      }
      double best = 0.0;
      bool any = false;
      for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        std::size_t c = 0, stride = 1;
        for (std::size_t i = 0; i < d; ++i) {
          c += (idx[i] + ((mask >> i) & 1U)) * stride;
          stride *= corners_per_axis;
        }
        if (corner_value[c] >= 0.0) {
          best = std::max(best, corner_value[c]);
          any = true;
        }
      }
      for (std::size_t i = 0; i < d; ++i)
        y[i] = region_.bounds()[i].lo + width_[i] * (static_cast<double>(idx[i]) + 0.5);
      any = usable(y, best) || any;
      if (!any) {
        // Cell corners and centre all miss the region; look a little closer.
        constexpr int sub = 4;
        std::vector<int> s(d, 0);
        while (true) {
          for (std::size_t i = 0; i < d; ++i)
            y[i] = region_.bounds()[i].lo + width_[i] * (static_cast<double>(idx[i]) + (s[i] + 0.5) / sub);
          usable(y, best);
          std::size_t i = 0;
          while (i < d && ++s[i] == sub) s[i++] = 0;
          if (i == d) break;
        }
      }
      envelope_[cell] = opts_.envelope_inflation * best;
      running += envelope_[cell] * volume;
      cumulative_[cell] = running;
    }
    if (!(running > 0.0)) fail(ErrorCode::RejectionStall, "envelope has no mass on the region");
  }

  Point draw_event(Rng& rng) {
    if (model_.discrete_space) {
      const double u = uniform01(rng) * cumulative_.back();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) --it;
      return atoms_[static_cast<std::size_t>(it - cumulative_.begin())];
    }
    const std::size_t d = region_.dim();
    Point y(d);
    while (true) {
      ++stats_.proposals;
      if (stats_.proposals > opts_.stall_min_proposals &&
          static_cast<double>(stats_.accepted) < opts_.acceptance_floor * static_cast<double>(stats_.proposals)) {
        fail(ErrorCode::RejectionStall, "acceptance rate " +
                                            std::to_string(static_cast<double>(stats_.accepted) /
                                                           static_cast<double>(stats_.proposals)) +
                                            " below floor");
      }
      const double u = uniform01(rng) * cumulative_.back();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) --it;
      std::size_t cell = static_cast<std::size_t>(it - cumulative_.begin());
      const double env = envelope_[cell];
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t k = cell % per_axis_;
        cell /= per_axis_;
        y[i] = region_.bounds()[i].lo + width_[i] * (static_cast<double>(k) + uniform01(rng));
      }
      const double accept_u = uniform01(rng);
      if (!region_.contains(y)) continue;
      const double v = model_.marginal_intensity(y);
      if (!std::isfinite(v)) continue;
      if (v > env) ++stats_.envelope_violations;
      if (accept_u * env <= v) {
        ++stats_.accepted;
        return y;
      }
    }
  }

  IntensityModel model_;
  SamplingRegion region_;
  SampleOptions opts_;
  double mass_ = 0.0;
  SamplerStats stats_;
  // discrete
  std::vector<Point> atoms_;
  // continuous
  std::size_t per_axis_ = 0, cells_ = 0;
  std::vector<double> width_, envelope_;
  std::vector<double> cumulative_;
};

/// Poisson(Lambda(A)) events, each drawn from lambda restricted to A and
/// normalized. Deterministic in `seed`.
inline PointPattern sample_point_pattern(const IntensityModel& model, const SamplingRegion& region,
                                         std::uint64_t seed, const SampleOptions& opts = {}) {
  PatternSampler sampler(model, region, opts);
  return sampler.sample(seed);
}

/// Keeps the events of `pattern` that fall in `sub`.
inline PointPattern restrict_pattern(const PointPattern& pattern, const SamplingRegion& sub) {
  PointPattern out;
  out.region = sub;
  out.seed = pattern.seed;
  for (const auto& e : pattern.events)
    if (sub.contains(e)) out.events.push_back(e);
  return out;
}

namespace detail {

// Searches a lattice over the common bounding box (and the given events) for
// a point that lies in both regions.
inline std::optional<Point> overlap_witness(const SamplingRegion& a, const SamplingRegion& b,
                                            std::span<const Point> extra = {}) {
  if (a.dim() != b.dim()) fail(ErrorCode::Domain, "regions live in different spaces");
  for (const auto& e : extra)
    if (a.contains(e) && b.contains(e)) return e;
  const std::size_t d = a.dim();
  std::vector<Interval1> box(d);
  for (std::size_t i = 0; i < d; ++i) {
    box[i] = {std::max(a.bounds()[i].lo, b.bounds()[i].lo), std::min(a.bounds()[i].hi, b.bounds()[i].hi)};
    if (box[i].hi < box[i].lo) return std::nullopt;
  }
  const std::size_t per_axis = d <= 2 ? 257 : (d <= 4 ? 17 : 3);
  std::vector<std::size_t> idx(d, 0);
  Point y(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i)
      y[i] = box[i].lo + (box[i].hi - box[i].lo) * static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
    if (a.contains(y) && b.contains(y)) return y;
    std::size_t i = 0;
    while (i < d && ++idx[i] == per_axis) idx[i++] = 0;
    if (i == d) return std::nullopt;
  }
}

}  // namespace detail

/// Multiset union of two patterns observed on disjoint regions.
inline PointPattern superpose(const PointPattern& p1, const PointPattern& p2) {
  std::vector<Point> probes = p1.events;
  probes.insert(probes.end(), p2.events.begin(), p2.events.end());
  if (detail::overlap_witness(p1.region, p2.region, probes))
    fail(ErrorCode::OverlappingRegions, "superpose needs disjoint regions");
  std::vector<Interval1> hull = p1.region.bounds();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    hull[i].lo = std::min(hull[i].lo, p2.region.bounds()[i].lo);
    hull[i].hi = std::max(hull[i].hi, p2.region.bounds()[i].hi);
  }
  Json params = {{"parts", Json::array({p1.region.to_json(), p2.region.to_json()})}};
  PointPattern out;
  out.region = SamplingRegion(std::move(hull), "union", std::move(params));
  out.events = p1.events;
  out.events.insert(out.events.end(), p2.events.begin(), p2.events.end());
  return out;
}

}  // namespace pprior
