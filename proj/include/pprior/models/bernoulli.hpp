#pragma once

// Binary sequences with prior d(theta) / (theta (1 - theta)) on (0, 1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include <boost/rational.hpp>

#include "pprior/error.hpp"
#include "pprior/measure.hpp"
#include "pprior/random.hpp"

namespace pprior::bernoulli {

using Rational = boost::rational<std::int64_t>;

struct BernoulliImproperModel {
  std::size_t n = 3;

  void validate() const {
    if (n < 1 || n > 24) fail(ErrorCode::Domain, "bernoulli model supports 1 <= n <= 24");
  }
};

struct Counts {
  std::uint64_t zeros = 0;
  std::uint64_t ones = 0;
};

inline Counts counts(PointView y) {
  Counts c;
  for (double v : y) {
    if (v == 0.0) ++c.zeros;
    else if (v == 1.0) ++c.ones;
    else fail(ErrorCode::Domain, "binary sequences hold only 0 and 1");
  }
  return c;
}

namespace detail {

// Gamma(n0) Gamma(n1) / Gamma(n) from exact factorials while they fit in 64
// bits, from log-gamma beyond.
inline double gamma_ratio(std::uint64_t n0, std::uint64_t n1) {
  const std::uint64_t n = n0 + n1;
  if (n <= 21) {
    auto fact = [](std::uint64_t k) {
      std::uint64_t f = 1;
      for (std::uint64_t i = 2; i <= k; ++i) f *= i;
      return f;
    };
    const std::uint64_t num = fact(n0 - 1) * fact(n1 - 1);
    const std::uint64_t den = fact(n - 1);
    const std::uint64_t g = std::gcd(num, den);
    return static_cast<double>(num / g) / static_cast<double>(den / g);
  }
  return std::exp(std::lgamma(static_cast<double>(n0)) + std::lgamma(static_cast<double>(n1)) -
                  std::lgamma(static_cast<double>(n)));
}

}  // namespace detail

/// Lambda_n({y}); +inf for the two constant sequences.
inline double bernoulli_intensity(const BernoulliImproperModel& m, PointView y) {
  m.validate();
  if (y.size() != m.n) fail(ErrorCode::Domain, "bernoulli_intensity: expected " + std::to_string(m.n) + " values");
  const auto c = counts(y);
  if (c.zeros == 0 || c.ones == 0) return kInfinity;
  return detail::gamma_ratio(c.zeros, c.ones);
}

struct BetaParams {
  double alpha = 1.0;  // n1(y)
  double beta = 1.0;   // n0(y)
};

inline BetaParams beta_posterior_params(const BernoulliImproperModel& m, PointView y) {
  m.validate();
  const auto c = counts(y);
  if (c.zeros == 0 || c.ones == 0) fail(ErrorCode::DivergentIntensity, "constant sequence has infinite intensity");
  return {static_cast<double>(c.ones), static_cast<double>(c.zeros)};
}

struct PolyaOptions {
  /// Test hook: every appended value equals this instead of an urn draw.
  std::optional<int> forced_outcome;
};

namespace detail {

inline Counts checked_counts(PointView y) {
  const auto c = counts(y);
  if (c.zeros == 0 || c.ones == 0) fail(ErrorCode::DivergentIntensity, "urn needs both outcomes present");
  return c;
}

// Appends 1 with probability ones / (ones + zeros), decided on exact
// integers.
inline int urn_draw(Counts& c, Rng& rng) {
  const std::uint64_t len = c.ones + c.zeros;
  const bool one = std::uniform_int_distribution<std::uint64_t>(0, len - 1)(rng) < c.ones;
  ++(one ? c.ones : c.zeros);
  return one ? 1 : 0;
}

}  // namespace detail

/// Success probability n1(y) / n of the next urn draw.
inline double next_success_probability(PointView y) {
  const auto c = detail::checked_counts(y);
  return static_cast<double>(c.ones) / static_cast<double>(c.ones + c.zeros);
}

inline std::vector<int> polya_extend(const BernoulliImproperModel& m, PointView y, std::size_t steps,
                                     std::uint64_t seed, const PolyaOptions& opts = {}) {
  m.validate();
  auto c = detail::checked_counts(y);
  std::vector<int> out;
  out.reserve(y.size() + steps);
  for (double v : y) out.push_back(static_cast<int>(v));
  Rng rng = make_stream(seed, 0);
  for (std::size_t k = 0; k < steps; ++k) {
    if (opts.forced_outcome) {
      const int v = *opts.forced_outcome;
      ++(v == 1 ? c.ones : c.zeros);
      out.push_back(v);
    } else {
      out.push_back(detail::urn_draw(c, rng));
    }
  }
  return out;
}

/// Mean of the appended components after `steps` urn draws, one per path.
inline std::vector<double> polya_limit(const BernoulliImproperModel& m, PointView y, std::size_t steps,
                                       std::size_t paths, std::uint64_t seed) {
  m.validate();
  if (steps == 0) fail(ErrorCode::Domain, "polya_limit needs at least one step");
  const auto start = detail::checked_counts(y);
  std::vector<double> out(paths);
  parallel_for(paths, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    auto c = start;
    std::uint64_t appended_ones = 0;
    for (std::size_t k = 0; k < steps; ++k) appended_ones += static_cast<std::uint64_t>(detail::urn_draw(c, rng));
    out[i] = static_cast<double>(appended_ones) / static_cast<double>(steps);
  });
  return out;
}

/// Probability of appending exactly `extension`, as the product of the
/// sequential urn probabilities.
inline Rational polya_path_probability(PointView y, const std::vector<int>& extension) {
  auto c = detail::checked_counts(y);
  Rational prob(1);
  for (int v : extension) {
    const auto len = static_cast<std::int64_t>(c.ones + c.zeros);
    if (v == 1) {
      prob *= Rational(static_cast<std::int64_t>(c.ones), len);
      ++c.ones;
    } else {
      prob *= Rational(static_cast<std::int64_t>(c.zeros), len);
      ++c.zeros;
    }
  }
  return prob;
}

/// The same probability from the exchangeable closed form
/// n1^(k1) n0^(k0) / n^(k) with rising factorials; depends only on the
/// number of ones in the extension.
inline Rational exchangeable_probability(PointView y, const std::vector<int>& extension) {
  const auto c = detail::checked_counts(y);
  auto rising = [](std::int64_t a, std::int64_t k) {
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < k; ++i) r *= a + i;
    return r;
  };
  const auto k1 = static_cast<std::int64_t>(std::count(extension.begin(), extension.end(), 1));
  const auto k = static_cast<std::int64_t>(extension.size());
  return Rational(rising(static_cast<std::int64_t>(c.ones), k1) *
                      rising(static_cast<std::int64_t>(c.zeros), k - k1),
                  rising(static_cast<std::int64_t>(c.ones + c.zeros), k));
}

/// All 2^n binary sequences in lexicographic order.
inline std::vector<Point> binary_cube(std::size_t n) {
  std::vector<Point> out;
  out.reserve(std::size_t{1} << n);
  for (std::size_t code = 0; code < (std::size_t{1} << n); ++code) {
    Point y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>((code >> (n - 1 - i)) & 1U);
    out.push_back(std::move(y));
  }
  return out;
}

namespace detail {

inline bool is_binary(PointView y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

inline const bool predicates_registered = [] {
  register_predicate("binary-cube", [](const Json&, std::size_t) { return Predicate(is_binary); });
  register_predicate("nonconstant-binary", [](const Json&, std::size_t) {
    return Predicate([](PointView y) {
      if (!is_binary(y)) return false;
      const auto c = counts(y);
      return c.zeros > 0 && c.ones > 0;
    });
  });
  register_predicate("binary-set", [](const Json& params, std::size_t dim) {
    std::set<Point> members;
    for (const auto& p : params.at("points")) {
      auto pt = p.get<Point>();
      if (pt.size() != dim || !is_binary(pt)) fail(ErrorCode::Config, "binary-set point of wrong shape");
      members.insert(std::move(pt));
    }
    return Predicate([members = std::move(members)](PointView y) {
      return members.count(Point(y.begin(), y.end())) > 0;
    });
  });
  return true;
}();

}  // namespace detail

/// Region over {0,1}^n with one of the binary predicates.
inline SamplingRegion binary_region(std::size_t n, const std::string& predicate = "nonconstant-binary",
                                    Json params = Json::object()) {
  return SamplingRegion::unit_box(n, predicate, std::move(params));
}

inline SamplingRegion binary_set_region(std::size_t n, const std::vector<Point>& points) {
  Json pts = Json::array();
  for (const auto& p : points) pts.push_back(p);
  return binary_region(n, "binary-set", {{"points", pts}});
}

inline IntensityModel make_model(const BernoulliImproperModel& b) {
  b.validate();
  IntensityModel m;
  m.id = "bernoulli";
  m.param_dim = 1;
  m.obs_dim = b.n;
  m.params = {{"theta", 0.0, 1.0}};
  m.prior_density = [](PointView x) { return x[0] > 0.0 && x[0] < 1.0 ? 1.0 / (x[0] * (1.0 - x[0])) : 0.0; };
  m.likelihood_density = [](PointView x, PointView y) {
    const auto c = counts(y);
    return std::pow(x[0], static_cast<double>(c.ones)) * std::pow(1.0 - x[0], static_cast<double>(c.zeros));
  };
  m.marginal_intensity = [b](PointView y) { return bernoulli_intensity(b, y); };
  m.closed_form_marginal = true;
  m.posterior_hint = [](PointView y) {
    const auto c = counts(y);
    const double a = static_cast<double>(c.ones), bb = static_cast<double>(c.zeros);
    const double mean = a / (a + bb);
    return std::vector<AxisHint>{{mean, std::sqrt(a * bb / ((a + bb) * (a + bb) * (a + bb + 1.0)))}};
  };
  m.discrete_space = binary_cube(b.n);
  return m;
}

}  // namespace pprior::bernoulli
