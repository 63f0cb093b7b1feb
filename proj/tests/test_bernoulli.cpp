// Binary sequences: counting intensity, beta posterior, Polya urn.

#include <gtest/gtest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <functional>
#include <map>

#include "pprior/conditional.hpp"
#include "pprior/models/bernoulli.hpp"
#include "pprior/verify.hpp"

using namespace pprior;
using namespace pprior::bernoulli;

namespace {

ErrorCode code_of(const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

std::function<double(double)> beta_cdf(double a, double b) {
  return [d = boost::math::beta_distribution<>(a, b)](double x) { return boost::math::cdf(d, std::clamp(x, 0.0, 1.0)); };
}

}  // namespace

TEST(BernoulliIntensity, Examples) {
  EXPECT_EQ(bernoulli_intensity({3}, Point{1, 0, 0}), 0.5);
  EXPECT_TRUE(std::isinf(bernoulli_intensity({3}, Point{0, 0, 0})));
  EXPECT_TRUE(std::isinf(bernoulli_intensity({3}, Point{1, 1, 1})));
  EXPECT_EQ(bernoulli_intensity({2}, Point{1, 0}), 1.0);
  EXPECT_EQ(code_of([] { bernoulli_intensity({2}, Point{1, 0.5}); }), ErrorCode::Domain);
  EXPECT_EQ(code_of([] { bernoulli_intensity({3}, Point{1, 0}); }), ErrorCode::Domain);
}

TEST(BernoulliIntensity, MatchesBetaFunctionForEveryCount) {
  for (std::size_t n = 2; n <= 24; ++n)
    for (std::size_t ones = 1; ones < n; ++ones) {
      Point y(n, 0.0);
      std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(ones), 1.0);
      const double want = boost::math::beta(static_cast<double>(ones), static_cast<double>(n - ones));
      EXPECT_NEAR(bernoulli_intensity({n}, y) / want, 1.0, 1e-12) << n << " " << ones;
    }
}

TEST(BernoulliIntensity, PermutationInvariant) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Point y(12);
    for (auto& v : y) v = uniform01(rng) < 0.4 ? 1.0 : 0.0;
    const double base = bernoulli_intensity({12}, y);
    std::shuffle(y.begin(), y.end(), rng);
    EXPECT_EQ(bernoulli_intensity({12}, y), base);
  }
}

TEST(BernoulliIntensity, FiniteSumRegions) {
  const auto model = make_model({6});
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> chosen;
    double want = 0.0;
    for (const auto& y : binary_cube(6)) {
      const auto c = counts(y);
      if (c.ones == 0 || c.zeros == 0 || uniform01(rng) < 0.5) continue;
      chosen.push_back(y);
      want += boost::math::beta(static_cast<double>(c.ones), static_cast<double>(c.zeros));
    }
    if (chosen.empty()) continue;
    const auto got = integrate_intensity(model, binary_set_region(6, chosen));
    EXPECT_NEAR(got.value / want, 1.0, 1e-12);
  }
}

TEST(BetaParams, Examples) {
  const auto a = beta_posterior_params({3}, Point{1, 0, 0});
  EXPECT_EQ(a.alpha, 1.0);
  EXPECT_EQ(a.beta, 2.0);
  const auto b = beta_posterior_params({2}, Point{1, 0});
  EXPECT_EQ(b.alpha, 1.0);
  EXPECT_EQ(b.beta, 1.0);
  const auto c = beta_posterior_params({4}, Point{1, 1, 0, 0});
  EXPECT_EQ(c.alpha, 2.0);
  EXPECT_EQ(c.beta, 2.0);
  EXPECT_EQ(code_of([] { beta_posterior_params({3}, Point{0, 0, 0}); }), ErrorCode::DivergentIntensity);
}

TEST(BetaParams, MatchGenericPosteriorDensity) {
  const Point y{1, 0, 0, 1, 0, 0};
  const auto law = posterior_for_event(make_model({6}), y);
  const auto bp = beta_posterior_params({6}, y);
  const boost::math::beta_distribution<> d(bp.alpha, bp.beta);
  for (double t : {0.05, 0.3, 0.5, 0.8}) EXPECT_NEAR(law.density(Point{t}), boost::math::pdf(d, t), 1e-10);
}

TEST(Polya, FirstStepAndForcedFailures) {
  EXPECT_DOUBLE_EQ(next_success_probability(Point{1, 0, 0}), 1.0 / 3.0);
  PolyaOptions zeros;
  zeros.forced_outcome = 0;
  const auto seq = polya_extend({3}, Point{1, 0, 0}, 2, 1, zeros);
  ASSERT_EQ(seq.size(), 5u);
  Point as_points(seq.begin(), seq.end());
  const auto c = counts(as_points);
  EXPECT_EQ(c.ones, 1u);
  EXPECT_EQ(c.zeros, 4u);
  EXPECT_EQ(code_of([] { polya_extend({3}, Point{1, 1, 1}, 2, 1); }), ErrorCode::DivergentIntensity);
}

TEST(Polya, FirstStepFrequency) {
  int ones = 0;
  const int runs = 30000;
  for (int r = 0; r < runs; ++r) ones += polya_extend({3}, Point{1, 0, 0}, 1, stream_seed(20, r)).back();
  const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / runs);
  EXPECT_NEAR(ones / static_cast<double>(runs), 1.0 / 3.0, 4.0 * se);
}

TEST(Polya, ExchangeableInExactArithmetic) {
  const Point y{1, 0};
  Rational total(0);
  std::map<int, Rational> by_ones;
  for (int code = 0; code < 8; ++code) {
    std::vector<int> ext{(code >> 2) & 1, (code >> 1) & 1, code & 1};
    const auto path = polya_path_probability(y, ext);
    EXPECT_EQ(path, exchangeable_probability(y, ext));
    const int k1 = ext[0] + ext[1] + ext[2];
    if (by_ones.count(k1)) EXPECT_EQ(by_ones[k1], path) << "permutations must be equally likely";
    by_ones[k1] = path;
    total += path;
  }
  EXPECT_EQ(total, Rational(1));
  // from (1, 0), three ones: 1/2 * 2/3 * 3/4
  EXPECT_EQ(by_ones[3], Rational(1, 4));
}

TEST(Polya, ReproducibleBySeed) {
  EXPECT_EQ(polya_extend({3}, Point{1, 0, 0}, 500, 4), polya_extend({3}, Point{1, 0, 0}, 500, 4));
  EXPECT_NE(polya_extend({3}, Point{1, 0, 0}, 500, 4), polya_extend({3}, Point{1, 0, 0}, 500, 5));
  EXPECT_EQ(polya_limit({3}, Point{1, 0, 0}, 100, 50, 6), polya_limit({3}, Point{1, 0, 0}, 100, 50, 6));
}

TEST(PolyaLimit, BetaOneTwo) {
  const auto limits = polya_limit({3}, Point{1, 0, 0}, 10'000, 5000, 21);
  EXPECT_TRUE(ks_test(limits, beta_cdf(1.0, 2.0), 0.01).passed);
  double mean = 0.0;
  for (double v : limits) mean += v;
  mean /= static_cast<double>(limits.size());
  // Beta(1, 2) variance 1/18
  EXPECT_NEAR(mean, 1.0 / 3.0, 3.0 * std::sqrt(1.0 / 18.0 / 5000.0));
}

TEST(PolyaLimit, UniformFromOneZero) {
  const auto limits = polya_limit({2}, Point{1, 0}, 10'000, 5000, 22);
  EXPECT_TRUE(ks_test(limits, beta_cdf(1.0, 1.0), 0.01).passed);
}

TEST(PolyaLimit, AgreesWithBetaDraws) {
  const Point y{1, 1, 0, 0, 0};
  const auto bp = beta_posterior_params({5}, y);
  const auto limits = polya_limit({5}, y, 10'000, 5000, 23);
  Rng rng = make_stream(24, 0);
  std::vector<double> draws(5000);
  for (auto& d : draws) {
    const double a = std::gamma_distribution<double>(bp.alpha, 1.0)(rng);
    const double b = std::gamma_distribution<double>(bp.beta, 1.0)(rng);
    d = a / (a + b);
  }
  EXPECT_TRUE(ks_two_sample(limits, draws, 0.01).passed);
}

TEST(PolyaLimit, NeedsSteps) {
  EXPECT_EQ(code_of([] { polya_limit({3}, Point{1, 0, 0}, 0, 10, 1); }), ErrorCode::Domain);
}
