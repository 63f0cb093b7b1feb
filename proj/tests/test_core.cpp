// Random streams, special functions, quadrature, grid laws, divergence
// certificates.

#include <gtest/gtest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <set>

#include "pprior/divergence.hpp"
#include "pprior/grid_distribution.hpp"
#include "pprior/quadrature.hpp"
#include "pprior/random.hpp"
#include "pprior/special.hpp"
#include "pprior/verify.hpp"

using namespace pprior;

TEST(Random, SplitmixMatchesReferenceFirstOutput) {
  // first output of the reference splitmix64 generator seeded with 0
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Random, StreamSeedFollowsDocumentedRule) {
  for (std::uint64_t s : {0ULL, 1ULL, 42ULL, ~0ULL})
    for (std::uint64_t i : {0ULL, 1ULL, 999ULL}) EXPECT_EQ(stream_seed(s, i), splitmix64(splitmix64(s) + i));
}

TEST(Random, StreamsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(stream_seed(7, i));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Random, SameStreamSameDraws) {
  Rng a = make_stream(3, 5), b = make_stream(3, 5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(Random, ParallelForIsScheduleIndependent) {
  auto run = [](const char* workers) {
    setenv("PPRIOR_WORKERS", workers, 1);
    std::vector<double> out(2000);
    parallel_for(out.size(), [&](std::size_t i) {
      Rng rng = make_stream(11, i);
      out[i] = sample_student_t(3.0, rng);
    });
    return out;
  };
  const auto one = run("1");
  const auto four = run("4");
  unsetenv("PPRIOR_WORKERS");
  EXPECT_EQ(one, four);
}

TEST(Random, WorkerCountFromEnvironment) {
  setenv("PPRIOR_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  setenv("PPRIOR_WORKERS", "nonsense", 1);
  EXPECT_EQ(worker_count(), 1u);
  unsetenv("PPRIOR_WORKERS");
  EXPECT_EQ(worker_count(), 1u);
}

TEST(Random, StudentTFractionalDfMatchesCdf) {
  Rng rng = make_stream(5, 0);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = sample_student_t(2.5, rng);
  const boost::math::students_t t(2.5);
  const auto r = ks_test(xs, [&](double x) { return boost::math::cdf(t, x); }, 0.01, "t", 5);
  EXPECT_TRUE(r.passed) << r.statistic << " vs " << r.threshold;
}

TEST(Random, StudentTRejectsNonPositiveDf) {
  Rng rng(1);
  EXPECT_THROW(sample_student_t(0.0, rng), Error);
}

TEST(Special, KnownValues) {
  EXPECT_NEAR(special::beta_cdf(0.3, 1.0, 2.0), 1.0 - 0.7 * 0.7, 1e-15);
  EXPECT_NEAR(special::beta_pdf(0.3, 1.0, 2.0), 2.0 * 0.7, 1e-14);
  EXPECT_NEAR(special::student_t_cdf(0.5, 1.0, 0.5, 0.5), 0.5, 1e-15);
  // Cauchy cdf
  EXPECT_NEAR(special::student_t_cdf(1.0, 1.0), 0.75, 1e-15);
  EXPECT_NEAR(special::poisson_pmf(0, 3.0), std::exp(-3.0), 1e-16);
  EXPECT_NEAR(special::poisson_pmf(2, 3.0), 4.5 * std::exp(-3.0), 1e-15);
  // 0.99 quantile of chi-square with 10 df, standard tables: 23.209
  EXPECT_NEAR(special::chi_square_quantile(0.99, 10.0), 23.209, 1e-3);
  EXPECT_NEAR(special::chi_square_sf(special::chi_square_quantile(0.99, 4.0), 4.0), 0.01, 1e-12);
  // c(0.01) = 1.6276 in KS tables
  EXPECT_NEAR(special::ks_critical_constant(0.01), 1.6276, 1e-4);
}

// --- quadrature --------------------------------------------------------------

TEST(Quadrature, Polynomial) {
  const auto r = integrate_interval([](double x) { return x * x; }, 0.0, 1.0, {0.0, 1e-12, 100000});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-14);
}

TEST(Quadrature, GaussianOnRealLine) {
  const auto r = integrate_1d([](double x) { return std::exp(-(x - 3.0) * (x - 3.0)); }, Axis::real_line(3.0, 1.0),
                              {0.0, 1e-12, 100000});
  EXPECT_NEAR(r.value, std::sqrt(std::numbers::pi), 1e-12);
}

TEST(Quadrature, HalfLines) {
  const auto up = integrate_1d([](double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); }, Axis::positive(1.0),
                               {0.0, 1e-12, 100000});
  EXPECT_NEAR(up.value, 1.0, 1e-11);
  const auto down = integrate_1d([](double x) { return std::exp(x); },
                                 Axis{-std::numeric_limits<double>::infinity(), 0.0, -1.0, 1.0}, {0.0, 1e-12, 100000});
  EXPECT_NEAR(down.value, 1.0, 1e-11);
}

TEST(Quadrature, BreakpointsResolveKinks) {
  const auto r = integrate_interval([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {0.0, 1e-13, 100000},
                                    std::vector<double>{0.3});
  EXPECT_NEAR(r.value, 0.5 * (0.09 + 0.49), 1e-14);
}

TEST(Quadrature, EndpointSingularityConverges) {
  const auto r = integrate_interval([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {0.0, 1e-8, 1000000});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2.0, 1e-6);
}

TEST(Quadrature, BudgetExhaustionIsReported) {
  const auto r = integrate_interval([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, {0.0, 1e-12, 200});
  EXPECT_FALSE(r.converged);
  try {
    require_converged(r, "oscillatory");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConverged);
  }
}

TEST(Quadrature, CubatureThreeDimensions) {
  const auto box = cubature([](std::span<const double> x) { return x[0] * x[1] * x[2]; },
                            {Axis::finite(0, 1), Axis::finite(0, 1), Axis::finite(0, 1)}, {0.0, 1e-10, 1000000});
  EXPECT_NEAR(box.value, 0.125, 1e-10);
  const auto gauss = cubature(
      [](std::span<const double> x) { return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); },
      {Axis::real_line(), Axis::real_line(), Axis::real_line()}, {0.0, 1e-7, 5000000});
  EXPECT_NEAR(gauss.value, std::pow(std::numbers::pi, 1.5), 1e-5);
}

// --- grid distributions --------------------------------------------------------

TEST(Grid, BetaCdfAndQuantile) {
  const auto g = GridDistribution::build([](double x) { return 12.0 * x * (1 - x) * (1 - x); }, 0.0, 1.0, 0.4, 0.2);
  const boost::math::beta_distribution<> b(2.0, 3.0);
  for (double x : {0.05, 0.2, 0.4, 0.6, 0.9}) {
    EXPECT_NEAR(g.cdf(x), boost::math::cdf(b, x), 1e-6) << x;
    EXPECT_NEAR(g.quantile(boost::math::cdf(b, x)), x, 1e-5) << x;
  }
}

TEST(Grid, HeavyTailedWindow) {
  const auto g = GridDistribution::build([](double x) { return 1.0 / (std::numbers::pi * (1 + x * x)); },
                                         -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0, 1.0);
  for (double x : {-30.0, -1.0, 0.0, 2.0, 100.0})
    EXPECT_NEAR(g.cdf(x), 0.5 + std::atan(x) / std::numbers::pi, 1e-5) << x;
  EXPECT_NEAR(g.median(), 0.0, 1e-6);
}

TEST(Grid, SamplesFollowTheLaw) {
  const auto g = GridDistribution::build([](double x) { return 2.0 * (1 - x); }, 0.0, 1.0, 0.0, 0.3);
  Rng rng = make_stream(9, 0);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = g.sample(rng);
  const auto r = ks_test(xs, [](double x) { return 1.0 - (1.0 - x) * (1.0 - x); }, 0.01, "grid", 9);
  EXPECT_TRUE(r.passed) << r.statistic;
}

TEST(Grid, ZeroDensityIsAnError) {
  try {
    GridDistribution::build([](double) { return 0.0; }, 0.0, 1.0, 0.5, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroIntensity);
  }
}

// --- divergence certificates ---------------------------------------------------

TEST(Divergence, HarmonicIsInfinite) {
  const auto c = divergence_certificate([](double u) { return 1.0 / u; }, shrinking_lower_ladder(0.5, 1.0, 24),
                                        QuadOptions{0.0, 1e-10, 100000});
  EXPECT_EQ(c.verdict, MassVerdict::Infinite) << c.rule;
}

TEST(Divergence, InverseSquareIsFinite) {
  const auto c = divergence_certificate([](double u) { return 1.0 / (u * u); }, expanding_upper_ladder(1.0, 2.0, 40),
                                        QuadOptions{0.0, 1e-12, 100000});
  EXPECT_EQ(c.verdict, MassVerdict::Finite) << c.rule;
  EXPECT_NEAR(c.value, 1.0, 1e-3);
}

TEST(Divergence, GeometricGrowthIsInfinite) {
  const auto c = divergence_certificate([](std::size_t k) { return std::ldexp(1.0, static_cast<int>(k)); });
  EXPECT_EQ(c.verdict, MassVerdict::Infinite);
  EXPECT_NE(c.rule.find("growth"), std::string::npos);
}

TEST(Divergence, OscillationIsInconclusive) {
  const auto c = divergence_certificate([](std::size_t k) { return 1.0 + 0.5 * static_cast<double>(k % 2); });
  EXPECT_EQ(c.verdict, MassVerdict::Inconclusive);
}

TEST(Divergence, ShortLadderRejected) {
  EXPECT_THROW(divergence_certificate([](double u) { return u; }, expanding_upper_ladder(0.0, 1.0, 5), QuadOptions{}),
               Error);
}

TEST(Divergence, DecayingIncrementsDoNotCertifyDivergence) {
  // partial sums of 1/k^2 creep up but converge
  const auto c = divergence_certificate([](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 1; i <= (std::size_t{1} << k); ++i) s += 1.0 / (static_cast<double>(i) * i);
    return s;
  }, DivergenceOptions{8, 24, 1.5, 0.95, 6, 1e-4, 3});
  EXPECT_EQ(c.verdict, MassVerdict::Finite);
  EXPECT_NEAR(c.value, std::numbers::pi * std::numbers::pi / 6.0, 1e-3);
}
