// Regions, integration of the intensity, observability, pattern sampling,
// restriction and superposition.

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pprior/measure.hpp"
#include "pprior/models/bernoulli.hpp"
#include "pprior/models/gaussian.hpp"
#include "pprior/verify.hpp"

using namespace pprior;

namespace {

// Gaussian n = 2, p = 1: lambda(y) = 1 / (2 |y1 - y2|).
const IntensityModel& gauss21() {
  static const IntensityModel m = gaussian::make_model({2, 1.0});
  return m;
}

SamplingRegion gap_region(double delta, double x_lo = 0.0, double x_hi = 1.0) {
  return SamplingRegion({{x_lo, x_hi}, {0.0, 1.0}}, "diagonal-gap", {{"delta", delta}});
}

// Lambda of {[0,1]^2 : |y1 - y2| >= delta} = log(1/delta) - (1 - delta).
double gap_mass(double delta) { return std::log(1.0 / delta) - (1.0 - delta); }

template <class E>
ErrorCode code_of(E&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

}  // namespace

TEST(Region, JsonRoundTrip) {
  const auto r = gap_region(0.25);
  const auto back = SamplingRegion::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_EQ(back.predicate_id(), "diagonal-gap");
  EXPECT_EQ(back.dim(), 2u);
}

TEST(Region, MalformedAndUnknown) {
  EXPECT_EQ(code_of([] { SamplingRegion::from_json({{"bounds", 3}}); }), ErrorCode::Config);
  EXPECT_EQ(code_of([] { SamplingRegion::unit_box(2, "no-such-predicate"); }), ErrorCode::Config);
}

TEST(Region, ContainsIsFalseOutsideBounds) {
  const auto r = SamplingRegion({{0.0, 1.0}, {2.0, 3.0}});
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const Point y{uniform01(rng) * 6 - 3, uniform01(rng) * 6 - 3};
    if (!r.in_bounds(y)) EXPECT_FALSE(r.contains(y));
  }
  EXPECT_TRUE(r.contains(Point{0.5, 2.5}));
}

TEST(Region, DiagonalGapIsMinimumPairwiseGap) {
  const auto r = SamplingRegion::unit_box(3, "diagonal-gap", {{"delta", 0.2}});
  EXPECT_TRUE(r.contains(Point{0.0, 0.5, 1.0}));
  EXPECT_FALSE(r.contains(Point{0.0, 0.5, 0.6}));
  EXPECT_FALSE(r.contains(Point{0.1, 0.9, 0.0}));
}

TEST(Integrate, EmptyBoundsGiveZero) {
  const SamplingRegion r({{0.0, 0.0}, {0.0, 1.0}});
  const auto m = integrate_intensity(gauss21(), r);
  EXPECT_TRUE(m.is_finite());
  EXPECT_EQ(m.value, 0.0);
}

TEST(Integrate, DiagonalGapRegionMatchesAnalyticMass) {
  for (double delta : {0.1, 0.3}) {
    const auto m = integrate_intensity(gauss21(), gap_region(delta));
    ASSERT_TRUE(m.is_finite());
    EXPECT_NEAR(m.value / gap_mass(delta), 1.0, 1e-4) << delta;
  }
}

TEST(Integrate, FullSquareIsCertifiedInfinite) {
  auto r = SamplingRegion::unit_box(2);
  const auto obs = check_observable(gauss21(), r);
  EXPECT_EQ(obs.verdict, Observability::NotObservableInfinite);
  EXPECT_TRUE(r.measure().is_infinite());
}

TEST(Integrate, SingularMassKnob) {
  MeasureOptions opts;
  opts.singular_sets_carry_mass = true;
  EXPECT_TRUE(integrate_intensity(gauss21(), SamplingRegion::unit_box(2), opts).is_infinite());
  // a region clear of the diagonal is unaffected
  const SamplingRegion clear({{0.0, 0.4}, {0.6, 1.0}});
  const auto with = integrate_intensity(gauss21(), clear, opts);
  const auto without = integrate_intensity(gauss21(), clear);
  ASSERT_TRUE(with.is_finite());
  EXPECT_DOUBLE_EQ(with.value, without.value);
}

TEST(Integrate, DiscreteSumsAreExact) {
  const auto model = bernoulli::make_model({3});
  EXPECT_DOUBLE_EQ(integrate_intensity(model, bernoulli::binary_region(3)).value, 3.0);
  EXPECT_TRUE(integrate_intensity(model, bernoulli::binary_region(3, "binary-cube")).is_infinite());
  // n = 5, sequences with exactly two ones: 10 * Gamma(3) Gamma(2) / Gamma(5) = 10 * 2 / 24
  const auto m5 = bernoulli::make_model({5});
  std::vector<Point> two;
  for (const auto& y : bernoulli::binary_cube(5))
    if (std::accumulate(y.begin(), y.end(), 0.0) == 2.0) two.push_back(y);
  const double got = integrate_intensity(m5, bernoulli::binary_set_region(5, two)).value;
  EXPECT_NEAR(got, 10.0 * 2.0 / 24.0, 1e-12 * got);
}

TEST(Observable, ZeroMassRegion) {
  auto r = gap_region(2.0);  // no point of the unit square is that far from the diagonal
  EXPECT_EQ(check_observable(gauss21(), r).verdict, Observability::NotObservableZero);
  EXPECT_EQ(code_of([&] { PatternSampler s(gauss21(), r); }), ErrorCode::NotObservable);
  SampleOptions bypass;
  bypass.allow_unobservable = true;
  EXPECT_EQ(sample_point_pattern(gauss21(), r, 1, bypass).size(), 0u);
}

TEST(Observable, InfiniteRegionRefusesToSample) {
  try {
    PatternSampler s(gauss21(), SamplingRegion::unit_box(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotObservable);
    EXPECT_NE(std::string(e.what()).find("NOT_OBSERVABLE_INFINITE"), std::string::npos);
  }
}

TEST(Sampling, DeterministicInSeed) {
  PatternSampler s(gauss21(), gap_region(0.1));
  const auto a = s.sample(99), b = s.sample(99), c = s.sample(100);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_NE(a.to_json().dump(), c.to_json().dump());
}

TEST(Sampling, GaussianCountsAndGapLaw) {
  const double delta = 0.1, mass = gap_mass(delta);
  PatternSampler s(gauss21(), gap_region(delta));
  EXPECT_NEAR(s.mass() / mass, 1.0, 1e-4);
  std::vector<std::uint64_t> counts;
  std::vector<double> gaps;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    const auto p = s.sample(stream_seed(21, r));
    counts.push_back(p.size());
    for (const auto& e : p.events) {
      EXPECT_GE(std::abs(e[0] - e[1]), delta);
      gaps.push_back(std::abs(e[0] - e[1]));
    }
  }
  EXPECT_TRUE(chi_square_counts(counts, mass, 0.01).passed);
  // |y1 - y2| has density proportional to (1 - u) / u on (delta, 1)
  const auto ks = ks_test(gaps, [&](double u) { return (std::log(u / delta) - (u - delta)) / mass; }, 0.01);
  EXPECT_TRUE(ks.passed) << ks.statistic << " vs " << ks.threshold;
  EXPECT_EQ(s.stats().envelope_violations, 0u);
}

TEST(Sampling, BernoulliMeanCount) {
  PatternSampler s(bernoulli::make_model({3}), bernoulli::binary_region(3));
  double total = 0.0;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    const auto p = s.sample(stream_seed(4, r));
    total += static_cast<double>(p.size());
    for (const auto& e : p.events) EXPECT_TRUE(p.region.contains(e));
  }
  EXPECT_NEAR(total / 10000.0, 3.0, 3.0 * std::sqrt(3.0 / 10000.0));
}

TEST(Sampling, CountAdditivityOnDisjointParts) {
  const auto model = bernoulli::make_model({3});
  std::vector<Point> ones1, ones2;
  for (const auto& y : bernoulli::binary_cube(3)) {
    const double k = std::accumulate(y.begin(), y.end(), 0.0);
    (k == 1.0 ? ones1 : ones2).push_back(y);
  }
  const auto a1 = bernoulli::binary_set_region(3, ones1), a2 = bernoulli::binary_set_region(3, ones2);
  PatternSampler s(model, bernoulli::binary_region(3));
  const std::size_t n = 10000;
  std::vector<std::uint64_t> c1(n), c2(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto p = s.sample(stream_seed(8, r));
    c1[r] = restrict_pattern(p, a1).size();
    c2[r] = restrict_pattern(p, a2).size();
  }
  // three sequences of measure 1/2 on each side
  EXPECT_TRUE(chi_square_counts(c1, 1.5, 0.01).passed);
  EXPECT_TRUE(chi_square_counts(c2, 1.5, 0.01).passed);
  // independence: the sample correlation of the two counts is O(1/sqrt(n))
  double m1 = 0, m2 = 0;
  for (std::size_t r = 0; r < n; ++r) m1 += c1[r], m2 += c2[r];
  m1 /= n, m2 /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t r = 0; r < n; ++r) {
    sxy += (c1[r] - m1) * (c2[r] - m2);
    sxx += (c1[r] - m1) * (c1[r] - m1);
    syy += (c2[r] - m2) * (c2[r] - m2);
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sampling, RestrictionMatchesDirectSampling) {
  PatternSampler whole(gauss21(), gap_region(0.1));
  PatternSampler part(gauss21(), gap_region(0.1, 0.0, 0.5));
  const auto sub = gap_region(0.1, 0.0, 0.5);
  std::vector<double> restricted_count(64, 0.0), direct_count(64, 0.0), rx, dx;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    const auto a = restrict_pattern(whole.sample(stream_seed(30, r)), sub);
    const auto b = part.sample(stream_seed(31, r));
    restricted_count[std::min<std::size_t>(a.size(), 63)] += 1;
    direct_count[std::min<std::size_t>(b.size(), 63)] += 1;
    for (const auto& e : a.events) rx.push_back(e[0]);
    for (const auto& e : b.events) dx.push_back(e[0]);
  }
  EXPECT_TRUE(chi_square_homogeneity(restricted_count, direct_count, 0.01).passed);
  EXPECT_TRUE(ks_two_sample(rx, dx, 0.01).passed);
}

TEST(Superpose, TrivialShapes) {
  PointPattern a, b;
  a.region = SamplingRegion({{0.0, 1.0}});
  b.region = SamplingRegion({{2.0, 3.0}});
  EXPECT_EQ(superpose(a, b).size(), 0u);
  a.events = {{0.1}, {0.1}};
  b.events = {{2.5}, {2.6}, {2.7}};
  const auto s = superpose(a, b);
  EXPECT_EQ(s.size(), 5u);
  for (const auto& e : s.events) EXPECT_TRUE(s.region.contains(e));
  EXPECT_FALSE(s.region.contains(Point{1.5}));
}

TEST(Superpose, OverlapIsRejected) {
  PointPattern a, b;
  a.region = SamplingRegion({{0.0, 1.0}});
  b.region = SamplingRegion({{0.5, 3.0}});
  EXPECT_EQ(code_of([&] { superpose(a, b); }), ErrorCode::OverlappingRegions);
}

TEST(Superpose, MatchesDirectSamplingInDistribution) {
  PatternSampler left(gauss21(), gap_region(0.1, 0.0, 0.5));
  PatternSampler right(gauss21(), gap_region(0.1, std::nextafter(0.5, 1.0), 1.0));
  PatternSampler whole(gauss21(), gap_region(0.1));
  std::vector<double> sc(64, 0.0), dc(64, 0.0), s0, d0, s1, d1;
  for (std::uint64_t r = 0; r < 3000; ++r) {
    const auto s = superpose(left.sample(stream_seed(40, r)), right.sample(stream_seed(41, r)));
    const auto d = whole.sample(stream_seed(42, r));
    sc[std::min<std::size_t>(s.size(), 63)] += 1;
    dc[std::min<std::size_t>(d.size(), 63)] += 1;
    for (const auto& e : s.events) s0.push_back(e[0]), s1.push_back(e[1]);
    for (const auto& e : d.events) d0.push_back(e[0]), d1.push_back(e[1]);
  }
  EXPECT_TRUE(chi_square_homogeneity(sc, dc, 0.01).passed);
  EXPECT_TRUE(ks_two_sample(s0, d0, 0.01).passed);
  EXPECT_TRUE(ks_two_sample(s1, d1, 0.01).passed);
}

TEST(Pattern, JsonRoundTripKeepsCoincidentEvents) {
  PointPattern p;
  p.region = gap_region(0.1);
  p.seed = 12;
  p.events = {{0.1, 0.9}, {0.1, 0.9}, {0.8, 0.2}};
  const auto back = PointPattern::from_json(p.to_json());
  EXPECT_EQ(back.events, p.events);
  EXPECT_EQ(back.seed, p.seed);
  EXPECT_EQ(back.to_json().dump(), p.to_json().dump());
}

TEST(Pattern, RejectsEventsOutsideRegion) {
  PointPattern p;
  p.region = gap_region(0.1);
  auto j = p.to_json();
  j["events"] = {{0.5, 0.5}};
  EXPECT_EQ(code_of([&] { PointPattern::from_json(j); }), ErrorCode::Config);
  j["events"] = {{0.5}};
  EXPECT_EQ(code_of([&] { PointPattern::from_json(j); }), ErrorCode::Config);
}
