#pragma once

// Goodness-of-fit tests and the VerificationReport record shared by the unit
// tests, the acceptance suite and `pprior verify`.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pprior/divergence.hpp"
#include "pprior/error.hpp"
#include "pprior/special.hpp"

namespace pprior {

/// Which side of the threshold counts as a pass: strictly below, strictly
/// above, or at least.
enum class Direction { Below, Above, AtLeast };

constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Below: return "below";
    case Direction::Above: return "above";
    case Direction::AtLeast: return "at_least";
  }
  return "below";
}

struct VerificationReport {
  std::string check_id;
  double statistic = 0.0;
  double threshold = 0.0;
  Direction direction = Direction::Below;
  bool passed = false;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> sample_sizes;
  std::int64_t runtime_ms = 0;
  std::string notes;
};

inline bool compare(double statistic, double threshold, Direction d) {
  if (std::isnan(statistic)) return false;
  switch (d) {
    case Direction::Below: return statistic < threshold;
    case Direction::Above: return statistic > threshold;
    case Direction::AtLeast: return statistic >= threshold;
  }
  return false;
}

inline VerificationReport make_report(std::string id, double statistic, double threshold, Direction direction,
                                      std::uint64_t seed = 0, std::vector<std::uint64_t> sizes = {},
                                      std::string notes = {}) {
  VerificationReport r;
  r.check_id = std::move(id);
  r.statistic = statistic;
  r.threshold = threshold;
  r.direction = direction;
  r.passed = compare(statistic, threshold, direction);
  r.seed = seed;
  r.sample_sizes = std::move(sizes);
  r.notes = std::move(notes);
  return r;
}

inline nlohmann::json to_json(const VerificationReport& r, bool with_runtime = true) {
  nlohmann::json j = {{"check_id", r.check_id},
                      {"statistic", r.statistic},
                      {"threshold", r.threshold},
                      {"direction", std::string(to_string(r.direction))},
                      {"passed", r.passed},
                      {"seed", r.seed},
                      {"sample_sizes", r.sample_sizes},
                      {"notes", r.notes}};
  if (with_runtime) j["runtime_ms"] = r.runtime_ms;
  return j;
}

/// One JSON object per line, ordered by check_id then seed.
inline void write_jsonl(std::ostream& os, std::vector<VerificationReport> reports, bool with_runtime = true) {
  std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
    return a.check_id != b.check_id ? a.check_id < b.check_id : a.seed < b.seed;
  });
  for (const auto& r : reports) os << to_json(r, with_runtime).dump() << '\n';
}

inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// One-sample Kolmogorov-Smirnov test with critical value c(alpha)/sqrt(N).
inline VerificationReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                                  double alpha, std::string id = "ks", std::uint64_t seed = 0) {
  if (samples.size() < 50) fail(ErrorCode::TooFewSamples, "ks_test needs at least 50 samples");
  const double n = static_cast<double>(samples.size());
  const double d = ks_statistic(std::vector<double>(samples.begin(), samples.end()), cdf);
  return make_report(std::move(id), d, special::ks_critical_constant(alpha) / std::sqrt(n), Direction::Below, seed,
                     {samples.size()}, "one-sample KS, alpha=" + std::to_string(alpha));
}

inline VerificationReport ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha,
                                        std::string id = "ks2", std::uint64_t seed = 0) {
  if (a.size() < 50 || b.size() < 50) fail(ErrorCode::TooFewSamples, "ks_two_sample needs at least 50 per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double crit = special::ks_critical_constant(alpha) * std::sqrt((na + nb) / (na * nb));
  return make_report(std::move(id), d, crit, Direction::Below, seed, {a.size(), b.size()},
                     "two-sample KS, alpha=" + std::to_string(alpha));
}

namespace detail {

// Merges adjacent cells until each expected count reaches `min_expected`.
inline void pool_cells(std::vector<double>& expected, std::vector<std::vector<double>>& observed,
                       double min_expected) {
  std::vector<double> e2;
  std::vector<std::vector<double>> o2(observed.size());
  double acc = 0.0;
  std::vector<double> acc_o(observed.size(), 0.0);
  for (std::size_t k = 0; k < expected.size(); ++k) {
    acc += expected[k];
    for (std::size_t r = 0; r < observed.size(); ++r) acc_o[r] += observed[r][k];
    if (acc >= min_expected) {
      e2.push_back(acc);
      for (std::size_t r = 0; r < observed.size(); ++r) o2[r].push_back(acc_o[r]);
      acc = 0.0;
      std::fill(acc_o.begin(), acc_o.end(), 0.0);
    }
  }
  if (acc > 0.0 || std::any_of(acc_o.begin(), acc_o.end(), [](double v) { return v > 0.0; })) {
    if (e2.empty()) {
      e2.push_back(acc);
      for (std::size_t r = 0; r < observed.size(); ++r) o2[r].push_back(acc_o[r]);
    } else {
      e2.back() += acc;
      for (std::size_t r = 0; r < observed.size(); ++r) o2[r].back() += acc_o[r];
    }
  }
  expected = std::move(e2);
  observed = std::move(o2);
}

}  // namespace detail

/// Chi-square goodness of fit of replicate counts to Poisson(expected_mean),
/// with tail cells pooled until every expected count is at least 5.
inline VerificationReport chi_square_counts(std::span<const std::uint64_t> counts, double expected_mean,
                                            double alpha, std::string id = "chi2-poisson", std::uint64_t seed = 0) {
  if (counts.size() < 200) fail(ErrorCode::TooFewSamples, "chi_square_counts needs at least 200 replicates");
  if (!(expected_mean > 0.0)) fail(ErrorCode::Domain, "chi_square_counts: expected mean must be positive");
  const double n = static_cast<double>(counts.size());
  const std::uint64_t max_seen = *std::max_element(counts.begin(), counts.end());
  const auto kmax = static_cast<std::size_t>(
      std::max<double>(static_cast<double>(max_seen), expected_mean + 20.0 * std::sqrt(expected_mean) + 20.0));
  std::vector<double> expected(kmax + 2, 0.0);
  std::vector<std::vector<double>> observed(1, std::vector<double>(kmax + 2, 0.0));
  double below = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double p = special::poisson_pmf(static_cast<unsigned>(k), expected_mean);
    expected[k] = n * p;
    below += p;
  }
  expected[kmax + 1] = n * std::max(0.0, 1.0 - below);
  for (auto c : counts) observed[0][std::min<std::size_t>(c, kmax + 1)] += 1.0;
  detail::pool_cells(expected, observed, 5.0);
  double stat = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const double diff = observed[0][k] - expected[k];
    stat += diff * diff / expected[k];
  }
  const double df = static_cast<double>(expected.size()) - 1.0;
  // A single pooled cell leaves nothing to test.
  const double crit =
      df >= 1.0 ? special::chi_square_quantile(1.0 - alpha, df) : std::numeric_limits<double>::infinity();
  return make_report(std::move(id), stat, crit, Direction::Below, seed,
                     {counts.size()},
                     "Poisson(" + std::to_string(expected_mean) + ") GOF, " + std::to_string(expected.size()) +
                         " cells, df=" + std::to_string(static_cast<int>(df)));
}

/// Chi-square test of homogeneity between two categorical samples given as
/// per-category tallies over the same ordered categories. Sparse categories
/// are merged with their neighbours.
inline VerificationReport chi_square_homogeneity(std::span<const double> first, std::span<const double> second,
                                                 double alpha, std::string id = "chi2-homogeneity",
                                                 std::uint64_t seed = 0) {
  if (first.size() != second.size()) fail(ErrorCode::Domain, "homogeneity test needs matching categories");
  const double n1 = std::accumulate(first.begin(), first.end(), 0.0);
  const double n2 = std::accumulate(second.begin(), second.end(), 0.0);
  if (n1 < 200 || n2 < 200) fail(ErrorCode::TooFewSamples, "homogeneity test needs at least 200 per sample");
  const double total = n1 + n2;
  // Pool on the smaller of the two expected cell counts.
  std::vector<double> pooled_expected(first.size());
  for (std::size_t k = 0; k < first.size(); ++k)
    pooled_expected[k] = std::min(n1, n2) * (first[k] + second[k]) / total;
  std::vector<std::vector<double>> observed = {std::vector<double>(first.begin(), first.end()),
                                               std::vector<double>(second.begin(), second.end())};
  detail::pool_cells(pooled_expected, observed, 5.0);
  double stat = 0.0;
  for (std::size_t k = 0; k < pooled_expected.size(); ++k) {
    const double col = observed[0][k] + observed[1][k];
    const double e1 = n1 * col / total, e2 = n2 * col / total;
    if (e1 > 0.0) stat += (observed[0][k] - e1) * (observed[0][k] - e1) / e1;
    if (e2 > 0.0) stat += (observed[1][k] - e2) * (observed[1][k] - e2) / e2;
  }
  const double df = static_cast<double>(pooled_expected.size()) - 1.0;
  const double crit = df >= 1.0 ? special::chi_square_quantile(1.0 - alpha, df) : std::numeric_limits<double>::infinity();
  return make_report(std::move(id), stat, crit, Direction::Below, seed,
                     {static_cast<std::uint64_t>(n1), static_cast<std::uint64_t>(n2)},
                     "two-sample homogeneity, df=" + std::to_string(static_cast<int>(df)));
}

}  // namespace pprior
