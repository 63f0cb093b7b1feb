#pragma once

// The acceptance suite: ten criteria, each a list of VerificationReports.
// Used by the acceptance test binary and by `pprior verify`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pprior/cli/commands.hpp"
#include "pprior/conditional.hpp"
#include "pprior/measure.hpp"
#include "pprior/models/bernoulli.hpp"
#include "pprior/models/cauchy.hpp"
#include "pprior/models/gaussian.hpp"
#include "pprior/models/paradox.hpp"
#include "pprior/special.hpp"
#include "pprior/verify.hpp"

namespace pprior::cli {
int cmd_verify(const CommandOptions& o, std::ostream& out, std::ostream& err);
}

namespace pprior::acceptance {

struct Options {
  std::uint64_t seed = 1;
  /// Forwarded to the gaussian closed form (mutation testing).
  double perturbation = 0.0;
  /// Add a runtime-limit report per criterion.
  bool timing = true;
};

struct Criterion {
  std::string id;
  std::string title;
  /// Wall-clock limit in milliseconds; 0 means none.
  std::int64_t limit_ms = 0;
  /// Whether the criterion draws random numbers (and so is calibrated over
  /// many seeds in the full suite).
  bool stochastic = false;
  std::function<std::vector<VerificationReport>(const Options&)> run;
};

struct CriterionResult {
  std::string id;
  std::string title;
  std::vector<VerificationReport> reports;
  std::int64_t runtime_ms = 0;

  bool passed() const {
    return !reports.empty() && std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed; });
  }
};

namespace detail {

inline constexpr double kAlpha = 0.01;

inline VerificationReport indicator(std::string id, bool ok, std::uint64_t seed, std::string notes) {
  return make_report(std::move(id), ok ? 1.0 : 0.0, 1.0, Direction::AtLeast, seed, {}, std::move(notes));
}

// Random vectors in [-3, 3]^n whose closest pair is at least 5% of the range.
inline std::vector<Point> probe_vectors(std::size_t count, std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, n);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Point> out;
  while (out.size() < count) {
    Point y(n);
    for (auto& v : y) v = u(rng);
    std::vector<double> s = y;
    std::sort(s.begin(), s.end());
    double gap = kInfinity;
    for (std::size_t i = 1; i < s.size(); ++i) gap = std::min(gap, s[i] - s[i - 1]);
    if (gap >= 0.05 * (s.back() - s.front())) out.push_back(std::move(y));
  }
  return out;
}

inline std::string label(const char* family, std::size_t n, double p) {
  std::ostringstream os;
  os << family << "(n=" << n << ",p=" << p << ")";
  return os.str();
}

inline std::string fmt(double v) { return cli::format_double(v); }

}  // namespace detail

// AC1 -------------------------------------------------------------------------
inline std::vector<VerificationReport> closed_form_agreement(const Options& o) {
  std::vector<VerificationReport> out;
  constexpr std::size_t kProbes = 50;
  for (auto [n, p] : std::vector<std::pair<std::size_t, double>>{{2, 1.0}, {3, 1.0}, {3, 2.0}}) {
    const gaussian::GaussianImproperModel g{n, p, o.perturbation};
    const auto probes = detail::probe_vectors(kProbes, n, 101);
    std::vector<double> err(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) {
      err[i] = std::abs(gaussian::gaussian_intensity(g, probes[i]) /
                            gaussian::gaussian_intensity_quadrature(g, probes[i]) -
                        1.0);
    });
    out.push_back(make_report("AC1." + detail::label("gaussian", n, p), *std::max_element(err.begin(), err.end()),
                              1e-3, Direction::Below, 0, {kProbes}, "max relative error, closed form vs quadrature"));
  }
  for (auto [n, p] : std::vector<std::pair<std::size_t, double>>{{3, 2.0}, {4, 3.0}}) {
    const cauchy::CauchyImproperModel c{n, p};
    const auto probes = detail::probe_vectors(kProbes, n, 202);
    std::vector<double> err(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) {
      err[i] = std::abs(cauchy::cauchy_intensity_closed(c, probes[i]) /
                            cauchy::cauchy_intensity_quadrature(c, probes[i]) -
                        1.0);
    });
    out.push_back(make_report("AC1." + detail::label("cauchy", n, p), *std::max_element(err.begin(), err.end()),
                              1e-3, Direction::Below, 0, {kProbes}, "max relative error, closed form vs quadrature"));
  }
  return out;
}

// AC2 -------------------------------------------------------------------------
inline std::vector<VerificationReport> location_scale_universality(const Options& o) {
  const std::vector<double> y{0.0, 1.0};
  const double g = gaussian::gaussian_intensity({2, 1.0, o.perturbation}, y);
  const double c = cauchy::cauchy_intensity_closed({2, 1.0}, y);
  return {make_report("AC2.gaussian_lambda21", std::abs(g - 0.5), 1e-12, Direction::Below, 0, {},
                      "value " + detail::fmt(g)),
          make_report("AC2.cauchy_lambda21", std::abs(c - 0.5), 1e-12, Direction::Below, 0, {},
                      "value " + detail::fmt(c))};
}

// AC3 -------------------------------------------------------------------------
inline std::vector<VerificationReport> bernoulli_end_to_end(const Options& o) {
  std::vector<VerificationReport> out;
  const bernoulli::BernoulliImproperModel b{3};
  const auto model = bernoulli::make_model(b);
  auto region = bernoulli::binary_region(3);
  const auto lambda = integrate_intensity(model, region);
  out.push_back(make_report("AC3.measure", std::abs(lambda.value - 3.0), 1e-12, Direction::Below, 0, {},
                            "Lambda(A) = " + detail::fmt(lambda.value)));

  constexpr std::size_t kReplicates = 10'000;
  PatternSampler sampler(model, region);
  std::vector<std::uint64_t> counts(kReplicates);
  std::optional<PointPattern> first;
  for (std::size_t r = 0; r < kReplicates; ++r) {
    auto pat = sampler.sample(stream_seed(o.seed, r));
    counts[r] = pat.size();
    if (!first && pat.size() > 0) first = std::move(pat);
  }
  out.push_back(chi_square_counts(counts, 3.0, detail::kAlpha, "AC3.counts", o.seed));

  std::set<Point> distinct(first->events.begin(), first->events.end());
  std::size_t k = 0;
  for (const auto& y : distinct) {
    const auto bp = bernoulli::beta_posterior_params(b, y);
    const auto law = posterior_for_event(model, y);
    std::vector<double> xs;
    for (const auto& d : sample_posterior(law, 5'000, stream_seed(o.seed ^ 0x5eedULL, k++))) xs.push_back(d[0]);
    std::ostringstream id;
    id << "AC3.posterior_ks[y=(" << y[0] << "," << y[1] << "," << y[2] << ")]";
    out.push_back(ks_test(xs, [&](double x) { return special::beta_cdf(x, bp.alpha, bp.beta); }, detail::kAlpha,
                          id.str(), o.seed));
  }
  return out;
}

// AC4 -------------------------------------------------------------------------
inline std::vector<VerificationReport> gosset_limit_law(const Options& o) {
  const gaussian::GaussianImproperModel g{2, 1.0};
  const std::vector<double> y{0.0, 1.0};
  const auto terminal = gaussian::gosset_limit(g, y, 10'000, 2'000, o.seed);
  std::vector<double> means;
  for (const auto& t : terminal) means.push_back(t.ybar);
  PosteriorOptions po;
  po.use_model_sampler = false;
  const auto law = posterior_for_event(gaussian::make_model(g), y, po);
  const auto& marginal = law.first_axis_law();
  return {ks_test(means, [&](double x) { return marginal.cdf(x); }, detail::kAlpha, "AC4.gosset_ks", o.seed)};
}

// AC5 -------------------------------------------------------------------------
inline std::vector<VerificationReport> polya_limit_law(const Options& o) {
  const bernoulli::BernoulliImproperModel b{3};
  const std::vector<double> y{1.0, 0.0, 0.0};
  const auto limits = bernoulli::polya_limit(b, y, 10'000, 5'000, o.seed);
  std::vector<VerificationReport> out;
  out.push_back(ks_test(limits, [](double x) { return special::beta_cdf(x, 1.0, 2.0); }, detail::kAlpha,
                        "AC5.polya_ks", o.seed));

  std::size_t mismatches = 0;
  bernoulli::Rational total(0);
  for (int code = 0; code < 8; ++code) {
    std::vector<int> ext{(code >> 2) & 1, (code >> 1) & 1, code & 1};
    const auto path = bernoulli::polya_path_probability(y, ext);
    total += path;
    if (path != bernoulli::exchangeable_probability(y, ext)) ++mismatches;
    auto perm = ext;
    std::sort(perm.begin(), perm.end());
    do {
      if (bernoulli::polya_path_probability(y, perm) != path) ++mismatches;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  if (total != bernoulli::Rational(1)) ++mismatches;
  out.push_back(make_report("AC5.exact_extension", static_cast<double>(mismatches), 1.0, Direction::Below, 0, {8},
                            "rational mismatches over the 8 three-step extensions"));
  return out;
}

// AC6 -------------------------------------------------------------------------
inline std::vector<VerificationReport> cauchy_recurrence(const Options&) {
  const cauchy::CauchyImproperModel c{3, 2.0};
  const std::vector<double> head{0.0, 1.0};
  const double e2 = cauchy::recurrence_check(c, head, 1e2);
  const double e3 = cauchy::recurrence_check(c, head, 1e3);
  const double e4 = cauchy::recurrence_check(c, head, 1e4);
  const double e4n = cauchy::recurrence_check(c, head, -1e4);
  return {make_report("AC6.error_at_plus_1e4", e4, 1e-3, Direction::Below, 0, {}, "relative error"),
          make_report("AC6.error_at_minus_1e4", e4n, 1e-3, Direction::Below, 0, {}, "relative error"),
          detail::indicator("AC6.monotone", e2 > e3 && e3 > e4, 0,
                            "errors " + detail::fmt(e2) + ", " + detail::fmt(e3) + ", " + detail::fmt(e4))};
}

// AC7 -------------------------------------------------------------------------
inline std::vector<VerificationReport> kolmogorov_consistency(const Options& o) {
  const gaussian::GaussianImproperModel g{2, 1.0, o.perturbation};
  const auto probes = detail::probe_vectors(20, 2, 303);
  std::vector<double> err(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) {
    const auto& y = probes[i];
    const double spread = std::abs(y[0] - y[1]);
    auto r = integrate_1d(
        [&](double x) {
          const double v[3] = {y[0], y[1], x};
          return gaussian::gaussian_intensity(g.extended(1), PointView(v, 3));
        },
        Axis::real_line(0.5 * (y[0] + y[1]), spread), QuadOptions{0.0, 1e-10, 1'000'000});
    err[i] = std::abs(require_converged(r, "consistency integral") / gaussian::gaussian_intensity(g, y) - 1.0);
  });
  return {make_report("AC7.consistency", *std::max_element(err.begin(), err.end()), 1e-3, Direction::Below, 0,
                      {probes.size()}, "max relative error of int lambda_3(y, x) dx vs lambda_2(y)")};
}

// AC8 -------------------------------------------------------------------------
inline std::vector<VerificationReport> paradox_suite(const Options&) {
  std::vector<VerificationReport> out;
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(0.01 * std::pow(5000.0, i / 199.0));

  // (i) point-process conditional against Method 1.
  {
    const auto pm = paradox::make_paradox("flat", "one");
    const auto model = paradox::make_model(pm);
    double gap = 0.0;
    for (auto [x, yv] : std::vector<std::pair<double, double>>{{1, 1}, {1, 2}, {2, 0.5}, {3, 7}}) {
      const double ev[2] = {x, yv};
      const auto law = posterior_for_event(model, PointView(ev, 2));
      const auto m1 = paradox::method1_posterior(pm, x, yv);
      for (double t : grid) gap = std::max(gap, std::abs(law.density(PointView(&t, 1)) - m1.density(t)));
    }
    out.push_back(make_report("AC8.i.method1_agreement", gap, 1e-9, Direction::Below, 0, {grid.size() * 4},
                              "max |point-process conditional - method 1|"));
  }
  // (ii) baseline z-marginal.
  {
    const auto zm = paradox::z_marginal_observability(paradox::make_paradox("flat", "one"), 0.5, 2.0);
    out.push_back(detail::indicator("AC8.ii.baseline_not_observable",
                                    zm.verdict == Observability::NotObservableInfinite, 0,
                                    std::string(to_string(zm.verdict)) + " by " + zm.certificate.rule));
  }
  // (iii) multiplicative variant.
  {
    const auto pm = paradox::make_paradox("exp", "exp");
    const auto zm = paradox::z_marginal_observability(pm, 0.5, 2.0);
    out.push_back(detail::indicator("AC8.iii.multiplicative_observable", zm.verdict == Observability::Observable, 0,
                                    std::string(to_string(zm.verdict)) + " value " + detail::fmt(zm.value)));
    const double z = 1.0;
    const auto cz = paradox::conditional_given_z(pm, z);
    const auto m2 = paradox::method2_normalization(pm, z);
    double gap = 0.0;
    for (double t : grid) {
      if (t > 40.0) break;
      gap = std::max(gap, std::abs(cz.theta_marginal(t) - paradox::method2_density(pm, m2, t)));
    }
    out.push_back(make_report("AC8.iii.conditional_matches_method2", gap, 1e-6, Direction::Below, 0, {},
                              "max |theta-marginal given z - normalized method 2|, z = 1"));
  }
  // (iv) the two methods disagree for pi(theta) = exp(-theta).
  {
    const auto pm = paradox::make_paradox("exp", "one");
    const auto m1 = paradox::method1_posterior(pm, 1.0, 1.0);
    const auto m2 = paradox::method2_normalization(pm, 1.0);
    double gap = 0.0;
    for (double t : grid) gap = std::max(gap, std::abs(m1.density(t) - paradox::method2_density(pm, m2, t)));
    out.push_back(make_report("AC8.iv.methods_differ", gap, 0.01, Direction::Above, 0, {},
                              "max |method 1 - method 2|, z = 1"));
  }
  return out;
}

// AC9 -------------------------------------------------------------------------
inline std::vector<VerificationReport> superposition_consistency(const Options& o) {
  const auto model = bernoulli::make_model({3});
  std::vector<Point> ones1, ones2;
  for (const auto& y : bernoulli::binary_cube(3)) {
    const auto c = bernoulli::counts(y);
    if (c.ones == 1) ones1.push_back(y);
    if (c.ones == 2) ones2.push_back(y);
  }
  PatternSampler direct(model, bernoulli::binary_region(3));
  PatternSampler part1(model, bernoulli::binary_set_region(3, ones1));
  PatternSampler part2(model, bernoulli::binary_set_region(3, ones2));

  constexpr std::size_t kReplicates = 10'000;
  const auto cube = bernoulli::binary_cube(3);
  auto category = [&](const Point& y) {
    return static_cast<std::size_t>(std::find(cube.begin(), cube.end(), y) - cube.begin());
  };
  std::vector<double> count_direct(64, 0.0), count_part(64, 0.0);
  std::vector<double> freq_direct(cube.size(), 0.0), freq_part(cube.size(), 0.0);
  std::vector<std::uint64_t> part_counts(kReplicates);
  const std::uint64_t s_direct = stream_seed(o.seed, 1), s1 = stream_seed(o.seed, 2), s2 = stream_seed(o.seed, 3);
  for (std::size_t r = 0; r < kReplicates; ++r) {
    const auto d = direct.sample(stream_seed(s_direct, r));
    const auto p = superpose(part1.sample(stream_seed(s1, r)), part2.sample(stream_seed(s2, r)));
    count_direct[std::min<std::size_t>(d.size(), 63)] += 1.0;
    count_part[std::min<std::size_t>(p.size(), 63)] += 1.0;
    part_counts[r] = p.size();
    for (const auto& e : d.events) freq_direct[category(e)] += 1.0;
    for (const auto& e : p.events) freq_part[category(e)] += 1.0;
  }
  // Constant sequences never occur; drop their empty categories.
  std::vector<double> fd, fp;
  for (std::size_t i = 0; i < cube.size(); ++i)
    if (freq_direct[i] + freq_part[i] > 0.0) {
      fd.push_back(freq_direct[i]);
      fp.push_back(freq_part[i]);
    }
  return {chi_square_homogeneity(count_direct, count_part, detail::kAlpha, "AC9.count_homogeneity", o.seed),
          chi_square_homogeneity(fd, fp, detail::kAlpha, "AC9.event_frequency_homogeneity", o.seed),
          chi_square_counts(part_counts, 3.0, detail::kAlpha, "AC9.superposed_counts", o.seed)};
}

// AC10 ------------------------------------------------------------------------
namespace detail {

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline std::vector<VerificationReport> cli_determinism(const Options& o) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("pprior-determinism-" + std::to_string(o.seed) + "-" +
                                                    std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directories(dir);
  auto write_config = [&](const std::string& name, const Json& j) {
    const auto path = dir / name;
    std::ofstream(path, std::ios::binary) << j.dump(2);
    return path.string();
  };
  const Json bern = {{"model", {{"id", "bernoulli"}, {"n", 3}}},
                     {"region", bernoulli::binary_region(3).to_json()},
                     {"seed", 42},
                     {"draws", 50},
                     {"extend", {{"y", {1, 0, 0}}, {"paths", 10}, {"steps", 1000}}}};
  const Json gauss = {{"model", {{"id", "gaussian"}, {"n", 2}, {"p", 1.0}}},
                      {"region", SamplingRegion::unit_box(2, "diagonal-gap", {{"delta", 0.1}}).to_json()},
                      {"seed", 7},
                      {"draws", 20},
                      {"extend", {{"y", {0, 1}}, {"paths", 10}, {"steps", 100}}}};
  const Json para = {{"model", {{"id", "paradox"}, {"theta_prior", {{"id", "flat"}}}, {"phi_prior", {{"id", "one"}}}}},
                     {"paradox", {{"x", 1.0}, {"y", 2.0}, {"grid_upper", 400.0}, {"grid_step", 0.5}}}};
  const auto bern_cfg = write_config("bernoulli.json", bern);
  const auto gauss_cfg = write_config("gaussian.json", gauss);
  const auto para_cfg = write_config("paradox.json", para);

  using Cmd = int (*)(const cli::CommandOptions&, std::ostream&, std::ostream&);
  struct Case {
    std::string name;
    Cmd cmd;
    cli::CommandOptions opts;
  };
  std::vector<Case> cases;
  auto add = [&](std::string name, Cmd cmd, std::string cfg) {
    cli::CommandOptions c;
    c.config_path = std::move(cfg);
    cases.push_back({std::move(name), cmd, std::move(c)});
  };
  add("sample-bernoulli", cli::cmd_sample, bern_cfg);
  add("sample-gaussian", cli::cmd_sample, gauss_cfg);
  add("posterior-bernoulli", cli::cmd_posterior, bern_cfg);
  add("posterior-gaussian", cli::cmd_posterior, gauss_cfg);
  add("extend-gaussian", cli::cmd_extend, gauss_cfg);
  add("extend-bernoulli", cli::cmd_extend, bern_cfg);
  add("paradox", cli::cmd_paradox, para_cfg);
  {
    cli::CommandOptions v;
    v.only = {"AC2", "AC6"};
    cases.push_back({"verify", cli::cmd_verify, v});
  }

  std::vector<VerificationReport> out;
  std::ostringstream sink;
  for (auto& c : cases) {
    std::string first, second;
    bool ok = true;
    for (int run = 0; run < 2; ++run) {
      auto opts = c.opts;
      opts.out = (dir / (c.name + "." + std::to_string(run) + ".out")).string();
      if (c.name.rfind("posterior", 0) == 0) opts.pattern_path = (dir / (c.name.substr(10) + "-pattern.json")).string();
      if (c.name == "posterior-bernoulli" || c.name == "posterior-gaussian") {
        // Condition on the pattern produced by the matching sample run.
        fs::copy_file(dir / ("sample-" + c.name.substr(10) + ".0.out"), opts.pattern_path,
                      fs::copy_options::overwrite_existing);
      }
      ok = ok && c.cmd(opts, sink, sink) == 0;
      (run == 0 ? first : second) = detail::slurp(*opts.out);
    }
    const bool same = ok && !first.empty() && first == second;
    out.push_back(detail::indicator("AC10." + c.name, same, o.seed,
                                    same ? std::to_string(first.size()) + " identical bytes"
                                         : (ok ? "outputs differ" : "command failed: " + sink.str())));
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return out;
}

inline std::vector<Criterion> criteria() {
  return {
      {"AC1", "closed-form intensities match 2-D quadrature", 120'000, false, closed_form_agreement},
      {"AC2", "lambda_{2,1}(0,1) = 0.5 from both families", 0, false, location_scale_universality},
      {"AC3", "bernoulli measure, counts and posteriors", 60'000, true, bernoulli_end_to_end},
      {"AC4", "gosset limit matches the posterior theta-marginal", 300'000, true, gosset_limit_law},
      {"AC5", "polya limit is Beta(1,2); exact exchangeable extensions", 120'000, true, polya_limit_law},
      {"AC6", "cauchy recurrence", 1'000, false, cauchy_recurrence},
      {"AC7", "kolmogorov consistency of the gaussian intensities", 60'000, false, kolmogorov_consistency},
      {"AC8", "marginalization paradox suite", 60'000, false, paradox_suite},
      {"AC9", "superposition consistency on the bernoulli region", 60'000, true, superposition_consistency},
      {"AC10", "CLI reruns are byte-identical", 0, false, cli_determinism},
  };
}

inline CriterionResult run_criterion(const Criterion& c, const Options& o) {
  CriterionResult res;
  res.id = c.id;
  res.title = c.title;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    res.reports = c.run(o);
  } catch (const std::exception& e) {
    res.reports.push_back(make_report(c.id + ".error", 1.0, 0.0, Direction::Below, o.seed, {}, e.what()));
  }
  res.runtime_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  for (auto& r : res.reports) r.runtime_ms = res.runtime_ms;
  if (o.timing && c.limit_ms > 0) {
    auto r = make_report(c.id + ".runtime", static_cast<double>(res.runtime_ms), static_cast<double>(c.limit_ms),
                         Direction::Below, o.seed, {}, "wall-clock milliseconds");
    r.runtime_ms = res.runtime_ms;
    res.reports.push_back(r);
  }
  return res;
}

/// Runs every stochastic criterion over seeds 1..seeds and folds each check
/// into one report: the number of passing seeds, which must reach
/// `min_passes`. Deterministic criteria run once.
inline std::vector<CriterionResult> run_calibration(const std::vector<Criterion>& list, const Options& base,
                                                    std::size_t seeds = 100, std::size_t min_passes = 95) {
  std::vector<CriterionResult> out;
  for (const auto& c : list) {
    if (!c.stochastic) {
      out.push_back(run_criterion(c, base));
      continue;
    }
    CriterionResult agg;
    agg.id = c.id;
    agg.title = c.title;
    // Some check ids depend on the sampled pattern and only occur in part of
    // the seeds, so the pass threshold scales with the occurrences.
    std::map<std::string, std::size_t> passes, seen;
    for (std::size_t s = 1; s <= seeds; ++s) {
      Options o = base;
      o.seed = s;
      o.timing = false;
      const auto r = run_criterion(c, o);
      agg.runtime_ms += r.runtime_ms;
      for (const auto& rep : r.reports) {
        passes[rep.check_id] += rep.passed ? 1 : 0;
        ++seen[rep.check_id];
      }
    }
    for (const auto& [id, n] : passes) {
      const std::size_t runs = seen[id];
      const double need = static_cast<double>(min_passes) * static_cast<double>(runs) / static_cast<double>(seeds);
      auto rep = make_report(id, static_cast<double>(n), need, Direction::AtLeast, 0, {runs},
                             "passing seeds out of " + std::to_string(runs));
      rep.runtime_ms = agg.runtime_ms;
      agg.reports.push_back(rep);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

}  // namespace pprior::acceptance

namespace pprior::cli {

/// verify: runs the acceptance suite and writes one JSON line per check.
inline int cmd_verify(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (o.suite != "smoke" && o.suite != "full") fail(ErrorCode::Config, "--suite must be smoke or full");
    std::vector<acceptance::Criterion> list;
    for (auto& c : acceptance::criteria())
      if (o.only.empty() || std::find(o.only.begin(), o.only.end(), c.id) != o.only.end()) list.push_back(c);
    if (list.empty()) fail(ErrorCode::Config, "--only selects no criteria");
    acceptance::Options ao;
    ao.seed = o.seed.value_or(1);
    ao.perturbation = o.perturbation;
    ao.timing = o.with_timing;
    std::vector<acceptance::CriterionResult> results;
    if (o.suite == "full") {
      results = acceptance::run_calibration(list, ao);
    } else {
      for (const auto& c : list) results.push_back(acceptance::run_criterion(c, ao));
    }
    std::vector<VerificationReport> reports;
    for (const auto& r : results) reports.insert(reports.end(), r.reports.begin(), r.reports.end());
    std::ostringstream lines;
    write_jsonl(lines, reports, o.with_timing);
    emit(o.out.value_or(""), lines.str(), out);
    std::vector<std::string> failing;
    for (const auto& r : reports)
      if (!r.passed) failing.push_back(r.check_id);
    if (failing.empty()) return static_cast<int>(kOk);
    err << "verification failed:";
    for (const auto& id : failing) err << ' ' << id;
    err << '\n';
    return static_cast<int>(kVerificationFailed);
  });
}

}  // namespace pprior::cli
