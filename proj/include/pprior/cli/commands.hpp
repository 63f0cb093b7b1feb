#pragma once

// Subcommands of the pprior tool as plain functions returning exit codes:
// 0 success, 1 verification failure, 2 domain or observability error,
// 3 usage or config error.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pprior/conditional.hpp"
#include "pprior/config.hpp"
#include "pprior/error.hpp"
#include "pprior/measure.hpp"
#include "pprior/models/bernoulli.hpp"
#include "pprior/models/gaussian.hpp"
#include "pprior/models/paradox.hpp"

namespace pprior::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kDomainError = 2, kUsageError = 3 };

struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tol;
  /// posterior: pattern file to condition on.
  std::string pattern_path;
  /// verify: "smoke" or "full".
  std::string suite = "smoke";
  /// verify: include runtime_ms and the runtime-limit checks.
  bool with_timing = false;
  /// verify: mutation hook passed to the gaussian intensity.
  double perturbation = 0.0;
  /// verify: restrict to these criterion ids (empty: all).
  std::vector<std::string> only;
};

inline int exit_code_for(ErrorCode code) {
  return code == ErrorCode::Config ? kUsageError : kDomainError;
}

/// Runs `body`, mapping library errors onto the exit-code contract and
/// printing the message to `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const Json::exception& e) {
    err << "error: CONFIG: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
}

struct Resolved {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::string out;
  QuadOptions quad;
};

inline Resolved resolve(const CommandOptions& o) {
  if (o.config_path.empty()) fail(ErrorCode::Config, "--config is required");
  Resolved r;
  r.config = load_config(o.config_path);
  r.seed = o.seed.value_or(r.config.seed);
  r.out = o.out.value_or(r.config.output);
  r.quad = r.config.tolerance.quad();
  if (o.tol) {
    if (!(*o.tol > 0.0)) fail(ErrorCode::Config, "--tol must be positive");
    r.quad.rel_tol = *o.tol;
  }
  return r;
}

/// Writes `text` to `path`, or to `fallback` when no path is given.
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::Config, "cannot write output '" + path + "'");
  f << text;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// sample: one pattern (or an array of `replicates` patterns) as JSON.
inline int cmd_sample(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto r = resolve(o);
    if (!r.config.region) fail(ErrorCode::Config, "sample needs a region");
    const auto model = build_model(r.config.model);
    auto region = SamplingRegion::from_json(*r.config.region);
    SampleOptions so;
    so.measure.quad = r.quad;
    so.measure.singular_sets_carry_mass = r.config.singular_sets_carry_mass;
    so.allow_unobservable = r.config.allow_unobservable;
    PatternSampler sampler(model, region, so);
    std::string text;
    if (r.config.replicates == 1) {
      text = sampler.sample(r.seed).to_json().dump() + "\n";
    } else {
      Json all = Json::array();
      for (std::size_t i = 0; i < r.config.replicates; ++i) all.push_back(sampler.sample(stream_seed(r.seed, i)).to_json());
      text = all.dump() + "\n";
    }
    emit(r.out, text, out);
    return static_cast<int>(kOk);
  });
}

/// posterior: `draws` posterior draws per event of the pattern, as CSV.
inline int cmd_posterior(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto r = resolve(o);
    if (o.pattern_path.empty()) fail(ErrorCode::Config, "posterior needs --pattern");
    const auto model = build_model(r.config.model);
    const auto pattern = PointPattern::from_json(parse_json_file(o.pattern_path, "pattern"));
    const auto joint = joint_posterior(model, pattern);
    std::vector<std::vector<Point>> draws(joint.size());
    for (std::size_t e = 0; e < joint.size(); ++e)
      draws[e] = sample_posterior(joint.laws[e], r.config.draws, stream_seed(r.seed, e));
    std::vector<std::string> names;
    for (const auto& p : model.params) names.push_back(p.name);
    std::ostringstream csv;
    write_posterior_csv(csv, names, draws);
    emit(r.out, csv.str(), out);
    return static_cast<int>(kOk);
  });
}

/// extend: Gosset limits (gaussian) or Polya limits (bernoulli) as CSV.
inline int cmd_extend(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto r = resolve(o);
    const auto& e = r.config.extend;
    if (e.y.empty()) fail(ErrorCode::Config, "extend needs an initial sequence extend.y");
    std::ostringstream csv;
    if (r.config.model.id == "gaussian") {
      const gaussian::GaussianImproperModel g{e.y.size(), r.config.model.p};
      const auto rows = gaussian::gosset_limit(g, e.y, e.steps, e.paths, r.seed);
      csv << "path_index,ybar_final,s_final\n";
      for (std::size_t i = 0; i < rows.size(); ++i)
        csv << i << ',' << format_double(rows[i].ybar) << ',' << format_double(rows[i].s) << '\n';
    } else if (r.config.model.id == "bernoulli") {
      const bernoulli::BernoulliImproperModel b{e.y.size()};
      const auto limits = bernoulli::polya_limit(b, e.y, e.steps, e.paths, r.seed);
      csv << "path_index,limit\n";
      for (std::size_t i = 0; i < limits.size(); ++i) csv << i << ',' << format_double(limits[i]) << '\n';
    } else {
      fail(ErrorCode::Config, "extend supports the gaussian and bernoulli models");
    }
    emit(r.out, csv.str(), out);
    return static_cast<int>(kOk);
  });
}

/// paradox: the report comparing both methods and the z-marginal verdict.
inline int cmd_paradox(const CommandOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto r = resolve(o);
    if (r.config.model.id != "paradox") fail(ErrorCode::Config, "paradox needs model.id = \"paradox\"");
    const auto pm = paradox_model(r.config.model);
    const auto& c = r.config.paradox;
    const paradox::ReportOptions ro{c.x, c.y, c.a, c.b, c.grid_upper, c.grid_step};
    emit(r.out, paradox::paradox_report(pm, ro).dump() + "\n", out);
    return static_cast<int>(kOk);
  });
}

}  // namespace pprior::cli
