#pragma once

// Experiment configuration for the command-line tools. Stored as JSON; every
// field is written back out, so a load/save cycle is lossless.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pprior/error.hpp"
#include "pprior/measure.hpp"
#include "pprior/models/bernoulli.hpp"
#include "pprior/models/cauchy.hpp"
#include "pprior/models/gaussian.hpp"
#include "pprior/models/paradox.hpp"

namespace pprior {

struct ModelConfig {
  std::string id = "gaussian";
  std::size_t n = 2;
  double p = 1.0;
  Json theta_prior = {{"id", "flat"}};
  Json phi_prior = {{"id", "one"}};

  bool operator==(const ModelConfig&) const = default;
};

struct ExtendConfig {
  std::vector<double> y;
  std::size_t paths = 10;
  std::size_t steps = 10'000;

  bool operator==(const ExtendConfig&) const = default;
};

struct ParadoxConfig {
  double x = 1.0, y = 1.0;
  double a = 0.5, b = 2.0;
  double grid_upper = 4000.0;
  double grid_step = 0.1;

  bool operator==(const ParadoxConfig&) const = default;
};

struct ToleranceConfig {
  double abs = 1e-6;
  double rel = 1e-4;
  std::size_t max_evals = 10'000'000;

  bool operator==(const ToleranceConfig&) const = default;
  QuadOptions quad() const { return {abs, rel, max_evals}; }
};

struct ExperimentConfig {
  ModelConfig model;
  std::optional<Json> region;
  std::uint64_t seed = 0;
  std::size_t replicates = 1;
  std::size_t draws = 100;
  ExtendConfig extend;
  ParadoxConfig paradox;
  std::string output;
  ToleranceConfig tolerance;
  bool allow_unobservable = false;
  bool singular_sets_carry_mass = false;

  bool operator==(const ExperimentConfig&) const = default;
};

inline Json to_json(const ExperimentConfig& c) {
  return {{"model",
           {{"id", c.model.id},
            {"n", c.model.n},
            {"p", c.model.p},
            {"theta_prior", c.model.theta_prior},
            {"phi_prior", c.model.phi_prior}}},
          {"region", c.region ? *c.region : Json(nullptr)},
          {"seed", c.seed},
          {"replicates", c.replicates},
          {"draws", c.draws},
          {"extend", {{"y", c.extend.y}, {"paths", c.extend.paths}, {"steps", c.extend.steps}}},
          {"paradox",
           {{"x", c.paradox.x},
            {"y", c.paradox.y},
            {"a", c.paradox.a},
            {"b", c.paradox.b},
            {"grid_upper", c.paradox.grid_upper},
            {"grid_step", c.paradox.grid_step}}},
          {"output", c.output},
          {"tolerance", {{"abs", c.tolerance.abs}, {"rel", c.tolerance.rel}, {"max_evals", c.tolerance.max_evals}}},
          {"allow_unobservable", c.allow_unobservable},
          {"singular_sets_carry_mass", c.singular_sets_carry_mass}};
}

namespace detail {

inline void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(ErrorCode::Config, "unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const Json& j, const char* key, T& into) {
  if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

}  // namespace detail

/// Missing keys keep their defaults; unknown keys are an error.
inline ExperimentConfig config_from_json(const Json& j) {
  try {
    if (!j.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
    detail::reject_unknown(j,
                           {"model", "region", "seed", "replicates", "draws", "extend", "paradox", "output",
                            "tolerance", "allow_unobservable", "singular_sets_carry_mass"},
                           "config");
    ExperimentConfig c;
    if (j.contains("model")) {
      const auto& m = j.at("model");
      detail::reject_unknown(m, {"id", "n", "p", "theta_prior", "phi_prior"}, "model");
      detail::read(m, "id", c.model.id);
      detail::read(m, "n", c.model.n);
      detail::read(m, "p", c.model.p);
      detail::read(m, "theta_prior", c.model.theta_prior);
      detail::read(m, "phi_prior", c.model.phi_prior);
    }
    if (j.contains("region") && !j.at("region").is_null()) c.region = j.at("region");
    detail::read(j, "seed", c.seed);
    detail::read(j, "replicates", c.replicates);
    detail::read(j, "draws", c.draws);
    if (j.contains("extend")) {
      const auto& e = j.at("extend");
      detail::reject_unknown(e, {"y", "paths", "steps"}, "extend");
      detail::read(e, "y", c.extend.y);
      detail::read(e, "paths", c.extend.paths);
      detail::read(e, "steps", c.extend.steps);
    }
    if (j.contains("paradox")) {
      const auto& p = j.at("paradox");
      detail::reject_unknown(p, {"x", "y", "a", "b", "grid_upper", "grid_step"}, "paradox");
      detail::read(p, "x", c.paradox.x);
      detail::read(p, "y", c.paradox.y);
      detail::read(p, "a", c.paradox.a);
      detail::read(p, "b", c.paradox.b);
      detail::read(p, "grid_upper", c.paradox.grid_upper);
      detail::read(p, "grid_step", c.paradox.grid_step);
    }
    detail::read(j, "output", c.output);
    if (j.contains("tolerance")) {
      const auto& t = j.at("tolerance");
      detail::reject_unknown(t, {"abs", "rel", "max_evals"}, "tolerance");
      detail::read(t, "abs", c.tolerance.abs);
      detail::read(t, "rel", c.tolerance.rel);
      detail::read(t, "max_evals", c.tolerance.max_evals);
    }
    detail::read(j, "allow_unobservable", c.allow_unobservable);
    detail::read(j, "singular_sets_carry_mass", c.singular_sets_carry_mass);
    return c;
  } catch (const Json::exception& e) {
    fail(ErrorCode::Config, std::string("config: ") + e.what());
  }
}

inline Json parse_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Config, "cannot open " + what + " '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    fail(ErrorCode::Config, what + " '" + path + "' is not valid JSON: " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) { return config_from_json(parse_json_file(path, "config")); }

inline void save_config(const ExperimentConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Config, "cannot write config '" + path + "'");
  out << to_json(c).dump(2) << '\n';
}

inline paradox::ParadoxModel paradox_model(const ModelConfig& m) {
  auto prior = [](const Json& j) {
    return std::pair{j.value("id", std::string()), j.value("params", Json::object())};
  };
  const auto [tid, tparams] = prior(m.theta_prior);
  const auto [pid, pparams] = prior(m.phi_prior);
  return paradox::make_paradox(tid, pid, tparams, pparams);
}

/// Builds the IntensityModel named by the config.
inline IntensityModel build_model(const ModelConfig& m) {
  if (m.id == "gaussian") return gaussian::make_model({m.n, m.p});
  if (m.id == "cauchy") return cauchy::make_model({m.n, m.p});
  if (m.id == "bernoulli") return bernoulli::make_model({m.n});
  if (m.id == "paradox") return paradox::make_model(paradox_model(m));
  fail(ErrorCode::Config, "unknown model id '" + m.id + "'");
}

}  // namespace pprior
