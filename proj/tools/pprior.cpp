// pprior: sample | posterior | extend | paradox | verify

#include <iostream>

#include <CLI11.hpp>

#include "pprior/acceptance.hpp"
#include "pprior/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace pprior::cli;
  CLI::App app{"Improper priors as Poisson point processes"};
  app.require_subcommand(1);

  CommandOptions o;
  std::uint64_t seed = 0;
  std::string out;
  double tol = 0.0;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config_path, "experiment config (JSON)");
    if (needs_config) c->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out, "output file (default stdout)");
    sub->add_option("--tol", tol, "relative quadrature tolerance")->check(CLI::PositiveNumber);
  };

  auto* sample = app.add_subcommand("sample", "draw a point pattern");
  common(sample, true);
  auto* posterior = app.add_subcommand("posterior", "posterior draws for each event of a pattern");
  common(posterior, true);
  posterior->add_option("--pattern", o.pattern_path, "pattern JSON")->required();
  auto* extend = app.add_subcommand("extend", "Gosset or Polya extensions");
  common(extend, true);
  auto* para = app.add_subcommand("paradox", "marginalization paradox report");
  common(para, true);
  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  common(verify, false);
  verify->add_option("--suite", o.suite, "smoke or full")->check(CLI::IsMember({"smoke", "full"}));
  verify->add_flag("--with-timing", o.with_timing, "include runtimes and runtime limits");
  verify->add_option("--perturb-intensity", o.perturbation, "scale the gaussian closed form by 1 + eps");
  verify->add_option("--only", o.only, "criterion ids, e.g. AC2 AC6")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--out")) o.out = out;
    if (sub->count("--tol")) o.tol = tol;
  }
  if (*sample) return cmd_sample(o, std::cout, std::cerr);
  if (*posterior) return cmd_posterior(o, std::cout, std::cerr);
  if (*extend) return cmd_extend(o, std::cout, std::cerr);
  if (*para) return cmd_paradox(o, std::cout, std::cerr);
  return cmd_verify(o, std::cout, std::cerr);
}
