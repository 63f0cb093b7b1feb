// The pprior binary: exit codes, output shapes, config handling.

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pprior/config.hpp"
#include "pprior/models/bernoulli.hpp"

namespace fs = std::filesystem;
using namespace pprior;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    static std::atomic<int> counter{0};
    dir_ = fs::temp_directory_path() /
           ("pprior-cli-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()) + "-" +
            std::to_string(counter++));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const Json& j) {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << j.dump(2);
    return p.string();
  }

  Outcome run(const std::string& args) {
    const auto out = dir_ / "stdout", err = dir_ / "stderr";
    const std::string cmd = std::string(PPRIOR_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path dir_;
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const Json kBernoulli = {{"model", {{"id", "bernoulli"}, {"n", 3}}},
                         {"region", bernoulli::binary_region(3).to_json()},
                         {"seed", 5},
                         {"draws", 4},
                         {"extend", {{"y", {1, 0, 0}}, {"paths", 10}, {"steps", 1000}}}};

}  // namespace

TEST(Config, RoundTripIsLossless) {
  auto c = config_from_json(kBernoulli);
  c.tolerance.rel = 1e-7;
  c.paradox.grid_step = 0.25;
  const auto path = fs::temp_directory_path() / "pprior-config-roundtrip.json";
  save_config(c, path.string());
  EXPECT_EQ(load_config(path.string()), c);
  fs::remove(path);
}

TEST(Config, UnknownKeysRejected) {
  Json j = kBernoulli;
  j["extend"]["stpes"] = 4;
  EXPECT_THROW(config_from_json(j), Error);
  EXPECT_THROW(config_from_json(Json::array()), Error);
}

TEST_F(Cli, ConfigErrorsExitThree) {
  Json bad = kBernoulli;
  bad["colour"] = "blue";
  EXPECT_EQ(run("sample --config " + write("bad.json", bad)).code, 3);
  EXPECT_EQ(run("sample --config " + (dir_ / "missing.json").string()).code, 3);
  EXPECT_EQ(run("sample").code, 3);
  EXPECT_EQ(run("frobnicate").code, 3);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, SampleWritesPattern) {
  const auto r = run("sample --config " + write("b.json", kBernoulli));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto p = PointPattern::from_json(Json::parse(r.out));
  for (const auto& e : p.events) EXPECT_TRUE(std::isfinite(bernoulli::bernoulli_intensity({3}, e)));
  EXPECT_EQ(r.out, run("sample --config " + write("b.json", kBernoulli)).out);
  EXPECT_NE(r.out, run("sample --seed 99 --config " + write("b.json", kBernoulli)).out);
}

TEST_F(Cli, SampleOnInfiniteRegionExitsTwo) {
  const Json g = {{"model", {{"id", "gaussian"}, {"n", 2}, {"p", 1.0}}},
                  {"region", SamplingRegion::unit_box(2).to_json()}};
  const auto r = run("sample --config " + write("g.json", g));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("NOT_OBSERVABLE_INFINITE"), std::string::npos) << r.err;
}

TEST_F(Cli, PosteriorCsvPerEvent) {
  const PointPattern pattern{{{1, 0, 0}, {0, 1, 1}, {1, 0, 0}}, bernoulli::binary_region(3), std::nullopt};
  const auto pat = write("pattern.json", pattern.to_json());
  const auto r = run("posterior --config " + write("b.json", kBernoulli) + " --pattern " + pat);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 1u + 3u * 4u);
  EXPECT_EQ(rows[0], "event_index,draw_index,theta");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string e, d, t;
    std::getline(in, e, ',');
    std::getline(in, d, ',');
    std::getline(in, t, ',');
    EXPECT_EQ(std::stoul(e), (i - 1) / 4);
    EXPECT_EQ(std::stoul(d), (i - 1) % 4);
    const double theta = std::stod(t);
    EXPECT_GT(theta, 0.0);
    EXPECT_LT(theta, 1.0);
  }
}

TEST_F(Cli, PosteriorOfEmptyPatternIsHeaderOnly) {
  const PointPattern pattern{{}, bernoulli::binary_region(3), std::nullopt};
  const auto r = run("posterior --config " + write("b.json", kBernoulli) + " --pattern " +
                     write("empty.json", pattern.to_json()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "event_index,draw_index,theta\n");
}

TEST_F(Cli, PosteriorOfConstantSequenceExitsTwo) {
  const PointPattern pattern{{{1, 0, 0}, {1, 1, 1}}, bernoulli::binary_region(3, "binary-cube"), std::nullopt};
  const auto r = run("posterior --config " + write("b.json", kBernoulli) + " --pattern " +
                     write("p.json", pattern.to_json()));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("event 1"), std::string::npos) << r.err;
  EXPECT_EQ(run("posterior --config " + write("b.json", kBernoulli)).code, 3);
}

TEST_F(Cli, ExtendBernoulliLimits) {
  const auto r = run("extend --config " + write("b.json", kBernoulli));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "path_index,limit");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i].substr(rows[i].find(',') + 1));
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST_F(Cli, ExtendGaussian) {
  Json g = {{"model", {{"id", "gaussian"}, {"n", 2}, {"p", 1.0}}},
            {"extend", {{"y", {0, 1}}, {"paths", 10}, {"steps", 200}}}};
  const auto r = run("extend --config " + write("g.json", g));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "path_index,ybar_final,s_final");
  g["extend"]["y"] = {1, 1};
  EXPECT_EQ(run("extend --config " + write("g2.json", g)).code, 2);
}

TEST_F(Cli, ExtendWritesOutFile) {
  const auto target = dir_ / "limits.csv";
  const auto r = run("extend --config " + write("b.json", kBernoulli) + " --out " + target.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(lines(slurp(target)).size(), 11u);
}

TEST_F(Cli, ParadoxVerdicts) {
  Json base = {{"model", {{"id", "paradox"}, {"theta_prior", {{"id", "flat"}}}, {"phi_prior", {{"id", "one"}}}}},
               {"paradox", {{"x", 1.0}, {"y", 2.0}, {"grid_upper", 400.0}, {"grid_step", 0.5}}}};
  auto r = run("paradox --config " + write("p.json", base));
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = Json::parse(r.out);
  EXPECT_EQ(j["method2"]["verdict"], "NON_NORMALIZABLE");
  EXPECT_EQ(j["z_marginal"]["verdict"], "NOT_OBSERVABLE_INFINITE");
  EXPECT_EQ(j["z"], 2.0);

  Json mult = base;
  mult["model"]["theta_prior"] = {{"id", "flat-truncated"}, {"params", {{"upper", 10.0}}}};
  mult["model"]["phi_prior"] = {{"id", "exp"}};
  r = run("paradox --config " + write("m.json", mult));
  ASSERT_EQ(r.code, 0) << r.err;
  j = Json::parse(r.out);
  EXPECT_EQ(j["method2"]["verdict"], "NORMALIZABLE");
  EXPECT_EQ(j["z_marginal"]["verdict"], "OBSERVABLE");
  EXPECT_GT(j["z_marginal"]["value"].template get<double>(), 0.0);

  Json wrong = base;
  wrong["model"]["theta_prior"] = {{"id", "lognormal"}};
  EXPECT_EQ(run("paradox --config " + write("w.json", wrong)).code, 3);
}

TEST_F(Cli, VerifySmokeSubset) {
  const auto r = run("verify --only AC2,AC6");
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> ids;
  for (const auto& l : lines(r.out)) {
    const auto j = Json::parse(l);
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_FALSE(j.contains("runtime_ms"));
    ids.push_back(j["check_id"]);
  }
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  EXPECT_FALSE(ids.empty());
}

TEST_F(Cli, VerifyTimingAddsRuntime) {
  const auto r = run("verify --only AC6 --with-timing");
  ASSERT_EQ(r.code, 0) << r.err;
  bool limit = false;
  for (const auto& l : lines(r.out)) {
    const auto j = Json::parse(l);
    EXPECT_TRUE(j.contains("runtime_ms"));
    limit = limit || j["check_id"] == "AC6.runtime";
  }
  EXPECT_TRUE(limit);
}

TEST_F(Cli, VerifyCatchesPerturbedIntensity) {
  const auto r = run("verify --only AC1 --perturb-intensity 0.01");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("AC1.gaussian"), std::string::npos) << r.err;
}

TEST_F(Cli, VerifyFullSuiteAggregatesSeeds) {
  // AC3 is stochastic and gets 100 seeds; AC6 is deterministic and runs once
  const auto r = run("verify --suite full --only AC3,AC6");
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t stochastic = 0;
  for (const auto& l : lines(r.out)) {
    const auto j = Json::parse(l);
    const std::string id = j["check_id"];
    if (id.rfind("AC3.", 0) == 0) {
      ++stochastic;
      EXPECT_EQ(j["direction"], "at_least") << l;
      // checks that ran in every seed need 95 of 100; pattern-dependent ones 95%
      const double runs = j["sample_sizes"][0].template get<double>();
      EXPECT_LE(runs, 100.0);
      EXPECT_DOUBLE_EQ(j["threshold"].template get<double>(), 0.95 * runs);
      if (id == "AC3.counts") EXPECT_EQ(runs, 100.0);
    } else {
      EXPECT_EQ(id.rfind("AC6.", 0), 0u) << l;
    }
  }
  EXPECT_GT(stochastic, 0u);
  EXPECT_EQ(run("verify --suite nightly").code, 3);
  EXPECT_EQ(run("verify --only AC99").code, 3);
}
