#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "pipeline.hpp"

using namespace linkvar;
using namespace linkvar::tools;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::NumericalFailure;
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "t.ini");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("linkvar_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_bin(const std::string& args) {
  const int status = std::system((std::string(LINKVAR_BIN) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Config, Defaults) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.grid.Nr, 96);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_FALSE(c.has_lambda_fraction());
}

TEST(Config, ValuesAndSeed) {
  const RunConfig c = parse_config("[run]\nseed = 7\n[grid]\nNr = 48\nNz = 40\n[problem]\nlambda_fraction = 0.5\n");
  EXPECT_EQ(c.grid.Nr, 48);
  EXPECT_EQ(c.grid.Nz, 40);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.geometry.seed, 7u);
  EXPECT_DOUBLE_EQ(c.lambda_fraction, 0.5);
}

TEST(Config, ErrorsNameLineAndField) {
  EXPECT_EQ(kind_of("[grid]\nNr = 96\nNz = ninety\n"), ErrorKind::ConfigError);
  const std::string m = message_of("[grid]\nNr = 96\nNz = ninety\n");
  EXPECT_NE(m.find("t.ini:3: grid.Nz"), std::string::npos) << m;
  const std::string unknown = message_of("[grid]\nNq = 3\n");
  EXPECT_NE(unknown.find("grid.Nq"), std::string::npos) << unknown;
  const std::string section = message_of("[gird]\nNr = 3\n");
  EXPECT_NE(section.find("gird"), std::string::npos) << section;
  EXPECT_EQ(kind_of("[grid\n"), ErrorKind::ConfigError);
}

TEST(Config, ExclusiveCouplingKeys) {
  const std::string m = message_of("[problem]\nlambda = 0.01\nlambda_fraction = 0.5\n");
  EXPECT_NE(m.find("lambda"), std::string::npos);
  EXPECT_EQ(kind_of("[problem]\nlambda_fraction = 1.5\n"), ErrorKind::ConfigError);
}

TEST(Config, BundledConfigsParse) {
  const RunConfig a = load_config(std::string(LINKVAR_CONFIG_DIR) + "/reference.ini");
  EXPECT_EQ(a.problem.N, 3);
  EXPECT_EQ(a.problem.K, 2);
  EXPECT_DOUBLE_EQ(a.problem.lambda, 0.0);
  const RunConfig b = load_config(std::string(LINKVAR_CONFIG_DIR) + "/reference-half.ini");
  EXPECT_DOUBLE_EQ(b.lambda_fraction, 0.5);
  EXPECT_NE(a.hash, b.hash);
}

TEST(Pipeline, ToyReport) {
  const fs::path out = scratch("toy");
  RunConfig c = parse_config("[toy]\nn_plus = 1\nn_minus = 1\n");
  const Outcome oc = run_subcommand("toy", c, out.string());
  EXPECT_EQ(oc.exit_code, kOk);
  EXPECT_EQ(oc.report["status"], "ok");
  EXPECT_TRUE(oc.report["toy"]["chain_ok"].get<bool>());
  std::ifstream is(out / "toy.json");
  const nlohmann::json back = nlohmann::json::parse(is);
  EXPECT_EQ(back["config_hash"], c.hash);
  EXPECT_EQ(back["toy"]["chain"].size(), 3u);
}

TEST(Pipeline, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::ConfigError), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::NotMaxwellCase), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::GeometryFailure), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::MaxIterExceeded), 3);
}

TEST(Pipeline, UnknownSubcommandIsAnError) {
  const fs::path out = scratch("unknown");
  const Outcome oc = run_subcommand("frobnicate", parse_config(""), out.string());
  EXPECT_EQ(oc.exit_code, 2);
  EXPECT_EQ(oc.report["status"], "error");
}

TEST(Binary, MalformedConfigExitsTwo) {
  const fs::path dir = scratch("bin_bad");
  std::ofstream(dir / "bad.ini") << "[grid]\nNr = 96\nNz = ninety\n";
  const std::string out = (dir / "out").string();
  EXPECT_EQ(run_bin("solve --config " + (dir / "bad.ini").string() + " --out " + out), 2);
  EXPECT_TRUE(fs::exists(fs::path(out) / "solve.json"));
  EXPECT_EQ(run_bin("--config " + (dir / "bad.ini").string()), 2);
}

TEST(Binary, OutEnvironmentOverride) {
  const fs::path dir = scratch("bin_env");
  std::ofstream(dir / "toy.ini") << "[toy]\nn_plus = 1\nn_minus = 1\n";
  const std::string env_out = (dir / "env").string();
  const std::string flag_out = (dir / "flag").string();
  EXPECT_EQ(run_bin("toy --quiet --config " + (dir / "toy.ini").string() + " --out " + flag_out), 0);
  EXPECT_TRUE(fs::exists(fs::path(flag_out) / "toy.json"));
  const int rc = std::system(("LINKVAR_OUT=" + env_out + " " + LINKVAR_BIN + " toy --quiet --config " +
                              (dir / "toy.ini").string() + " --out " + flag_out + "2 > /dev/null 2>&1")
                                 .c_str());
  EXPECT_EQ(WEXITSTATUS(rc), 0);
  EXPECT_TRUE(fs::exists(fs::path(env_out) / "toy.json"));
  EXPECT_FALSE(fs::exists(fs::path(flag_out + "2") / "toy.json"));
}
