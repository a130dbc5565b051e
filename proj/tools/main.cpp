#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "pipeline.hpp"

int main(int argc, char** argv) {
  using namespace linkvar::tools;

  CLI::App app{"linkvar: linking-based solver for strongly indefinite cylindrical problems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int threads = -1;
  bool quiet = false;
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--out", out_dir, "output directory (LINKVAR_OUT overrides)");
  app.add_option("--seed", seed, "RNG seed (overrides run.seed)")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", quiet, "suppress progress output");

  std::string chosen;
  for (const auto& name : subcommands()) app.add_subcommand(name)->callback([&chosen, name] { chosen = name; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const linkvar::Error& e) {
    std::cerr << "linkvar: " << e.what() << '\n';
    std::string dir = out_dir.empty() ? RunConfig{}.out_dir : out_dir;
    if (const char* env = std::getenv("LINKVAR_OUT"); env && *env) dir = env;
    write_error_report(dir, chosen, e);
    return kValidation;
  }

  if (seed >= 0) cfg.apply_seed(static_cast<std::uint64_t>(seed));
  if (threads >= 0) cfg.threads = threads;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (const char* env = std::getenv("LINKVAR_OUT"); env && *env) cfg.out_dir = env;

  const Outcome oc = run_subcommand(chosen, cfg, cfg.out_dir, quiet ? nullptr : &std::cout);
  return oc.exit_code;
}
