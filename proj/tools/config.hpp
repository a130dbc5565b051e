#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "linkvar/geometry.hpp"
#include "linkvar/grid.hpp"
#include "linkvar/solver.hpp"
#include "linkvar/spectral.hpp"
#include "linkvar/toylink.hpp"

namespace linkvar::tools {

struct GridConfig {
  int Nr = 96;
  int Nz = 96;
  double Rmax = 6.0;
  double Zhalf = 4.0;
};

struct MaxwellConfig {
  double omega = 1.0;
  int lattice = 129;         // divergence check lattice
  int export_lattice = 33;   // lattice written to field3.csv
  int t_samples = 65;        // over one half period [0, pi/omega]
  std::string snapshot;      // reuse a solve snapshot instead of solving
};

/// Everything a run needs; see configs/README.md for the grammar.
struct RunConfig {
  ProblemSpec problem;
  double lambda_fraction = std::numeric_limits<double>::quiet_NaN();  // lambda = fraction * lambda_max
  GridConfig grid;
  EigenOptions eigen;
  GeometryOptions geometry;
  SolverOptions solver;
  MaxwellConfig maxwell;
  ToyProblem toy;
  ToyOptions toy_options;
  int hardy_samples = 200;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string out_dir = "out";
  std::string hash;  // FNV-1a of the config text

  bool has_lambda_fraction() const { return lambda_fraction == lambda_fraction; }
  /// Pushes the run seed into every stage.
  void apply_seed(std::uint64_t s);
};

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Parses INI text. Syntax errors carry the line number, value errors the
/// section.key name; both throw Error(ConfigError).
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::string& path);

void to_json(nlohmann::json& j, const RunConfig& c);

}  // namespace linkvar::tools
