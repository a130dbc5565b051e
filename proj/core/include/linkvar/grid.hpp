#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include "linkvar/nonlinearity.hpp"

namespace linkvar {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Nodal values of a discrete function on a Grid (index i*Nz + j).
using StateVector = Vector;

enum class PotentialKind { Constant, PeriodicTable, Separable };

const char* to_string(PotentialKind kind) noexcept;
PotentialKind parse_potential_kind(const std::string& name);

/// V(r, z). The table and separable families are 1-periodic in z.
///
/// Separable form: V(r, z) = base + amp exp(-(r/width)^2) + z_amp cos(2 pi z).
struct PotentialSpec {
  PotentialKind kind = PotentialKind::Constant;
  double V0 = 0.0;

  std::vector<double> table_r;  // ascending
  std::vector<double> table_z;  // ascending, within [0, 1)
  std::vector<double> table_V;  // row-major, r-major: V[ir * nz + iz]
  std::string table_path;

  double base = 0.0;
  double amp = 0.0;
  double width = 1.0;
  double z_amp = 0.0;

  double operator()(double r, double z) const;
  bool z_periodic() const;
  void validate() const;
};

/// Reads a CSV with header "r,z,V" describing a full tensor table over one
/// z-period. Throws ConfigError with the offending line number.
PotentialSpec load_potential_table(const std::string& path);

struct ProblemSpec {
  int N = 3;
  int K = 2;
  double a = 1.0;
  PotentialSpec potential;
  double lambda = 0.0;
  NonlinearitySpec nonlinearity;

  /// Throws InvalidSpec on any violated precondition.
  void validate() const;
  bool is_maxwell_case() const { return N == 3 && K == 2 && a == 1.0; }
};

/// Surface measure of the unit sphere in R^K.
double angular_measure(int K);

/// Cell-centred tensor grid on [0, Rmax] x [-Zhalf, Zhalf].
struct Grid {
  int Nr = 0;
  int Nz = 0;
  int K = 2;
  double Rmax = 0.0;
  double Zhalf = 0.0;
  double dr = 0.0;
  double dz = 0.0;
  double omega = 0.0;  // angular measure
  std::vector<double> r;
  std::vector<double> z;
  std::vector<double> shell;  // (r_{i+1/2}^K - r_{i-1/2}^K)/K
  Vector w;

  std::size_t size() const { return static_cast<std::size_t>(Nr) * static_cast<std::size_t>(Nz); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(Nz) + static_cast<std::size_t>(j);
  }
  double volume() const;
};

Grid build_grid(const ProblemSpec& spec, int Nr, int Nz, double Rmax, double Zhalf);

double inner_L2w(const Grid& g, const Vector& u, const Vector& v);
double norm_Lk(const Grid& g, const Vector& u, double k);

/// The operator as a quadratic form: S is symmetric with u'Sv = <Au, v>_w,
/// so A = M^{-1} S with M = diag(w).
struct SymmetricOperator {
  SparseMatrix S;
  SparseMatrix gradient;  // the |grad u|^2 part of S alone
  Vector mass;
  Vector potential;       // a/r_i^2 + V(r_i, z_j)
  Vector inv_r2;          // 1/r_i^2 per node

  std::size_t size() const { return static_cast<std::size_t>(mass.size()); }
  Vector apply(const Vector& u) const;  // A u
  double form(const Vector& u, const Vector& v) const { return u.dot(S * v); }
};

SymmetricOperator assemble_operator(const ProblemSpec& spec, const Grid& g);

struct HardyReport {
  int K = 0;
  double constant = 0.0;
  double tolerance = 0.0;
  double worst_ratio = 0.0;
  int samples = 0;
  bool passed = false;
};

/// Samples smooth random functions and compares sum w u^2/r^2 to the gradient
/// form against (2/(K-2))^2 (1 + tol).
HardyReport hardy_check(const Grid& g, int K, int samples, std::uint64_t seed = 1,
                        double tol = 0.05);

struct BoundaryMassReport {
  double fraction = 0.0;
  double threshold = 1e-6;
  bool warn = false;
};

/// Fraction of sum w u^2 in the outer 10% shell of the truncated domain.
BoundaryMassReport boundary_mass(const Grid& g, const Vector& u, double shell = 0.1,
                                 double threshold = 1e-6);

void write_field_csv(std::ostream& os, const Grid& g, const Vector& u);
void write_field_csv(const std::string& path, const Grid& g, const Vector& u);

void to_json(nlohmann::json& j, const PotentialSpec& p);
void to_json(nlohmann::json& j, const ProblemSpec& s);
void to_json(nlohmann::json& j, const Grid& g);
void to_json(nlohmann::json& j, const HardyReport& h);
void to_json(nlohmann::json& j, const BoundaryMassReport& b);

}  // namespace linkvar
