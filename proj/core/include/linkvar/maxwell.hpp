#pragma once

#include <string>
#include <vector>

#include "linkvar/functional.hpp"

namespace linkvar {

/// Smooth interpolant of a grid field: a natural cubic spline of u/r in r^2
/// (so the quotient stays even across the axis), linear in z.
class FieldInterpolant {
 public:
  FieldInterpolant(const Grid& g, const Vector& u);

  /// u(r, z); zero outside the z range of the grid.
  double operator()(double r, double z) const;
  /// u(r, z) / r, finite at r = 0.
  double quotient(double r, double z) const;

 private:
  const Grid* g_;
  std::vector<Vector> value_;   // per z node: u/r at s_i = r_i^2
  std::vector<Vector> second_;  // per z node: spline second derivatives in s
  Vector s_;
  double spline(int j, double s) const;
};

struct LatticeSpec {
  int n = 129;          // nodes per axis
  double half_width = 0.0;  // x1, x2 in [-L, L]; 0 selects r_max/sqrt(2)
  double half_height = 0.0; // x3 in [-Z, Z]; 0 selects the grid's z range
};

/// Cartesian samples of E on an n^3 lattice; flat index (i*n + j)*n + k for
/// (x1_i, x2_j, x3_k).
struct VectorField3 {
  int n = 0;
  Vector x1, x2, x3;
  Vector E1, E2, E3;
  double omega = 1.0;

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  }
};

/// E(x) = (u/r)(-x2, x1, 0); requires the N = 3, K = 2, a = 1 case.
VectorField3 reconstruct_E(const ProblemSpec& spec, const Grid& g, const Vector& u,
                           const LatticeSpec& lattice = {}, double omega = 1.0);

/// max |div E| over interior nodes (central differences) / max |grad E|.
double divergence_residual(const VectorField3& E);

struct EnergyMatch {
  double E_value = 0.0;
  double J_value = 0.0;
  double gap = 0.0;        // |E - J| / max(|J|, 1e-300)
  double curl_term = 0.0;  // ½ ∫ |grad u|^2 + u^2/r^2
  double potential_term = 0.0;
  double nonlinear_term = 0.0;
};

/// Electromagnetic energy of the ansatz field, assembled on the (r, z) grid
/// with the reduced curl identity, against J(u).
EnergyMatch energy_match(const FunctionalContext& ctx, const Vector& u);

struct LSeries {
  std::vector<double> t;
  std::vector<double> L;
  double electric = 0.0;   // ∫ -V u^2 + f~(u) u
  double magnetic = 0.0;   // ∫ |grad u|^2 + u^2/r^2
  double variation = 0.0;  // magnetic - electric = J'(u)(u)
  double omega = 1.0;
  double max_deviation = 0.0;  // max_t |L(t) - L(0)|
};

/// L(t) = ½ [electric cos^2(omega t) + magnetic sin^2(omega t)].
LSeries em_energy_L(const FunctionalContext& ctx, const Vector& u, double omega,
                    const std::vector<double>& t_samples);

void write_field3_csv(const std::string& path, const VectorField3& E);
void write_L_csv(const std::string& path, const LSeries& L);

void to_json(nlohmann::json& j, const EnergyMatch& e);
void to_json(nlohmann::json& j, const LSeries& l);

}  // namespace linkvar
