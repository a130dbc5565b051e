#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace linkvar {

enum class FFamily { Power, LogArctan };
enum class GFamily { Power, ExpDamped, ArctanDamped, Zero };

const char* to_string(FFamily family) noexcept;
const char* to_string(GFamily family) noexcept;
FFamily parse_f_family(const std::string& name);
GFamily parse_g_family(const std::string& name);

/// Declares the scalar pair (f, g).
///
/// `p` and `q` are the upper and lower growth exponents, `rho` the switch
/// radius of the log-arctan family (it also bounds the tail region used for
/// the two-sided power bound on f).
struct NonlinearitySpec {
  FFamily f_family = FFamily::Power;
  GFamily g_family = GFamily::Power;
  double p = 4.0;
  double q = 3.0;
  double rho = 1.0;

  /// Throws InvalidSpec unless 2 < q < p < 2N/(N-2) and rho > 0.
  void validate(int ambient_dim) const;
};

/// Magnitude range on which every sampled bound is certified.
struct CertificationRange {
  double u_min = 1e-8;
  double u_max = 1e4;
  int samples_per_sign = 4096;

  std::vector<double> magnitudes() const;  // log-spaced, ascending
};

/// Primitive of an odd scalar function on [0, u_max], stored at log-spaced
/// nodes and evaluated by cubic Hermite interpolation with exact slopes.
class PrimitiveTable {
 public:
  using Integrand = std::function<double(double)>;

  PrimitiveTable() = default;
  PrimitiveTable(Integrand f, double u_max, int nodes, std::vector<double> breakpoints);

  /// Value of \int_0^{|u|} f, for any u (beyond the table the tail is
  /// integrated on demand).
  double operator()(double u) const;
  bool empty() const { return x_.empty(); }

 private:
  Integrand f_;
  std::vector<double> x_, value_, slope_;
};

/// Adaptive Simpson quadrature; converges when the Richardson estimate is
/// below max(abs_tol, rel_tol * |integral|).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, double rel_tol);

/// Evaluates f, g, their primitives and derivatives for a validated spec.
/// Immutable after construction; copies share the primitive tables.
class Nonlinearity {
 public:
  explicit Nonlinearity(const NonlinearitySpec& spec);

  const NonlinearitySpec& spec() const { return spec_; }
  double p() const { return spec_.p; }
  double q() const { return spec_.q; }
  double rho() const { return spec_.rho; }

  /// Continuity constant of the log-arctan branch switch (1 for other
  /// families, where it is unused).
  double matching_constant() const { return matching_c_; }

  double f(double u) const;
  double F(double u) const;
  double g(double u) const;
  double G(double u) const;
  double df(double u) const;
  double dg(double u) const;

  /// Φ(u) = ½ f(u)u − F(u) + λG(u) − (λ/2) g(u)u.
  double Phi(double lambda, double u) const;

  bool g_is_zero() const { return spec_.g_family == GFamily::Zero; }

  /// Bulk forms over n nodes: sum w (F - lambda G), f - lambda g and its
  /// derivative. Integer power pairs take a multiplication-only path.
  double weighted_primitive_sum(const double* u, const double* w, std::size_t n, double lambda) const;
  void combined(const double* u, double* out, std::size_t n, double lambda) const;
  void combined_derivative(const double* u, double* out, std::size_t n, double lambda) const;

 private:
  NonlinearitySpec spec_;
  double matching_c_ = 1.0;
  int int_p_ = 0;  // p when f and g are integer power laws, else 0
  int int_q_ = 0;
  std::shared_ptr<const PrimitiveTable> F_table_, G_table_;
};

/// Constants entering the growth, coercivity and boundedness estimates.
struct NonlinearityConstants {
  double eps = 0.0;
  double C_f_growth = 0.0;
  double C_g_growth = 0.0;  // already raised to at least C_F_lower
  double C_g_growth_raw = 0.0;
  double C_F_lower = 0.0;
  double g_over_f_at_rho = 0.0;
  double f_tail_lower = 0.0;  // min |f(u)|/|u|^{p-1} over |u| >= rho
  double f_tail_upper = 0.0;  // max of the same ratio
  CertificationRange range;
};

/// Smallest C with |f(u)| <= eps|u| + C|u|^{p-1} on the certification range.
double growth_constant_f(const Nonlinearity& nl, double eps,
                         const CertificationRange& range = {});
/// Same with g and exponent q.
double growth_constant_g(const Nonlinearity& nl, double eps,
                         const CertificationRange& range = {});
/// Largest C with F(u) >= C|u|^q − eps u² (minimum of (F + eps u²)/|u|^q).
double lower_constant_F(const Nonlinearity& nl, double eps,
                        const CertificationRange& range = {});

/// min and max of |f(u)|/|u|^{p-1} for rho <= |u| <= u_max.
std::pair<double, double> tail_power_constants(const Nonlinearity& nl,
                                               const CertificationRange& range = {});

NonlinearityConstants compute_constants(const Nonlinearity& nl, double eps,
                                        const CertificationRange& range = {});

/// sup_{0<|t|<=rho} |Φ(t)|/t², by a dense scan refined near the argmax.
double phi_quadratic_sup(const Nonlinearity& nl, double lambda, double rho,
                         int samples = 2048);

struct AxiomCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;  // the quantity that decided the check
  std::string detail;
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;
  CertificationRange range;
  double f_tail_lower = 0.0;
  double f_tail_upper = 0.0;
  double lambda = 0.0;

  bool all_passed() const;
  const AxiomCheck* find(const std::string& name) const;
};

/// Samples every structural hypothesis on f and g and reports per-axiom
/// outcomes. Never throws on a failed axiom.
AxiomReport verify_axioms(const Nonlinearity& nl, double lambda, int ambient_dim = 3,
                          const CertificationRange& range = {});

void to_json(nlohmann::json& j, const NonlinearitySpec& s);
void to_json(nlohmann::json& j, const CertificationRange& r);
void to_json(nlohmann::json& j, const NonlinearityConstants& c);
void to_json(nlohmann::json& j, const AxiomCheck& c);
void to_json(nlohmann::json& j, const AxiomReport& r);

}  // namespace linkvar
