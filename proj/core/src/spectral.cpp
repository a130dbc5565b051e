#include "linkvar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "linkvar/error.hpp"

extern "C" void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a,
                        const int* lda, double* w, double* work, const int* lwork, int* iwork,
                        const int* liwork, int* info);

namespace linkvar {

namespace {

// Full symmetric eigendecomposition (divide and conquer); B is overwritten
// by the eigenvectors.
Eigen::VectorXd symmetric_eigen(Eigen::MatrixXd& B) {
  const int n = static_cast<int>(B.rows());
  Eigen::VectorXd w(n);
  int lwork = -1;
  int liwork = -1;
  int info = 0;
  double wq = 0.0;
  int iq = 0;
  dsyevd_("V", "L", &n, B.data(), &n, w.data(), &wq, &lwork, &iq, &liwork, &info);
  lwork = static_cast<int>(wq);
  liwork = iq;
  std::vector<double> work(static_cast<std::size_t>(lwork));
  std::vector<int> iwork(static_cast<std::size_t>(liwork));
  dsyevd_("V", "L", &n, B.data(), &n, w.data(), work.data(), &lwork, iwork.data(), &liwork, &info);
  if (info != 0) throw linkvar::Error(linkvar::ErrorKind::NumericalFailure, "dense eigensolver failed");
  return w;
}

using LDLT = Eigen::SimplicialLDLT<SparseMatrix>;
using LLT = Eigen::SimplicialLLT<SparseMatrix>;

SparseMatrix shifted(const SymmetricOperator& op, double theta) {
  SparseMatrix m = op.S;
  for (Eigen::Index p = 0; p < m.rows(); ++p) m.coeffRef(p, p) -= theta * op.mass[p];
  return m;
}

int negative_pivots(const LDLT& f) {
  const Vector d = f.vectorD();
  int n = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) n += d[i] < 0.0 ? 1 : 0;
  return n;
}

double m_norm(const Vector& x, const Vector& mass) {
  return std::sqrt((mass.array() * x.array().square()).sum());
}

// Largest eigenvalue of M^-1 S by a short Lanczos run in the M-inner product.
double largest_eigenvalue(const SymmetricOperator& op, int steps, std::uint64_t seed) {
  const Eigen::Index n = op.mass.size();
  steps = static_cast<int>(std::min<Eigen::Index>(steps, n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix Q(n, steps);
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = gauss(rng);
  q /= m_norm(q, op.mass);
  Vector alpha(steps), beta(steps);
  int m = 0;
  for (int j = 0; j < steps; ++j) {
    Q.col(j) = q;
    Vector z = op.apply(q);
    alpha[j] = q.dot(op.mass.asDiagonal() * z);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector h = Q.leftCols(j + 1).transpose() * (op.mass.asDiagonal() * z);
      z -= Q.leftCols(j + 1) * h;
    }
    m = j + 1;
    beta[j] = m_norm(z, op.mass);
    if (beta[j] < 1e-14 * std::abs(alpha[j]) + 1e-300) break;
    q = z / beta[j];
  }
  Matrix T = Matrix::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(T, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct Ritz {
  Vector values;
  Matrix vectors;
};

// Rayleigh-Ritz for the pencil (S, M) on span(X).
Ritz rayleigh_ritz(const SymmetricOperator& op, Matrix X) {
  for (Eigen::Index c = 0; c < X.cols(); ++c) X.col(c) /= m_norm(X.col(c), op.mass);
  const Matrix MX = op.mass.asDiagonal() * X;
  const Matrix SX = op.S * X;
  Matrix H = X.transpose() * SX;
  Matrix B = X.transpose() * MX;
  H = 0.5 * (H + H.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(H, B);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "Rayleigh-Ritz projection failed");
  }
  return {es.eigenvalues(), X * es.eigenvectors()};
}

// Shift-invert Lanczos with full reorthogonalisation: returns the p lowest
// Ritz pairs of (S, M).
Ritz lanczos_lowest(const SymmetricOperator& op, const LLT& shift_factor, double sigma, int p,
                    std::uint64_t seed) {
  const Eigen::Index n = op.mass.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(n, 3 * p + 60));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix Q(n, m_max);
  Vector q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = gauss(rng);
  q /= m_norm(q, op.mass);
  std::vector<double> alpha, beta;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  int m = 0;
  for (int j = 0; j < m_max; ++j) {
    Q.col(j) = q;
    Vector z = shift_factor.solve(op.mass.asDiagonal() * q);
    const Vector Mz0 = op.mass.asDiagonal() * z;
    alpha.push_back(q.dot(Mz0));
    for (int pass = 0; pass < 2; ++pass) {
      const Vector h = Q.leftCols(j + 1).transpose() * (op.mass.asDiagonal() * z);
      z -= Q.leftCols(j + 1) * h;
    }
    m = j + 1;
    const double b = m_norm(z, op.mass);
    beta.push_back(b);
    const bool check = m >= p && (m - p) % 10 == 0;
    if (check || m == m_max || b < 1e-14 * std::abs(alpha.back())) {
      Matrix T = Matrix::Zero(m, m);
      for (int k = 0; k < m; ++k) {
        T(k, k) = alpha[static_cast<std::size_t>(k)];
        if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[static_cast<std::size_t>(k)];
      }
      es.compute(T);
      bool converged = m >= p;
      for (int k = 0; converged && k < p; ++k) {
        const Eigen::Index idx = m - 1 - k;  // largest theta first
        const double theta = es.eigenvalues()[idx];
        const double bound = std::abs(b * es.eigenvectors()(m - 1, idx));
        if (bound > 1e-10 * std::abs(theta)) converged = false;
      }
      if (converged || b < 1e-14 * std::abs(alpha.back())) break;
    }
    if (m == m_max) break;
    q = z / b;
  }
  const int keep = std::min(p, m);
  Matrix Y(n, keep);
  Vector values(keep);
  for (int k = 0; k < keep; ++k) {
    const Eigen::Index idx = m - 1 - k;
    Y.col(k) = Q.leftCols(m) * es.eigenvectors().col(idx);
    values[k] = sigma + 1.0 / es.eigenvalues()[idx];
  }
  return {values, Y};
}

double pair_residual(const SymmetricOperator& op, const Vector& v, double lambda) {
  const Vector r = op.S * v - lambda * (op.mass.asDiagonal() * v);
  return std::sqrt((r.array().square() / op.mass.array()).sum());
}

}  // namespace

int count_below(const SymmetricOperator& op, double theta) {
  LDLT f(shifted(op, theta));
  if (f.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "LDLT factorisation failed while counting eigenvalues");
  }
  return negative_pivots(f);
}

SpectralSplit eigendecompose(const SymmetricOperator& op, const Grid& g, const EigenOptions& opts) {
  if (g.size() != op.size()) throw Error(ErrorKind::ShapeMismatch, "operator does not match grid");
  return eigendecompose(op, opts);
}

SpectralSplit eigendecompose(const SymmetricOperator& op, const EigenOptions& opts) {
  SpectralSplit s;
  const Eigen::Index n = static_cast<Eigen::Index>(op.size());
  s.mass_ = op.mass;
  s.op_ = std::make_shared<SymmetricOperator>(op);
  auto factor = std::make_shared<LDLT>(op.S);
  if (factor->info() != Eigen::Success) {
    throw Error(ErrorKind::SpectralGapViolation, "operator is singular (LDLT pivot breakdown)");
  }
  s.S_factor_ = factor;
  const int inertia_minus = negative_pivots(*factor);

  if (static_cast<std::size_t>(n) <= opts.dense_limit) {
    const Vector d = op.mass.cwiseSqrt().cwiseInverse();
    Matrix B = d.asDiagonal() * Matrix(op.S) * d.asDiagonal();
    B = 0.5 * (B + B.transpose()).eval();
    s.eigvals_ = symmetric_eigen(B);
    s.eigvecs_ = d.asDiagonal() * B;
    s.complete_ = true;
    s.max_abs_ = s.eigvals_.cwiseAbs().maxCoeff();
    s.n_minus_ = static_cast<int>((s.eigvals_.array() < 0.0).count());
  } else {
    if (inertia_minus == 0) {
      throw Error(ErrorKind::NoNegativeSpectrum, "the operator has no negative eigenvalues");
    }
    const int nev = static_cast<int>(std::min<Eigen::Index>(inertia_minus + opts.extra_positive, n - 1));
    const int p = static_cast<int>(std::min<Eigen::Index>(nev + opts.guard, n));
    const double lower = op.potential.minCoeff();
    const double sigma = lower - 1.0 - 0.01 * std::abs(lower);
    LLT shift_factor(shifted(op, sigma));
    if (shift_factor.info() != Eigen::Success) {
      throw Error(ErrorKind::NumericalFailure, "shifted operator is not positive definite");
    }
    Ritz ritz = lanczos_lowest(op, shift_factor, sigma, p, opts.seed);
    bool ok = false;
    for (int step = 0; step < opts.max_polish_steps; ++step) {
      Matrix X(n, ritz.vectors.cols());
      for (Eigen::Index c = 0; c < X.cols(); ++c) {
        X.col(c) = shift_factor.solve(op.mass.asDiagonal() * ritz.vectors.col(c));
      }
      ritz = rayleigh_ritz(op, X);
      if (step + 1 < opts.polish_steps || ritz.values.size() <= nev) continue;
      const double theta = 0.5 * (ritz.values[nev - 1] + ritz.values[nev]);
      double worst = 0.0;
      for (int k = 0; k < nev; ++k) {
        worst = std::max(worst, pair_residual(op, ritz.vectors.col(k), ritz.values[k]));
      }
      const double scale = std::max(1.0, ritz.values.head(nev).cwiseAbs().maxCoeff());
      if (worst <= 1e-11 * scale && count_below(op, theta) == nev) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw Error(ErrorKind::NumericalFailure,
                  "partial eigensolver did not resolve the lowest " + std::to_string(nev) + " pairs");
    }
    s.eigvals_ = ritz.values.head(nev);
    s.eigvecs_ = ritz.vectors.leftCols(nev);
    s.complete_ = false;
    s.n_minus_ = static_cast<int>((s.eigvals_.array() < 0.0).count());
    if (s.n_minus_ != inertia_minus) {
      throw Error(ErrorKind::UnresolvedComponent,
                  "resolved negative pairs do not match the operator inertia");
    }
    s.max_abs_ = std::max(largest_eigenvalue(op, 80, opts.seed + 1), s.eigvals_.cwiseAbs().maxCoeff());
  }

  s.max_residual_ = 0.0;
  const int checked = std::min<int>(static_cast<int>(s.eigvals_.size()), s.n_minus_ + opts.extra_positive);
  for (int k = 0; k < checked; ++k) {
    s.max_residual_ = std::max(s.max_residual_, pair_residual(op, s.eigvecs_.col(k), s.eigvals_[k]));
  }
  s.gap_tol_ = opts.gap_rel * s.max_abs_;
  const double min_abs = s.eigvals_.cwiseAbs().minCoeff();
  if (min_abs < s.gap_tol_) {
    throw Error(ErrorKind::SpectralGapViolation,
                "eigenvalue of magnitude " + std::to_string(min_abs) + " inside the gap tolerance");
  }
  if (s.n_minus_ == 0) throw Error(ErrorKind::NoNegativeSpectrum, "the operator has no negative eigenvalues");
  s.mu0_ = std::sqrt(min_abs);
  return s;
}

Vector SpectralSplit::coefficients(const Vector& u) const {
  return eigvecs_.transpose() * mass_.cwiseProduct(u);
}

Vector SpectralSplit::minus_coefficients(const Vector& u) const {
  return eigvecs_.leftCols(n_minus_).transpose() * mass_.cwiseProduct(u);
}

Vector SpectralSplit::project_minus(const Vector& u) const {
  return eigvecs_.leftCols(n_minus_) * minus_coefficients(u);
}

Vector SpectralSplit::project_plus(const Vector& u) const { return u - project_minus(u); }

double SpectralSplit::norm_plus_sq(const Vector& u) const {
  const Vector up = project_plus(u);
  return up.dot(op_->S * up);
}

double SpectralSplit::norm_minus_sq(const Vector& u) const {
  const Vector c = minus_coefficients(u);
  return (eigvals_.head(n_minus_).cwiseAbs().array() * c.array().square()).sum();
}

double SpectralSplit::norm_plus(const Vector& u) const { return std::sqrt(std::max(0.0, norm_plus_sq(u))); }
double SpectralSplit::norm_minus(const Vector& u) const { return std::sqrt(norm_minus_sq(u)); }

double SpectralSplit::energy_norm(const Vector& u) const {
  return std::sqrt(std::max(0.0, norm_plus_sq(u)) + norm_minus_sq(u));
}

double SpectralSplit::x_inner(const Vector& u, const Vector& v) const {
  const Vector cu = minus_coefficients(u);
  const Vector cv = minus_coefficients(v);
  const Vector up = u - eigvecs_.leftCols(n_minus_) * cu;
  const Vector vp = v - eigvecs_.leftCols(n_minus_) * cv;
  return up.dot(op_->S * vp) +
         (eigvals_.head(n_minus_).cwiseAbs().array() * cu.array() * cv.array()).sum();
}

Vector SpectralSplit::e(int k) const {
  if (k < 0 || k >= n_minus_) throw Error(ErrorKind::ShapeMismatch, "X- basis index out of range");
  return eigvecs_.col(k) / std::sqrt(std::abs(eigvals_[k]));
}

Vector SpectralSplit::tau_coefficients(const Vector& u) const {
  const Vector c = minus_coefficients(u);
  return eigvals_.head(n_minus_).cwiseAbs().cwiseSqrt().cwiseProduct(c);
}

double SpectralSplit::tau_norm(const Vector& u) const {
  const Vector t = tau_coefficients(u);
  double sum = 0.0;
  double weight = 0.25;
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    sum += weight * std::abs(t[k]);
    weight *= 0.5;
  }
  return std::max(norm_plus(u), sum);
}

Vector SpectralSplit::solve_S(const Vector& b) const {
  Vector x = S_factor_->solve(b);
  for (int it = 0; it < 2; ++it) {
    const Vector r = b - op_->S * x;
    x += S_factor_->solve(r);
  }
  return x;
}

Vector SpectralSplit::riesz(const Vector& r) const {
  const Vector c = minus_coefficients(r);
  const Vector rp = r - eigvecs_.leftCols(n_minus_) * c;
  const Vector gp = project_plus(solve_S(mass_.cwiseProduct(rp)));
  const Vector cm = c.cwiseQuotient(eigvals_.head(n_minus_).cwiseAbs());
  return gp + eigvecs_.leftCols(n_minus_) * cm;
}

KappaEstimate kappa_estimate(const SpectralSplit& split, const Grid& g, double q, int n_samples,
                             std::uint64_t seed) {
  KappaEstimate out;
  out.samples = n_samples;
  const Matrix& V = split.eigvecs();
  const Eigen::Index m = V.cols();
  const int nm = split.n_minus();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto ratio = [&](const Vector& c) {
    const Vector um = V.leftCols(nm) * c.head(nm);
    const Vector up = V.rightCols(m - nm) * c.tail(m - nm);
    const Vector u = um + up;
    const double base = norm_Lk(g, u, q);
    if (base == 0.0) return 0.0;
    return std::max(norm_Lk(g, up, q), norm_Lk(g, um, q)) / base;
  };
  Vector best_c = Vector::Zero(m);
  double best = 0.0;
  const int batch = 64;
  for (int start = 0; start < n_samples; start += batch) {
    const int nb = std::min(batch, n_samples - start);
    Matrix C(m, nb);
    for (int b = 0; b < nb; ++b) {
      for (Eigen::Index i = 0; i < m; ++i) C(i, b) = gauss(rng);
    }
    const Matrix Um = V.leftCols(nm) * C.topRows(nm);
    const Matrix Up = V.rightCols(m - nm) * C.bottomRows(m - nm);
    for (int b = 0; b < nb; ++b) {
      const Vector um = Um.col(b);
      const Vector up = Up.col(b);
      const double base = norm_Lk(g, um + up, q);
      const double r = std::max(norm_Lk(g, up, q), norm_Lk(g, um, q)) / base;
      if (r > best) {
        best = r;
        best_c = C.col(b);
      }
    }
  }
  out.raw = best;
  double step = 0.5;
  std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
  Vector c = best_c / best_c.norm();
  double current = best;
  for (int s = 0; s < out.ascent_steps; ++s) {
    const Eigen::Index k = pick(rng);
    bool improved = false;
    for (double dir : {1.0, -1.0}) {
      Vector trial = c;
      trial[k] += dir * step;
      trial /= trial.norm();
      const double r = ratio(trial);
      if (r > current) {
        current = r;
        c = trial;
        improved = true;
        break;
      }
    }
    if (!improved) step *= 0.7;
  }
  out.refined = current;
  out.kappa = std::max(current, 1.0) * out.safety;
  return out;
}

void write_spectrum_csv(std::ostream& os, const SpectralSplit& split) {
  os << "index,eigenvalue\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < split.eigvals().size(); ++k) os << k << ',' << split.eigvals()[k] << '\n';
}

void write_spectrum_csv(const std::string& path, const SpectralSplit& split) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  write_spectrum_csv(os, split);
}

void to_json(nlohmann::json& j, const SpectralSplit& s) {
  const int shown = std::min<int>(s.n_resolved(), s.n_minus() + 8);
  std::vector<double> low(s.eigvals().data(), s.eigvals().data() + shown);
  j = {{"n_minus", s.n_minus()},
       {"n_resolved", s.n_resolved()},
       {"dimension", s.dim()},
       {"complete", s.complete()},
       {"mu0", s.mu0()},
       {"gap_tol", s.gap_tol()},
       {"max_abs_eigenvalue", s.max_abs_eigenvalue()},
       {"max_pair_residual", s.max_residual()},
       {"lowest_eigenvalues", low},
       {"e_k_order", "descending |lambda| among negative modes"}};
}

void to_json(nlohmann::json& j, const KappaEstimate& k) {
  j = {{"kappa", k.kappa}, {"raw_sample_max", k.raw}, {"after_ascent", k.refined},
       {"safety_factor", k.safety}, {"samples", k.samples}, {"ascent_steps", k.ascent_steps},
       {"certified", false}};
}

}  // namespace linkvar
