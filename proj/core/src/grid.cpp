#include "linkvar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "linkvar/error.hpp"

namespace linkvar {

const char* to_string(PotentialKind kind) noexcept {
  switch (kind) {
    case PotentialKind::Constant: return "constant";
    case PotentialKind::PeriodicTable: return "periodic-table";
    case PotentialKind::Separable: return "separable";
  }
  return "?";
}

PotentialKind parse_potential_kind(const std::string& name) {
  if (name == "constant") return PotentialKind::Constant;
  if (name == "periodic-table") return PotentialKind::PeriodicTable;
  if (name == "separable") return PotentialKind::Separable;
  throw Error(ErrorKind::InvalidSpec, "unknown potential kind '" + name + "'");
}

namespace {

// Index of the cell [x[k], x[k+1]] containing t, clamped to the table.
std::size_t bracket(const std::vector<double>& x, double t) {
  if (t <= x.front()) return 0;
  if (t >= x.back()) return x.size() - 2;
  return static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
}

}  // namespace

double PotentialSpec::operator()(double r, double z) const {
  switch (kind) {
    case PotentialKind::Constant:
      return V0;
    case PotentialKind::Separable: {
      const double s = r / width;
      return base + amp * std::exp(-s * s) + z_amp * std::cos(2.0 * std::numbers::pi * z);
    }
    case PotentialKind::PeriodicTable: {
      const std::size_t nr = table_r.size();
      const std::size_t nz = table_z.size();
      double tr = 0.0;
      std::size_t ir = 0;
      if (nr > 1) {
        const double rc = std::clamp(r, table_r.front(), table_r.back());
        ir = bracket(table_r, rc);
        tr = (rc - table_r[ir]) / (table_r[ir + 1] - table_r[ir]);
      }
      const double zz = z - std::floor(z);
      // periodic bracket: the last node connects to the first one shifted by 1
      std::size_t iz0 = nz - 1;
      double z0 = table_z.back() - 1.0;
      double z1 = table_z.front();
      std::size_t iz1 = 0;
      if (zz >= table_z.front()) {
        const auto it = std::upper_bound(table_z.begin(), table_z.end(), zz);
        iz0 = static_cast<std::size_t>(it - table_z.begin()) - 1;
        z0 = table_z[iz0];
        iz1 = (iz0 + 1) % nz;
        z1 = iz1 == 0 ? table_z.front() + 1.0 : table_z[iz1];
      }
      const double tz = nz > 1 ? (zz - z0) / (z1 - z0) : 0.0;
      auto at = [&](std::size_t a, std::size_t b) { return table_V[a * nz + b]; };
      const std::size_t ir1 = nr > 1 ? ir + 1 : ir;
      const double v0 = (1.0 - tz) * at(ir, iz0) + tz * at(ir, iz1);
      const double v1 = (1.0 - tz) * at(ir1, iz0) + tz * at(ir1, iz1);
      return (1.0 - tr) * v0 + tr * v1;
    }
  }
  return 0.0;
}

bool PotentialSpec::z_periodic() const {
  return kind == PotentialKind::PeriodicTable ||
         (kind == PotentialKind::Separable && z_amp != 0.0);
}

void PotentialSpec::validate() const {
  switch (kind) {
    case PotentialKind::Constant:
      if (!std::isfinite(V0)) throw Error(ErrorKind::InvalidSpec, "V0 must be finite");
      break;
    case PotentialKind::Separable:
      if (!std::isfinite(base) || !std::isfinite(amp) || !std::isfinite(z_amp) ||
          !(width > 0.0) || !std::isfinite(width)) {
        throw Error(ErrorKind::InvalidSpec, "separable potential needs finite parameters, width > 0");
      }
      break;
    case PotentialKind::PeriodicTable:
      if (table_r.empty() || table_z.empty() || table_V.size() != table_r.size() * table_z.size()) {
        throw Error(ErrorKind::InvalidSpec, "potential table is empty or not a full tensor grid");
      }
      if (table_z.front() < 0.0 || table_z.back() >= 1.0) {
        throw Error(ErrorKind::InvalidSpec, "table z values must lie in one period [0, 1)");
      }
      for (double v : table_V) {
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidSpec, "potential table has non-finite V");
      }
      break;
  }
}

PotentialSpec load_potential_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open potential table '" + path + "'");
  std::string line;
  int lineno = 0;
  bool header = false;
  std::map<std::pair<double, double>, double> cells;
  while (std::getline(in, line)) {
    ++lineno;
    line.erase(std::remove_if(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\r' || c == '\t'; }),
               line.end());
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "r,z,V") {
        throw Error(ErrorKind::ConfigError,
                    path + ":" + std::to_string(lineno) + ": expected header 'r,z,V'");
      }
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    double vals[3];
    int n = 0;
    while (std::getline(ss, cell, ',')) {
      if (n >= 3) break;
      try {
        std::size_t pos = 0;
        vals[n] = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigError,
                    path + ":" + std::to_string(lineno) + ": not a number '" + cell + "'");
      }
      ++n;
    }
    if (n != 3 || ss.rdbuf()->in_avail() > 0) {
      throw Error(ErrorKind::ConfigError, path + ":" + std::to_string(lineno) + ": expected 3 columns");
    }
    cells[{vals[0], vals[1]}] = vals[2];
  }
  PotentialSpec p;
  p.kind = PotentialKind::PeriodicTable;
  p.table_path = path;
  for (const auto& [key, v] : cells) {
    p.table_r.push_back(key.first);
    p.table_z.push_back(key.second);
  }
  std::sort(p.table_r.begin(), p.table_r.end());
  p.table_r.erase(std::unique(p.table_r.begin(), p.table_r.end()), p.table_r.end());
  std::sort(p.table_z.begin(), p.table_z.end());
  p.table_z.erase(std::unique(p.table_z.begin(), p.table_z.end()), p.table_z.end());
  if (cells.size() != p.table_r.size() * p.table_z.size()) {
    throw Error(ErrorKind::ConfigError, path + ": table does not cover a full (r, z) tensor grid");
  }
  for (double r : p.table_r) {
    for (double z : p.table_z) p.table_V.push_back(cells.at({r, z}));
  }
  p.validate();
  return p;
}

void ProblemSpec::validate() const {
  if (N < 3) throw Error(ErrorKind::InvalidSpec, "N must be at least 3");
  if (K != N - 1 || K < 2) throw Error(ErrorKind::InvalidSpec, "only N - K = 1 is supported");
  const double hardy = (K - 2.0) * (K - 2.0) / 4.0;
  if (K == 2 ? !(a > 0.0) : !(a > -hardy)) {
    throw Error(ErrorKind::InvalidSpec, "a must exceed -(K-2)^2/4 (and be positive for K = 2)");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidSpec, "lambda must be finite and non-negative");
  }
  potential.validate();
  nonlinearity.validate(N);
}

double angular_measure(int K) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * K) / std::tgamma(0.5 * K);
}

double Grid::volume() const {
  return omega * std::pow(Rmax, K) / K * 2.0 * Zhalf;
}

Grid build_grid(const ProblemSpec& spec, int Nr, int Nz, double Rmax, double Zhalf) {
  if (Nr < 8 || Nz < 8) throw Error(ErrorKind::InvalidResolution, "Nr and Nz must be at least 8");
  if (!(Rmax > 0.0) || !(Zhalf > 0.0) || !std::isfinite(Rmax) || !std::isfinite(Zhalf)) {
    throw Error(ErrorKind::InvalidResolution, "Rmax and Zhalf must be positive");
  }
  if (spec.potential.z_periodic()) {
    const double periods = 2.0 * Zhalf;
    if (std::abs(periods - std::round(periods)) > 1e-12 * std::max(1.0, periods) ||
        std::abs(Zhalf - std::round(Zhalf)) > 1e-12 * std::max(1.0, Zhalf)) {
      throw Error(ErrorKind::InvalidResolution,
                  "Zhalf must be an integer multiple of the z-period 1 for periodic potentials");
    }
  }
  Grid g;
  g.Nr = Nr;
  g.Nz = Nz;
  g.K = spec.K;
  g.Rmax = Rmax;
  g.Zhalf = Zhalf;
  g.dr = Rmax / Nr;
  g.dz = 2.0 * Zhalf / Nz;
  g.omega = angular_measure(spec.K);
  g.r.resize(static_cast<std::size_t>(Nr));
  g.shell.resize(static_cast<std::size_t>(Nr));
  g.z.resize(static_cast<std::size_t>(Nz));
  for (int i = 0; i < Nr; ++i) {
    g.r[static_cast<std::size_t>(i)] = (i + 0.5) * g.dr;
    const double lo = i * g.dr;
    const double hi = (i + 1) * g.dr;
    g.shell[static_cast<std::size_t>(i)] = (std::pow(hi, spec.K) - std::pow(lo, spec.K)) / spec.K;
  }
  for (int j = 0; j < Nz; ++j) g.z[static_cast<std::size_t>(j)] = -Zhalf + (j + 0.5) * g.dz;
  g.w.resize(static_cast<Eigen::Index>(g.size()));
  for (int i = 0; i < Nr; ++i) {
    for (int j = 0; j < Nz; ++j) {
      g.w[static_cast<Eigen::Index>(g.index(i, j))] = g.omega * g.shell[static_cast<std::size_t>(i)] * g.dz;
    }
  }
  return g;
}

namespace {
void check_shape(const Grid& g, const Vector& u) {
  if (static_cast<std::size_t>(u.size()) != g.size()) {
    throw Error(ErrorKind::ShapeMismatch, "vector length " + std::to_string(u.size()) +
                                              " does not match grid size " + std::to_string(g.size()));
  }
}
}  // namespace

double inner_L2w(const Grid& g, const Vector& u, const Vector& v) {
  check_shape(g, u);
  check_shape(g, v);
  return (g.w.array() * u.array() * v.array()).sum();
}

double norm_Lk(const Grid& g, const Vector& u, double k) {
  check_shape(g, u);
  if (!(k >= 1.0)) throw Error(ErrorKind::InvalidSpec, "norm_Lk needs k >= 1");
  return std::pow((g.w.array() * u.array().abs().pow(k)).sum(), 1.0 / k);
}

Vector SymmetricOperator::apply(const Vector& u) const {
  return (S * u).cwiseQuotient(mass);
}

SymmetricOperator assemble_operator(const ProblemSpec& spec, const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> grad;
  grad.reserve(g.size() * 5);
  auto couple = [&](std::size_t p, std::size_t q, double c) {
    const auto a = static_cast<Eigen::Index>(p);
    const auto b = static_cast<Eigen::Index>(q);
    grad.emplace_back(a, a, c);
    grad.emplace_back(b, b, c);
    grad.emplace_back(a, b, -c);
    grad.emplace_back(b, a, -c);
  };
  auto wall = [&](std::size_t p, double c) {
    const auto a = static_cast<Eigen::Index>(p);
    grad.emplace_back(a, a, c);
  };
  for (int i = 0; i < g.Nr; ++i) {
    const double shell = g.shell[static_cast<std::size_t>(i)];
    const double cz = g.omega * shell / g.dz;
    for (int j = 0; j < g.Nz; ++j) {
      const std::size_t p = g.index(i, j);
      if (i + 1 < g.Nr) {
        const double rf = (i + 1) * g.dr;
        couple(p, g.index(i + 1, j), g.omega * g.dz * std::pow(rf, g.K - 1) / g.dr);
      } else {
        // Dirichlet wall at Rmax, half a cell away
        wall(p, 2.0 * g.omega * g.dz * std::pow(g.Rmax, g.K - 1) / g.dr);
      }
      if (j + 1 < g.Nz) couple(p, g.index(i, j + 1), cz);
      if (j == 0) wall(p, 2.0 * cz);
      if (j + 1 == g.Nz) wall(p, 2.0 * cz);
    }
  }
  SymmetricOperator op;
  op.gradient.resize(n, n);
  op.gradient.setFromTriplets(grad.begin(), grad.end());
  op.mass = g.w;
  op.potential.resize(n);
  op.inv_r2.resize(n);
  for (int i = 0; i < g.Nr; ++i) {
    const double r = g.r[static_cast<std::size_t>(i)];
    for (int j = 0; j < g.Nz; ++j) {
      const auto p = static_cast<Eigen::Index>(g.index(i, j));
      op.inv_r2[p] = 1.0 / (r * r);
      op.potential[p] = spec.a / (r * r) + spec.potential(r, g.z[static_cast<std::size_t>(j)]);
    }
  }
  SparseMatrix diag(n, n);
  diag.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Eigen::Index p = 0; p < n; ++p) diag.insert(p, p) = g.w[p] * op.potential[p];
  op.S = op.gradient + diag;
  op.S.makeCompressed();
  return op;
}

HardyReport hardy_check(const Grid& g, int K, int samples, std::uint64_t seed, double tol) {
  if (K <= 2) throw Error(ErrorKind::InvalidSpec, "the Hardy check needs K > 2");
  if (K != g.K) throw Error(ErrorKind::ShapeMismatch, "grid was built for a different K");
  ProblemSpec flat;
  flat.N = K + 1;
  flat.K = K;
  flat.a = 0.0;
  const SymmetricOperator op = assemble_operator(flat, g);
  HardyReport rep;
  rep.K = K;
  rep.constant = std::pow(2.0 / (K - 2.0), 2);
  rep.tolerance = tol;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector u(static_cast<Eigen::Index>(g.size()));
  for (int s = 0; s < samples; ++s) {
    u.setZero();
    const int bumps = 1 + s % 4;
    const bool off_axis = s % 5 == 4;
    for (int b = 0; b < bumps; ++b) {
      const double rc = (off_axis ? 0.2 + 0.4 * unif(rng) : 0.5 * unif(rng)) * g.Rmax;
      const double zc = (2.0 * unif(rng) - 1.0) * 0.5 * g.Zhalf;
      const double wr = (0.03 + 0.2 * unif(rng)) * g.Rmax;
      const double wz = (0.03 + 0.2 * unif(rng)) * g.Zhalf;
      const double c = gauss(rng);
      for (int i = 0; i < g.Nr; ++i) {
        const double dr = (g.r[static_cast<std::size_t>(i)] - rc) / wr;
        for (int j = 0; j < g.Nz; ++j) {
          const double dz = (g.z[static_cast<std::size_t>(j)] - zc) / wz;
          u[static_cast<Eigen::Index>(g.index(i, j))] += c * std::exp(-dr * dr - dz * dz);
        }
      }
    }
    const double lhs = (g.w.array() * op.inv_r2.array() * u.array().square()).sum();
    const double rhs = u.dot(op.gradient * u);
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
  }
  rep.passed = rep.worst_ratio <= rep.constant * (1.0 + tol);
  return rep;
}

BoundaryMassReport boundary_mass(const Grid& g, const Vector& u, double shell, double threshold) {
  check_shape(g, u);
  double total = 0.0;
  double outer = 0.0;
  for (int i = 0; i < g.Nr; ++i) {
    const bool r_out = g.r[static_cast<std::size_t>(i)] > (1.0 - shell) * g.Rmax;
    for (int j = 0; j < g.Nz; ++j) {
      const auto p = static_cast<Eigen::Index>(g.index(i, j));
      const double m = g.w[p] * u[p] * u[p];
      total += m;
      if (r_out || std::abs(g.z[static_cast<std::size_t>(j)]) > (1.0 - shell) * g.Zhalf) outer += m;
    }
  }
  BoundaryMassReport rep;
  rep.threshold = threshold;
  rep.fraction = total > 0.0 ? outer / total : 0.0;
  rep.warn = rep.fraction >= threshold;
  return rep;
}

void write_field_csv(std::ostream& os, const Grid& g, const Vector& u) {
  check_shape(g, u);
  os << "r,z,value\n" << std::setprecision(17);
  for (int i = 0; i < g.Nr; ++i) {
    for (int j = 0; j < g.Nz; ++j) {
      os << g.r[static_cast<std::size_t>(i)] << ',' << g.z[static_cast<std::size_t>(j)] << ','
         << u[static_cast<Eigen::Index>(g.index(i, j))] << '\n';
    }
  }
}

void write_field_csv(const std::string& path, const Grid& g, const Vector& u) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  write_field_csv(os, g, u);
}

void to_json(nlohmann::json& j, const PotentialSpec& p) {
  j = {{"kind", to_string(p.kind)}};
  switch (p.kind) {
    case PotentialKind::Constant:
      j["V0"] = p.V0;
      break;
    case PotentialKind::Separable:
      j["base"] = p.base;
      j["amp"] = p.amp;
      j["width"] = p.width;
      j["z_amp"] = p.z_amp;
      break;
    case PotentialKind::PeriodicTable:
      j["table"] = p.table_path;
      j["nr"] = p.table_r.size();
      j["nz"] = p.table_z.size();
      break;
  }
}

void to_json(nlohmann::json& j, const ProblemSpec& s) {
  j = {{"N", s.N}, {"K", s.K}, {"a", s.a}, {"potential", s.potential},
       {"lambda", s.lambda}, {"nonlinearity", s.nonlinearity}};
}

void to_json(nlohmann::json& j, const Grid& g) {
  j = {{"Nr", g.Nr}, {"Nz", g.Nz}, {"Rmax", g.Rmax}, {"Zhalf", g.Zhalf},
       {"K", g.K}, {"volume", g.volume()}};
}

void to_json(nlohmann::json& j, const HardyReport& h) {
  j = {{"K", h.K}, {"constant", h.constant}, {"tolerance", h.tolerance},
       {"worst_ratio", h.worst_ratio}, {"samples", h.samples}, {"passed", h.passed}};
}

void to_json(nlohmann::json& j, const BoundaryMassReport& b) {
  j = {{"fraction", b.fraction}, {"threshold", b.threshold}, {"warn", b.warn}};
}

}  // namespace linkvar
