#include "mfglq/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mfglq {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("grid: horizon must be positive");
  if (steps < 2) throw ConfigError("grid: at least 2 steps required");
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(nodes());
  for (int j = 0; j < nodes(); ++j) t[j] = time(j);
  return t;
}

TimeGrid build_grid(double horizon, int steps) { return TimeGrid(horizon, steps); }

Vec InitialStateLaw::mean() const {
  switch (kind) {
    case InitialKind::kUniformBox:
      return 0.5 * (lower + upper);
    case InitialKind::kPointMass:
    case InitialKind::kGaussian:
    default:
      return location;
  }
}

Mat InitialStateLaw::covariance_matrix() const {
  const auto n = mean().size();
  switch (kind) {
    case InitialKind::kUniformBox: {
      Vec w = upper - lower;
      return (w.array().square() / 12.0).matrix().asDiagonal();
    }
    case InitialKind::kGaussian:
      return covariance;
    case InitialKind::kPointMass:
    default:
      return Mat::Zero(n, n);
  }
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_matrix_schedule(const MatrixSchedule& s, const char* name, int nodes, Eigen::Index rows,
                           Eigen::Index cols) {
  std::ostringstream msg;
  if (static_cast<int>(s.size()) != nodes) {
    msg << name << ": expected " << nodes << " samples, got " << s.size();
    throw ConfigError(msg.str());
  }
  for (const auto& m : s) {
    if (m.rows() != rows || m.cols() != cols) {
      msg << name << ": expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
      throw ConfigError(msg.str());
    }
  }
}

void check_vector_schedule(const VectorSchedule& s, const char* name, int nodes, Eigen::Index size) {
  std::ostringstream msg;
  if (static_cast<int>(s.size()) != nodes) {
    msg << name << ": expected " << nodes << " samples, got " << s.size();
    throw ConfigError(msg.str());
  }
  for (const auto& v : s) {
    if (v.size() != size) {
      msg << name << ": expected length " << size << ", got " << v.size();
      throw ConfigError(msg.str());
    }
  }
}

template <class S>
bool all_finite(const S& schedule) {
  for (const auto& m : schedule)
    if (!m.allFinite()) return false;
  return true;
}

bool symmetric(const Mat& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

double min_eigenvalue(const Mat& m) {
  Mat s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool psd(const Mat& m) {
  const double scale = std::max(1.0, m.norm());
  return min_eigenvalue(m) >= -1e-10 * scale;
}

}  // namespace

void GameConfig::check_structure() const {
  require(dims.n >= 1, "dims: n must be >= 1");
  require(dims.k >= 1, "dims: k must be >= 1");
  require(dims.N >= 2, "dims: N must be >= 2");
  require(grid.steps() >= 2 && grid.horizon() > 0.0, "grid: invalid");
  const int m = grid.nodes();
  const auto n = dims.n, k = dims.k;
  const auto& d = dynamics;
  check_matrix_schedule(d.A, "A", m, n, n);
  check_matrix_schedule(d.E, "E", m, n, n);
  check_matrix_schedule(d.C, "C", m, n, n);
  check_matrix_schedule(d.F, "F", m, n, n);
  check_matrix_schedule(d.C0, "C0", m, n, n);
  check_matrix_schedule(d.F0, "F0", m, n, n);
  check_matrix_schedule(d.B, "B", m, n, k);
  check_matrix_schedule(d.D, "D", m, n, k);
  check_matrix_schedule(d.D0, "D0", m, n, k);
  check_vector_schedule(d.f, "f", m, n);
  check_vector_schedule(d.g, "g", m, n);
  check_vector_schedule(d.g0, "g0", m, n);
  const auto& c = cost;
  check_matrix_schedule(c.Q, "Q", m, n, n);
  check_matrix_schedule(c.R, "R", m, k, k);
  check_matrix_schedule(c.Gamma1, "Gamma1", m, n, n);
  check_vector_schedule(c.eta1, "eta1", m, n);
  check_vector_schedule(c.eta2, "eta2", m, k);
  require(c.G.rows() == n && c.G.cols() == n, "G: expected n x n");
  require(c.Gamma0.rows() == n && c.Gamma0.cols() == n, "Gamma0: expected n x n");
  require(c.eta0.size() == n, "eta0: expected length n");
  const auto& law = initial;
  switch (law.kind) {
    case InitialKind::kPointMass:
      require(law.location.size() == n, "initial: location must have length n");
      break;
    case InitialKind::kUniformBox:
      require(law.lower.size() == n && law.upper.size() == n, "initial: box bounds must have length n");
      require((law.upper.array() >= law.lower.array()).all(), "initial: upper < lower");
      break;
    case InitialKind::kGaussian:
      require(law.location.size() == n, "initial: location must have length n");
      require(law.covariance.rows() == n && law.covariance.cols() == n, "initial: covariance must be n x n");
      break;
  }
}

CoefficientSample sample(const GameConfig& cfg, int j) {
  const auto& d = cfg.dynamics;
  const auto& c = cfg.cost;
  return {d.A[j], d.B[j], d.E[j], d.C[j], d.D[j], d.F[j], d.C0[j], d.D0[j], d.F0[j], d.f[j], d.g[j], d.g0[j],
          c.Q[j], c.R[j], c.Gamma1[j], c.eta1[j], c.eta2[j]};
}

bool ValidationReport::pass() const {
  for (const auto& c : clauses)
    if (!c.pass) return false;
  return true;
}

ValidationReport validate_config(const GameConfig& cfg) {
  ValidationReport rep;
  try {
    cfg.check_structure();
    rep.clauses.push_back({"dimensions", true, ""});
  } catch (const ConfigError& e) {
    rep.clauses.push_back({"dimensions", false, e.what()});
    return rep;
  }
  const auto& d = cfg.dynamics;
  const auto& c = cfg.cost;

  bool fin = all_finite(d.A) && all_finite(d.B) && all_finite(d.E) && all_finite(d.C) && all_finite(d.D) &&
             all_finite(d.F) && all_finite(d.C0) && all_finite(d.D0) && all_finite(d.F0) && all_finite(d.f) &&
             all_finite(d.g) && all_finite(d.g0);
  rep.clauses.push_back({"bounded dynamics coefficients", fin, fin ? "" : "non-finite entry"});

  fin = all_finite(c.Q) && all_finite(c.R) && all_finite(c.Gamma1) && all_finite(c.eta1) && all_finite(c.eta2) &&
        c.G.allFinite() && c.Gamma0.allFinite() && c.eta0.allFinite();
  rep.clauses.push_back({"bounded cost coefficients", fin, fin ? "" : "non-finite entry"});
  if (!fin) return rep;

  auto first_fail = [&](const MatrixSchedule& s, auto pred) {
    for (std::size_t j = 0; j < s.size(); ++j)
      if (!pred(s[j])) return static_cast<int>(j);
    return -1;
  };
  auto clause = [&](const std::string& name, int node) {
    std::string detail;
    if (node >= 0) detail = "fails at t = " + std::to_string(cfg.grid.time(node));
    rep.clauses.push_back({name, node < 0, detail});
  };
  clause("Q(.) symmetric", first_fail(c.Q, symmetric));
  clause("R(.) symmetric", first_fail(c.R, symmetric));
  rep.clauses.push_back({"G symmetric", symmetric(c.G), symmetric(c.G) ? "" : "G != G^T"});
  clause("Q(.) >= 0", first_fail(c.Q, psd));
  rep.clauses.push_back({"G >= 0", psd(c.G), psd(c.G) ? "" : "negative eigenvalue"});

  const auto& law = cfg.initial;
  bool law_ok = law.mean().allFinite() && law.covariance_matrix().allFinite();
  if (law.kind == InitialKind::kGaussian) law_ok = law_ok && symmetric(law.covariance) && psd(law.covariance);
  rep.clauses.push_back({"initial law has finite second moment", law_ok, ""});
  return rep;
}

MatrixSchedule constant_schedule(const Mat& value, int nodes) { return MatrixSchedule(nodes, value); }
VectorSchedule constant_schedule(const Vec& value, int nodes) { return VectorSchedule(nodes, value); }
Mat scalar_matrix(double v) { return Mat::Constant(1, 1, v); }
Vec scalar_vector(double v) { return Vec::Constant(1, v); }

GameConfig production_planning_config(const ProductionParams& p, int agents, int steps, std::uint64_t seed) {
  if (!(p.r > 0.0)) throw ConfigError("production: loss rate r must be positive");
  if (!(p.c > 0.0)) throw ConfigError("production: productivity coefficient c must be positive");
  if (p.inventory_high < p.inventory_low) throw ConfigError("production: empty inventory interval");
  if (agents < 2) throw ConfigError("dims: N must be >= 2");

  GameConfig cfg;
  cfg.dims = {1, 1, agents};
  cfg.grid = build_grid(p.horizon, steps);
  cfg.seed = seed;
  const int m = cfg.grid.nodes();
  auto cm = [m](double v) { return constant_schedule(scalar_matrix(v), m); };
  auto cv = [m](double v) { return constant_schedule(scalar_vector(v), m); };

  auto& d = cfg.dynamics;
  d.A = cm(-(p.r + p.m));
  d.B = cm(p.c);
  d.E = cm(p.m);
  d.f = cv(-p.d);
  d.C = cm(0.0);
  d.D = cm(p.b_tilde);
  d.F = cm(0.0);
  d.g = cv(p.g_tilde);
  d.C0 = cm(p.a_tilde);
  d.D0 = cm(0.0);
  d.F0 = cm(0.0);
  d.g0 = cv(p.g);

  auto& c = cfg.cost;
  c.Q = cm(p.Q);
  c.R = cm(p.R);
  c.Gamma1 = cm(1.0);
  c.eta1 = cv(0.0);
  c.eta2 = cv(p.eta2);
  c.G = scalar_matrix(p.G);
  c.Gamma0 = scalar_matrix(0.0);
  c.eta0 = scalar_vector(p.target);

  cfg.initial.kind = InitialKind::kUniformBox;
  cfg.initial.lower = scalar_vector(p.inventory_low);
  cfg.initial.upper = scalar_vector(p.inventory_high);
  cfg.check_structure();
  return cfg;
}

}  // namespace mfglq
