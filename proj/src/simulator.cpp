#include "mfglq/simulator.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace mfglq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Domain : std::uint64_t { kCommon = 0, kIdiosyncratic = 1, kInitial = 2 };

void fill_normals(Eigen::Ref<Eigen::RowVectorXd> out, std::uint64_t s, double sd) {
  std::mt19937_64 eng(s);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Eigen::Index j = 0; j < out.size(); ++j) out(j) = sd * nd(eng);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t scenario, std::uint64_t domain, std::uint64_t id) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ scenario);
  h = splitmix64(h ^ (domain * 0x632be59bd9b4e019ULL));
  return splitmix64(h ^ id);
}

NoiseBundle make_noise(const TimeGrid& grid, int N, std::uint64_t seed, std::uint64_t scenario) {
  NoiseBundle nb;
  nb.seed = seed;
  nb.scenario = scenario;
  nb.N = N;
  nb.dt = grid.dt();
  const int M = grid.steps();
  const double sd = std::sqrt(nb.dt);
  nb.dW.resize(N, M);
  nb.dW0.resize(M);
  Eigen::RowVectorXd row(M);
  fill_normals(row, stream_seed(seed, scenario, kCommon, 0), sd);
  nb.dW0 = row.transpose();
  for (int i = 0; i < N; ++i) {
    fill_normals(row, stream_seed(seed, scenario, kIdiosyncratic, static_cast<std::uint64_t>(i)), sd);
    nb.dW.row(i) = row;
  }
  return nb;
}

NoiseBundle zero_noise(const TimeGrid& grid, int N) {
  NoiseBundle nb;
  nb.N = N;
  nb.dt = grid.dt();
  nb.dW = Mat::Zero(N, grid.steps());
  nb.dW0 = Vec::Zero(grid.steps());
  return nb;
}

InitialSample sample_initials(const InitialStateLaw& law, int N, std::uint64_t seed, std::uint64_t scenario) {
  InitialSample s;
  s.mean = law.mean();
  const auto n = s.mean.size();
  s.xi.resize(n, N);
  Mat root;
  if (law.kind == InitialKind::kGaussian) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (law.covariance + law.covariance.transpose()));
    root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  for (int i = 0; i < N; ++i) {
    std::mt19937_64 eng(stream_seed(seed, scenario, kInitial, static_cast<std::uint64_t>(i)));
    switch (law.kind) {
      case InitialKind::kPointMass:
        s.xi.col(i) = law.location;
        break;
      case InitialKind::kUniformBox: {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (Eigen::Index r = 0; r < n; ++r) s.xi(r, i) = law.lower(r) + (law.upper(r) - law.lower(r)) * u(eng);
        break;
      }
      case InitialKind::kGaussian: {
        std::normal_distribution<double> nd(0.0, 1.0);
        Vec z(n);
        for (Eigen::Index r = 0; r < n; ++r) z(r) = nd(eng);
        s.xi.col(i) = law.location + root * z;
        break;
      }
    }
  }
  return s;
}

Mat euler_step(const CoefficientSample& s, const Mat& X, const Mat& U, const Vec& xbar, double dt,
               const Eigen::Ref<const Vec>& dW, double dW0, bool idiosyncratic) {
  const auto ones = Eigen::RowVectorXd::Ones(X.cols());
  Mat next = X + (s.A * X + s.B * U + (s.E * xbar + s.f) * ones) * dt;
  if (idiosyncratic) next += (s.C * X + s.D * U + (s.F * xbar + s.g) * ones) * dW.asDiagonal();
  next += (s.C0 * X + s.D0 * U + (s.F0 * xbar + s.g0) * ones) * dW0;
  return next;
}

Mat apply_gains(const GainSchedule& g, int j, const Mat& X, const Vec& xbar) {
  return g.self_gain[j] * X + (g.mf_gain[j] * xbar + g.offset[j]) * Eigen::RowVectorXd::Ones(X.cols());
}

namespace {

void check_inputs(const GameConfig& cfg, const GainSchedule& gains, const NoiseBundle& noise,
                  const InitialSample& init) {
  const int M = cfg.grid.steps();
  if (noise.N < 2) throw PreconditionError("simulation requires N >= 2");
  if (static_cast<int>(gains.self_gain.size()) != M + 1) throw ConfigError("gain schedule does not match the grid");
  if (noise.dW.cols() != M || noise.dW0.size() != M || noise.dW.rows() != noise.N)
    throw ConfigError("noise bundle does not match the grid");
  if (init.xi.cols() != noise.N || init.xi.rows() != cfg.dims.n) throw ConfigError("initial states have wrong shape");
}

void check_finite(const Mat& X, double t) {
  if (!X.allFinite()) throw DivergenceError("non-finite state in simulation", t);
}

}  // namespace

TrajectoryBundle simulate_centralized(const GameConfig& cfg, const GainSchedule& gains, const NoiseBundle& noise,
                                      const InitialSample& init) {
  check_inputs(cfg, gains, noise, init);
  const int M = cfg.grid.steps();
  const double dt = cfg.grid.dt();
  TrajectoryBundle b;
  b.scenario = noise.scenario;
  b.N = noise.N;
  b.kind = gains.kind;
  b.states.resize(M + 1);
  b.controls.resize(M + 1);
  b.average.resize(M + 1);
  Mat X = init.xi;
  for (int j = 0; j <= M; ++j) {
    const Vec xbar = X.rowwise().mean();
    Mat U = apply_gains(gains, j, X, xbar);
    b.states[j] = X;
    b.average[j] = xbar;
    if (j < M) {
      X = euler_step(sample(cfg, j), X, U, xbar, dt, noise.dW.col(j), noise.dW0(j));
      check_finite(X, cfg.grid.time(j + 1));
    }
    b.controls[j] = std::move(U);
  }
  b.noise = noise;
  return b;
}

std::vector<Vec> simulate_mean_field(const GameConfig& cfg, const GainSchedule& gains, const Vec& dW0,
                                     const Vec& xbar0) {
  const int M = cfg.grid.steps();
  if (dW0.size() != M) throw ConfigError("common noise does not match the grid");
  const double dt = cfg.grid.dt();
  std::vector<Vec> path(M + 1);
  Mat x = xbar0;
  const Vec none;
  for (int j = 0; j <= M; ++j) {
    path[j] = x.col(0);
    if (j == M) break;
    const Vec xv = x.col(0);
    const Mat u = apply_gains(gains, j, x, xv);
    x = euler_step(sample(cfg, j), x, u, xv, dt, none, dW0(j), false);
    check_finite(x, cfg.grid.time(j + 1));
  }
  return path;
}

TrajectoryBundle simulate_decentralized(const GameConfig& cfg, const GainSchedule& gains, const NoiseBundle& noise,
                                        const InitialSample& init) {
  check_inputs(cfg, gains, noise, init);
  const int M = cfg.grid.steps();
  const double dt = cfg.grid.dt();
  TrajectoryBundle b;
  b.scenario = noise.scenario;
  b.N = noise.N;
  b.kind = gains.kind;
  b.mean_field = simulate_mean_field(cfg, gains, noise.dW0, init.mean);
  b.states.resize(M + 1);
  b.controls.resize(M + 1);
  b.average.resize(M + 1);
  b.aux_states.resize(M + 1);
  b.aux_average.resize(M + 1);
  Mat Xa = init.xi;  // auxiliary x̄_i
  Mat Xr = init.xi;  // realized x̂_i
  for (int j = 0; j <= M; ++j) {
    const Vec& z = b.mean_field[j];
    Mat U = apply_gains(gains, j, Xa, z);
    const Vec xr_mean = Xr.rowwise().mean();
    b.aux_states[j] = Xa;
    b.aux_average[j] = Xa.rowwise().mean();
    b.states[j] = Xr;
    b.average[j] = xr_mean;
    if (j < M) {
      const auto s = sample(cfg, j);
      Xa = euler_step(s, Xa, U, z, dt, noise.dW.col(j), noise.dW0(j));
      Xr = euler_step(s, Xr, U, xr_mean, dt, noise.dW.col(j), noise.dW0(j));
      check_finite(Xa, cfg.grid.time(j + 1));
      check_finite(Xr, cfg.grid.time(j + 1));
    }
    b.controls[j] = std::move(U);
  }
  b.noise = noise;
  return b;
}

}  // namespace mfglq
