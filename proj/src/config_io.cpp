#include "mfglq/config_io.hpp"

#include <fstream>

namespace mfglq {

using nlohmann::json;

namespace {

int depth(const json& j) {
  int d = 0;
  const json* cur = &j;
  while (cur->is_array()) {
    ++d;
    if (cur->empty()) break;
    cur = &(*cur)[0];
  }
  return d;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

Mat parse_matrix(const json& j, const std::string& where) {
  if (j.is_number()) return scalar_matrix(j.get<double>());
  if (depth(j) != 2) throw ConfigError(where + ": expected a matrix (array of rows)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw ConfigError(where + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(j[r][c], where);
  }
  return m;
}

Vec parse_vector(const json& j, const std::string& where) {
  if (j.is_number()) return scalar_vector(j.get<double>());
  if (depth(j) != 1) throw ConfigError(where + ": expected a vector");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = number(j[i], where);
  return v;
}

MatrixSchedule parse_matrix_schedule(const json& j, const std::string& where, int nodes) {
  const int d = depth(j);
  if (j.is_number() || d == 2) return constant_schedule(parse_matrix(j, where), nodes);
  MatrixSchedule s;
  if (d == 1) {
    for (const auto& e : j) s.push_back(scalar_matrix(number(e, where)));
  } else if (d == 3) {
    for (const auto& e : j) s.push_back(parse_matrix(e, where));
  } else {
    throw ConfigError(where + ": unrecognized schedule layout");
  }
  if (static_cast<int>(s.size()) != nodes)
    throw ConfigError(where + ": schedule needs 1 or " + std::to_string(nodes) + " samples");
  return s;
}

VectorSchedule parse_vector_schedule(const json& j, const std::string& where, int nodes) {
  const int d = depth(j);
  if (j.is_number() || d == 1) return constant_schedule(parse_vector(j, where), nodes);
  if (d != 2) throw ConfigError(where + ": unrecognized schedule layout");
  VectorSchedule s;
  for (const auto& e : j) s.push_back(parse_vector(e, where));
  if (static_cast<int>(s.size()) != nodes)
    throw ConfigError(where + ": schedule needs 1 or " + std::to_string(nodes) + " samples");
  return s;
}

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

template <class S>
bool is_constant(const S& s) {
  for (const auto& m : s)
    if (!(m.size() == s[0].size() && (m.array() == s[0].array()).all())) return false;
  return true;
}

json matrix_schedule_to_json(const MatrixSchedule& s) {
  if (is_constant(s)) return matrix_to_json(s[0]);
  json a = json::array();
  for (const auto& m : s) a.push_back(matrix_to_json(m));
  return a;
}

json vector_schedule_to_json(const VectorSchedule& s) {
  if (is_constant(s)) return vector_to_json(s[0]);
  json a = json::array();
  for (const auto& v : s) a.push_back(vector_to_json(v));
  return a;
}

}  // namespace

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

GameConfig config_from_json(const json& j) {
  GameConfig cfg;
  try {
    const auto& dims = field(j, "dims", "config");
    cfg.dims.n = field(dims, "n", "dims").get<int>();
    cfg.dims.k = field(dims, "k", "dims").get<int>();
    cfg.dims.N = field(dims, "N", "dims").get<int>();
    const auto& grid = field(j, "grid", "config");
    cfg.grid = build_grid(field(grid, "T", "grid").get<double>(), field(grid, "M", "grid").get<int>());
    const int m = cfg.grid.nodes();

    const auto& dj = field(j, "dynamics", "config");
    auto& d = cfg.dynamics;
    auto ms = [&](const json& obj, const char* key, const char* sect) {
      return parse_matrix_schedule(field(obj, key, sect), std::string(sect) + "." + key, m);
    };
    auto vs = [&](const json& obj, const char* key, const char* sect) {
      return parse_vector_schedule(field(obj, key, sect), std::string(sect) + "." + key, m);
    };
    d.A = ms(dj, "A", "dynamics");
    d.B = ms(dj, "B", "dynamics");
    d.E = ms(dj, "E", "dynamics");
    d.C = ms(dj, "C", "dynamics");
    d.D = ms(dj, "D", "dynamics");
    d.F = ms(dj, "F", "dynamics");
    d.C0 = ms(dj, "Ctilde", "dynamics");
    d.D0 = ms(dj, "Dtilde", "dynamics");
    d.F0 = ms(dj, "Ftilde", "dynamics");
    d.f = vs(dj, "f", "dynamics");
    d.g = vs(dj, "g", "dynamics");
    d.g0 = vs(dj, "gtilde", "dynamics");

    const auto& cj = field(j, "cost", "config");
    auto& c = cfg.cost;
    c.Q = ms(cj, "Q", "cost");
    c.R = ms(cj, "R", "cost");
    c.Gamma1 = ms(cj, "Gamma1", "cost");
    c.eta1 = vs(cj, "eta1", "cost");
    c.eta2 = vs(cj, "eta2", "cost");
    c.G = parse_matrix(field(cj, "G", "cost"), "cost.G");
    c.Gamma0 = parse_matrix(field(cj, "Gamma0", "cost"), "cost.Gamma0");
    c.eta0 = parse_vector(field(cj, "eta0", "cost"), "cost.eta0");

    const auto& ij = field(j, "initial", "config");
    const auto kind = field(ij, "kind", "initial").get<std::string>();
    auto& law = cfg.initial;
    if (kind == "point") {
      law.kind = InitialKind::kPointMass;
      law.location = parse_vector(field(ij, "location", "initial"), "initial.location");
    } else if (kind == "uniform") {
      law.kind = InitialKind::kUniformBox;
      law.lower = parse_vector(field(ij, "lower", "initial"), "initial.lower");
      law.upper = parse_vector(field(ij, "upper", "initial"), "initial.upper");
    } else if (kind == "gaussian") {
      law.kind = InitialKind::kGaussian;
      law.location = parse_vector(field(ij, "mean", "initial"), "initial.mean");
      law.covariance = parse_matrix(field(ij, "covariance", "initial"), "initial.covariance");
    } else {
      throw ConfigError("initial.kind must be point, uniform or gaussian");
    }
    cfg.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.check_structure();
  return cfg;
}

json config_to_json(const GameConfig& cfg) {
  json j;
  j["dims"] = {{"n", cfg.dims.n}, {"k", cfg.dims.k}, {"N", cfg.dims.N}};
  j["grid"] = {{"T", cfg.grid.horizon()}, {"M", cfg.grid.steps()}};
  const auto& d = cfg.dynamics;
  j["dynamics"] = {{"A", matrix_schedule_to_json(d.A)},       {"B", matrix_schedule_to_json(d.B)},
                   {"E", matrix_schedule_to_json(d.E)},       {"C", matrix_schedule_to_json(d.C)},
                   {"D", matrix_schedule_to_json(d.D)},       {"F", matrix_schedule_to_json(d.F)},
                   {"Ctilde", matrix_schedule_to_json(d.C0)}, {"Dtilde", matrix_schedule_to_json(d.D0)},
                   {"Ftilde", matrix_schedule_to_json(d.F0)}, {"f", vector_schedule_to_json(d.f)},
                   {"g", vector_schedule_to_json(d.g)},       {"gtilde", vector_schedule_to_json(d.g0)}};
  const auto& c = cfg.cost;
  j["cost"] = {{"Q", matrix_schedule_to_json(c.Q)},         {"R", matrix_schedule_to_json(c.R)},
               {"Gamma1", matrix_schedule_to_json(c.Gamma1)}, {"eta1", vector_schedule_to_json(c.eta1)},
               {"eta2", vector_schedule_to_json(c.eta2)},     {"G", matrix_to_json(c.G)},
               {"Gamma0", matrix_to_json(c.Gamma0)},          {"eta0", vector_to_json(c.eta0)}};
  const auto& law = cfg.initial;
  switch (law.kind) {
    case InitialKind::kPointMass:
      j["initial"] = {{"kind", "point"}, {"location", vector_to_json(law.location)}};
      break;
    case InitialKind::kUniformBox:
      j["initial"] = {{"kind", "uniform"}, {"lower", vector_to_json(law.lower)}, {"upper", vector_to_json(law.upper)}};
      break;
    case InitialKind::kGaussian:
      j["initial"] = {{"kind", "gaussian"},
                      {"mean", vector_to_json(law.location)},
                      {"covariance", matrix_to_json(law.covariance)}};
      break;
  }
  j["seed"] = cfg.seed;
  return j;
}

GameConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const GameConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace mfglq
