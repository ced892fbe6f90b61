#include "mre/problem.hpp"

#include <fstream>

#include "mre/linalg.hpp"

namespace mre {

CMat json_to_matrix(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw InputError(field + ": expected a nonempty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      throw InputError(field + ": ragged rows at row " + std::to_string(r));
    for (int c = 0; c < cols; ++c) {
      const Json& e = j[r][c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw InputError(field + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                         ") is not an [re, im] pair");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

Json matrix_to_json(const CMat& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::vector<CMat> json_to_kraus(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw InputError(field + ": expected a list of matrices");
  std::vector<CMat> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(json_to_matrix(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

CMat channel_choi(const Json& j, const std::string& field) {
  if (j.contains("choi")) return json_to_matrix(j["choi"], field + ".choi");
  if (j.contains("kraus")) return choi_from_kraus(json_to_kraus(j["kraus"], field + ".kraus"));
  throw InputError(field + ": expected either 'choi' or 'kraus'");
}

}  // namespace

ProblemFile ProblemFile::from_json(const Json& j) {
  ProblemFile p;
  if (!j.is_object()) throw InputError("problem: expected a JSON object");
  const std::string kind = j.value("kind", "");
  if (kind == "states") {
    p.kind = Kind::States;
  } else if (kind == "channel") {
    p.kind = Kind::Channel;
  } else {
    throw InputError("kind: expected 'states' or 'channel'");
  }
  const std::string task = j.value("task", "");
  if (task == "renyi") {
    p.task = Task::Renyi;
  } else if (task == "relent") {
    p.task = Task::Relent;
  } else {
    throw InputError("task: expected 'renyi' or 'relent'");
  }
  if (j.contains("alpha")) {
    if (!j["alpha"].is_string())
      throw InputError("alpha: expected an exact rational string \"p/q\"");
    p.alpha = j["alpha"].get<std::string>();
  }
  if (p.task == Task::Renyi && p.alpha.empty())
    throw InputError("alpha: required for renyi tasks");

  if (p.kind == Kind::States) {
    if (!j.contains("rho") || !j.contains("sigma"))
      throw InputError("states problem requires 'rho' and 'sigma'");
    p.rho = json_to_matrix(j["rho"], "rho");
    p.sigma = json_to_matrix(j["sigma"], "sigma");
  } else {
    if (!j.contains("channel_n") || !j.contains("channel_m"))
      throw InputError("channel problem requires 'channel_n' and 'channel_m'");
    if (!j.contains("d_a") || !j.contains("d_b"))
      throw InputError("channel problem requires 'd_a' and 'd_b'");
    p.dim_a = j["d_a"].get<int>();
    p.dim_b = j["d_b"].get<int>();
    p.gamma_n = channel_choi(j["channel_n"], "channel_n");
    p.gamma_m = channel_choi(j["channel_m"], "channel_m");
    if (j.contains("energy")) {
      const Json& e = j["energy"];
      if (!e.contains("h") || !e.contains("e"))
        throw InputError("energy: expected fields 'h' and 'e'");
      p.energy = std::make_pair(json_to_matrix(e["h"], "energy.h"), e["e"].get<double>());
    }
  }

  if (j.contains("accuracy")) {
    const Json& a = j["accuracy"];
    if (a.contains("eps")) p.eps = a["eps"].get<double>();
    if (a.contains("m") != a.contains("k"))
      throw InputError("accuracy: 'm' and 'k' must be given together");
    if (a.contains("m")) p.mk = std::make_pair(a["m"].get<int>(), a["k"].get<int>());
  }
  if (j.contains("solver")) {
    const Json& s = j["solver"];
    p.solver.gap_tol = s.value("gap_tol", p.solver.gap_tol);
    p.solver.feas_tol = s.value("feas_tol", p.solver.feas_tol);
    p.solver.max_iterations = s.value("max_iterations", p.solver.max_iterations);
  }
  p.seed = j.value("seed", static_cast<uint64_t>(0));
  p.regularize = j.value("regularize", 0.0);
  p.budget = j.value("budget", 500);
  if (p.regularize < 0 || p.regularize > 1)
    throw InputError("regularize: delta must lie in [0, 1]");
  return p;
}

ProblemFile ProblemFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError(std::string("problem file is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

Json ProblemFile::to_json() const {
  Json j;
  j["kind"] = kind == Kind::States ? "states" : "channel";
  j["task"] = task == Task::Renyi ? "renyi" : "relent";
  if (!alpha.empty()) j["alpha"] = alpha;
  if (kind == Kind::States) {
    j["rho"] = matrix_to_json(rho);
    j["sigma"] = matrix_to_json(sigma);
  } else {
    j["channel_n"] = Json{{"choi", matrix_to_json(gamma_n)}};
    j["channel_m"] = Json{{"choi", matrix_to_json(gamma_m)}};
    j["d_a"] = dim_a;
    j["d_b"] = dim_b;
    if (energy)
      j["energy"] = Json{{"h", matrix_to_json(energy->first)}, {"e", energy->second}};
  }
  Json acc = Json::object();
  if (eps) acc["eps"] = *eps;
  if (mk) {
    acc["m"] = mk->first;
    acc["k"] = mk->second;
  }
  if (!acc.empty()) j["accuracy"] = acc;
  j["solver"] = Json{{"gap_tol", solver.gap_tol},
                     {"feas_tol", solver.feas_tol},
                     {"max_iterations", solver.max_iterations}};
  j["seed"] = seed;
  if (regularize > 0) j["regularize"] = regularize;
  j["budget"] = budget;
  return j;
}

}  // namespace mre
