#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "mre/solver.hpp"
#include "mre/types.hpp"

namespace mre {

using Json = nlohmann::json;

/// Parsed problem description. Matrices are stored as nested arrays of
/// [re, im] pairs, row-major, in the file.
struct ProblemFile {
  enum class Kind { States, Channel };
  enum class Task { Renyi, Relent };

  Kind kind = Kind::States;
  Task task = Task::Renyi;
  std::string alpha;  // "p/q", Renyi tasks only

  CMat rho, sigma;  // states

  CMat gamma_n, gamma_m;  // channels, Choi form (possibly built from Kraus)
  int dim_a = 0, dim_b = 0;
  std::optional<std::pair<CMat, double>> energy;  // (H, E)

  std::optional<double> eps;
  std::optional<std::pair<int, int>> mk;
  SolverOptions solver;
  uint64_t seed = 0;
  double regularize = 0.0;
  int budget = 500;

  static ProblemFile from_json(const Json& j);
  static ProblemFile load(const std::string& path);
  /// Canonical echo of the problem (matrices re-serialized, Kraus folded to
  /// Choi), used for digests and report embedding.
  Json to_json() const;
};

CMat json_to_matrix(const Json& j, const std::string& field);
Json matrix_to_json(const CMat& m);

}  // namespace mre
