#include "mre/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mre/linalg.hpp"
#include "mre/oracle.hpp"

namespace mre {

namespace {

std::string format_number(double v) {
  char buf[64];
  if (v == static_cast<int64_t>(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%" PRId64, static_cast<int64_t>(v));
    // Keep a fractional marker so the value parses back as a double where it
    // started as one; integers are emitted by the int branch below instead.
    std::string s(buf);
    return s + ".0";
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump_rec(const Json& j, std::string* out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out->push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann orders keys
        if (!first) out->push_back(',');
        first = false;
        *out += Json(it.key()).dump();
        out->push_back(':');
        dump_rec(it.value(), out);
      }
      out->push_back('}');
      break;
    }
    case Json::value_t::array: {
      out->push_back('[');
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out->push_back(',');
        dump_rec(j[i], out);
      }
      out->push_back(']');
      break;
    }
    case Json::value_t::number_float:
      *out += format_number(j.get<double>());
      break;
    default:
      *out += j.dump();
  }
}

Json vector_to_json(const RVec& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Json basis_to_json(const Measurement& m) {
  Json arr = Json::array();
  for (int y = 0; y < m.outcomes(); ++y) {
    Json col = Json::array();
    for (int r = 0; r < m.basis.rows(); ++r)
      col.push_back(Json::array({m.basis(r, y).real(), m.basis(r, y).imag()}));
    arr.push_back(col);
  }
  return arr;
}

Measurement basis_from_json(const Json& j) {
  Measurement m;
  const int outcomes = static_cast<int>(j.size());
  if (outcomes == 0) throw InputError("measurement: empty basis");
  const int rows = static_cast<int>(j[0].size());
  m.basis.resize(rows, outcomes);
  for (int y = 0; y < outcomes; ++y)
    for (int r = 0; r < rows; ++r)
      m.basis(r, y) = Complex(j[y][r][0].get<double>(), j[y][r][1].get<double>());
  return m;
}

Json accuracy_to_json(const AccuracyInfo& acc, bool renyi) {
  Json j;
  if (renyi) {
    Json cone;
    cone["requested"] =
        std::to_string(acc.cone.requested.p) + "/" + std::to_string(acc.cone.requested.q);
    cone["used"] = std::to_string(acc.cone.used.p) + "/" + std::to_string(acc.cone.used.q);
    cone["dyadic_substituted"] = acc.cone.dyadic_substituted;
    cone["exponent_gap"] = acc.cone.exponent_gap;
    cone["lmi_count"] = acc.cone.lmi_count;
    cone["value_error_bound"] = acc.cone.value_error_bound;
    j["cone"] = cone;
    j["eps_hat"] = acc.eps_hat;
  } else {
    j["m"] = acc.m;
    j["k"] = acc.k;
    j["a"] = acc.a;
    j["eps_hat"] = acc.eps_hat;
  }
  return j;
}

Json solver_to_json(const SolverStats& s) {
  return Json{{"status", to_string(s.status)},
              {"iterations", s.iterations},
              {"gap", s.gap},
              {"primal_residual", s.primal_residual},
              {"dual_residual", s.dual_residual}};
}

std::string task_name(const ProblemFile& p) {
  if (p.kind == ProblemFile::Kind::States)
    return p.task == ProblemFile::Task::Renyi ? "states-renyi" : "states-relent";
  return p.task == ProblemFile::Task::Renyi ? "channel-renyi" : "channel-relent";
}

Json report_common(const ProblemFile& problem, double wall_seconds) {
  Json j;
  j["format"] = "mre-report-v1";
  Json input = problem.to_json();
  j["task"] = task_name(problem);
  j["input"] = input;
  j["input_digest"] = digest(input);
  j["seed"] = problem.seed;
  j["wall_time_seconds"] = wall_seconds;
  return j;
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  dump_rec(j, &out);
  return out;
}

std::string digest(const Json& j) {
  const std::string text = canonical_dump(j);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, h);
  return buf;
}

Json report_for_states(const ProblemFile& problem, const DivergenceResult& result,
                       double wall_seconds) {
  Json j = report_common(problem, wall_seconds);
  const bool renyi = problem.task == ProblemFile::Task::Renyi;
  if (result.infinite) {
    j["status"] = result.infinite_suspected ? "infinite-suspected" : "infinite";
    j["value"] = nullptr;
    return j;
  }
  j["status"] = "ok";
  j["value"] = result.value;
  if (renyi) j["quasi"] = result.quasi;
  j["omega"] = matrix_to_json(result.omega);
  j["theta"] = matrix_to_json(result.theta);
  j["measurement"] = basis_to_json(result.measurement);
  j["induced"] =
      Json{{"p", vector_to_json(result.outcome.p)}, {"w", vector_to_json(result.outcome.w)}};
  j["saturation_residual"] = result.saturation_residual;
  j["solver"] = solver_to_json(result.solver);
  j["accuracy"] = accuracy_to_json(result.accuracy, renyi);
  j["regularized"] = result.regularized;
  if (result.regularized) j["regularization_delta"] = result.regularization_delta;
  return j;
}

Json report_for_channel(const ProblemFile& problem, const ChannelDivergenceResult& result,
                        double wall_seconds) {
  Json j = report_common(problem, wall_seconds);
  const bool renyi = problem.task == ProblemFile::Task::Renyi;
  if (result.infinite) {
    j["status"] = result.infinite_suspected ? "infinite-suspected" : "infinite";
    j["value"] = nullptr;
    return j;
  }
  j["status"] = "ok";
  j["value"] = result.value;
  if (renyi) j["quasi"] = result.quasi;
  j["rho_opt"] = matrix_to_json(result.rho);
  j["omega"] = matrix_to_json(result.omega);
  j["theta"] = matrix_to_json(result.theta);
  j["observable"] = matrix_to_json(result.observable);
  j["measurement"] = basis_to_json(result.measurement);
  j["induced"] =
      Json{{"p", vector_to_json(result.outcome.p)}, {"w", vector_to_json(result.outcome.w)}};
  j["saturation_residual"] = result.strategy_residual;
  j["support_warning"] = result.support_warning;
  j["solver"] = solver_to_json(result.solver);
  j["accuracy"] = accuracy_to_json(result.accuracy, renyi);
  return j;
}

Json report_for_oracle(const ProblemFile& problem, double value, const Measurement& measurement,
                       double wall_seconds) {
  Json j = report_common(problem, wall_seconds);
  j["task"] = "oracle";
  j["status"] = std::isinf(value) ? "infinite" : "ok";
  if (std::isinf(value)) {
    j["value"] = nullptr;
  } else {
    j["value"] = value;
  }
  j["budget"] = problem.budget;
  j["measurement"] = basis_to_json(measurement);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path);
  out << text << "\n";
}

namespace {

void check(VerifyOutcome* out, bool ok, const std::string& what) {
  if (!ok) {
    out->ok = false;
    out->failures.push_back(what);
  }
}

}  // namespace

VerifyOutcome verify_report(const Json& report) {
  VerifyOutcome out;
  if (!report.is_object() || report.value("format", "") != "mre-report-v1") {
    check(&out, false, "not an mre-report-v1 document");
    return out;
  }
  ProblemFile problem = ProblemFile::from_json(report.at("input"));
  check(&out, digest(report.at("input")) == report.value("input_digest", ""),
        "input digest mismatch");

  const std::string status = report.value("status", "");
  const std::string task = report.value("task", "");
  if (status != "ok") {
    // Nothing numeric to re-derive; re-check the support/infeasibility claim
    // for the plain-infinite state case.
    if (task == "states-renyi" || task == "states-relent") {
      check(&out, support_check(problem.rho, problem.sigma) == SupportStatus::Violated,
            "report claims an infinite value but the supports are compatible");
    }
    return out;
  }
  if (task == "oracle") return out;

  const double value = report.at("value").get<double>();
  const bool renyi = task == "states-renyi" || task == "channel-renyi";
  double alpha = 0.0;
  if (renyi) {
    RenyiOrder order = RenyiOrder::parse(problem.alpha);
    alpha = order.value();
  }

  CMat omega = json_to_matrix(report.at("omega"), "omega");
  CMat theta = json_to_matrix(report.at("theta"), "theta");

  CMat first, second;  // the pair scored by the measurement
  double objective = 0.0;
  if (task == "states-renyi" || task == "states-relent") {
    first = problem.rho;
    second = problem.sigma;
    if (problem.regularize > 0) {
      const int d = static_cast<int>(second.rows());
      second = hermitize((1 - problem.regularize) * second +
                         problem.regularize * second.trace().real() / d *
                             CMat::Identity(d, d));
    }
    if (renyi) {
      const int regime = RenyiOrder::parse(problem.alpha).regime();
      objective = regime == 0 ? alpha * (omega * first).trace().real() +
                                    (1 - alpha) * (theta * second).trace().real()
                              : alpha * (theta * first).trace().real() +
                                    (1 - alpha) * (omega * second).trace().real();
    } else {
      objective =
          (theta * first).trace().real() - (omega * second).trace().real() + 1.0;
    }
  } else {
    CMat rho_opt = json_to_matrix(report.at("rho_opt"), "rho_opt");
    first = sandwich_choi(rho_opt, problem.gamma_n, problem.dim_b);
    second = sandwich_choi(rho_opt, problem.gamma_m, problem.dim_b);
    if (renyi) {
      const int regime = RenyiOrder::parse(problem.alpha).regime();
      objective = regime == 0 ? alpha * (omega * problem.gamma_n).trace().real() +
                                    (1 - alpha) * (theta * problem.gamma_m).trace().real()
                              : alpha * (theta * problem.gamma_n).trace().real() +
                                    (1 - alpha) * (omega * problem.gamma_m).trace().real();
    } else {
      objective = (theta * problem.gamma_n).trace().real() -
                  (omega * problem.gamma_m).trace().real() + 1.0;
    }
  }

  double rederived = objective;
  if (renyi) {
    check(&out, objective > 0, "stored optimizers give a nonpositive quasi-entropy");
    if (objective > 0) rederived = std::log(objective) / (alpha - 1.0);
    const double quasi = report.value("quasi", 0.0);
    check(&out, std::abs(objective - quasi) <= 1e-8 * std::max(1.0, std::abs(quasi)),
          "objective recomputed from optimizers deviates from the stored quasi value");
  }
  check(&out, std::abs(rederived - value) <= 1e-8 * std::max(1.0, std::abs(value)),
        "objective recomputed from optimizers deviates from the stored value");

  Measurement meas = basis_from_json(report.at("measurement"));
  check(&out, meas.resolution_defect() <= 1e-8, "measurement does not resolve the identity");
  if (out.ok) {
    DivergenceTask dtask = renyi ? DivergenceTask(alpha) : DivergenceTask();
    const double classical = classical_divergence(induced(meas, first, second), dtask);
    const double resid = std::isinf(classical) ? std::numeric_limits<double>::infinity()
                                               : std::abs(classical - value);
    const double stated = report.value("saturation_residual", 0.0);
    check(&out, resid <= stated + 1e-7 * std::max(1.0, std::abs(value)),
          "saturation residual recomputed from the measurement exceeds the stated one");
  }
  return out;
}

}  // namespace mre
