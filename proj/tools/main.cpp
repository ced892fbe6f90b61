// Command-line driver: computes measured (Renyi) relative entropies of
// states and channels from JSON problem files and emits JSON reports.
//
// Exit codes: 0 success; 2 infinite divergence or infeasible constraint
// (report still written when possible); 3 numerical failure; 4 malformed
// input; 5 verification mismatch.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mre/measured_channels.hpp"
#include "mre/measured_states.hpp"
#include "mre/oracle.hpp"
#include "mre/report.hpp"

namespace fs = std::filesystem;
using namespace mre;

namespace {

struct CommonFlags {
  std::string input;
  std::string out;
  std::string alpha;
  std::optional<double> eps;
  std::optional<int> m, k;
  std::optional<double> gap_tol, feas_tol;
  std::optional<uint64_t> seed;
  std::optional<double> regularize;
  std::optional<int> budget;

  void attach(CLI::App* cmd, bool needs_alpha) {
    cmd->add_option("--input", input, "problem file (or directory for batch mode)")->required();
    cmd->add_option("--out", out, "report path (or directory in batch mode)");
    if (needs_alpha) cmd->add_option("--alpha", alpha, "Renyi order as an exact rational p/q");
    cmd->add_option("--eps", eps, "target accuracy for the relative entropy");
    cmd->add_option("--m", m, "quadrature size override");
    cmd->add_option("--k", k, "square-root depth override");
    cmd->add_option("--gap-tol", gap_tol, "solver complementarity gap tolerance");
    cmd->add_option("--feas-tol", feas_tol, "solver feasibility tolerance");
    cmd->add_option("--seed", seed, "seed echoed into reports and used by oracle search");
    cmd->add_option("--regularize", regularize, "sigma regularization delta");
    cmd->add_option("--budget", budget, "random bases for the oracle search");
  }

  void apply(ProblemFile* p) const {
    if (!alpha.empty()) p->alpha = alpha;
    if (eps) p->eps = eps;
    if (m || k) {
      if (!(m && k)) throw InputError("--m and --k must be given together");
      p->mk = std::make_pair(*m, *k);
    }
    if (gap_tol) p->solver.gap_tol = *gap_tol;
    if (feas_tol) p->solver.feas_tol = *feas_tol;
    if (seed) p->seed = *seed;
    if (regularize) p->regularize = *regularize;
    if (budget) p->budget = *budget;
  }
};

int exit_code_for(const Json& report) {
  const std::string status = report.value("status", "ok");
  return status == "ok" ? 0 : 2;
}

StateOptions state_options(const ProblemFile& p) {
  StateOptions o;
  o.solver = p.solver;
  o.regularize_delta = p.regularize;
  o.eps = p.eps;
  o.mk = p.mk;
  return o;
}

ChannelOptions channel_options(const ProblemFile& p) {
  ChannelOptions o;
  o.solver = p.solver;
  o.eps = p.eps;
  o.mk = p.mk;
  return o;
}

Json run_one(const std::string& command, const ProblemFile& p) {
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  if (command == "states-renyi" || command == "states-relent") {
    if (p.kind != ProblemFile::Kind::States)
      throw InputError(command + ": problem file is not a states problem");
    DivergenceResult r =
        command == "states-renyi"
            ? measured_renyi_quasi(p.rho, p.sigma, RenyiOrder::parse(p.alpha), state_options(p))
            : measured_relative_entropy(p.rho, p.sigma, state_options(p));
    return report_for_states(p, r, elapsed());
  }
  if (command == "channel-renyi" || command == "channel-relent") {
    if (p.kind != ProblemFile::Kind::Channel)
      throw InputError(command + ": problem file is not a channel problem");
    ChannelPair pair = ChannelPair::from_choi(p.gamma_n, p.gamma_m, p.dim_a, p.dim_b);
    std::optional<EnergyConstraint> ec;
    if (p.energy) ec = EnergyConstraint{p.energy->first, p.energy->second};
    ChannelDivergenceResult r =
        command == "channel-renyi"
            ? channel_measured_renyi(pair, RenyiOrder::parse(p.alpha), ec, channel_options(p))
            : channel_measured_relent(pair, ec, channel_options(p));
    return report_for_channel(p, r, elapsed());
  }
  if (command == "oracle") {
    if (p.kind != ProblemFile::Kind::States)
      throw InputError("oracle: only states problems are searchable");
    DivergenceTask task;
    if (p.task == ProblemFile::Task::Renyi) task = RenyiOrder::parse(p.alpha).value();
    BruteForceResult r = brute_force_measured(p.rho, p.sigma, task, p.budget, p.seed);
    return report_for_oracle(p, r.value, r.measurement, elapsed());
  }
  throw InputError("unknown command: " + command);
}

int process_file(const std::string& command, const CommonFlags& flags,
                 const std::string& in_path, const std::string& out_path) {
  ProblemFile problem;
  try {
    problem = ProblemFile::load(in_path);
    flags.apply(&problem);
  } catch (const InputError& e) {
    std::fprintf(stderr, "%s: %s\n", in_path.c_str(), e.what());
    return 4;
  }
  Json report;
  try {
    report = run_one(command, problem);
  } catch (const InfeasibleConstraintError& e) {
    std::fprintf(stderr, "%s: infeasible constraint: %s\n", in_path.c_str(), e.what());
    return 2;
  } catch (const InputError& e) {
    std::fprintf(stderr, "%s: %s\n", in_path.c_str(), e.what());
    return 4;
  } catch (const AccuracyError& e) {
    std::fprintf(stderr, "%s: %s\n", in_path.c_str(), e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "%s: %s\n", in_path.c_str(), e.what());
    return 3;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "%s: %s\n", in_path.c_str(), e.what());
    return 4;
  }
  const std::string text = canonical_dump(report);
  if (out_path.empty()) {
    std::printf("%s\n", text.c_str());
  } else {
    write_text(out_path, text);
  }
  return exit_code_for(report);
}

int run_command(const std::string& command, const CommonFlags& flags) {
  if (fs::is_directory(flags.input)) {
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(flags.input))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) {
      std::fprintf(stderr, "batch: no .json problems under %s\n", flags.input.c_str());
      return 4;
    }
    if (flags.out.empty()) {
      std::fprintf(stderr, "batch: --out DIRECTORY is required\n");
      return 4;
    }
    fs::create_directories(flags.out);
    std::vector<std::future<int>> futures;
    for (const fs::path& in : inputs) {
      const std::string out = (fs::path(flags.out) / in.filename()).string();
      futures.push_back(std::async(std::launch::async, [&, in, out] {
        return process_file(command, flags, in.string(), out);
      }));
    }
    int rc = 0;
    for (auto& f : futures) rc = std::max(rc, f.get());
    return rc;
  }
  return process_file(command, flags, flags.input, flags.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measured relative entropies of quantum states and channels"};
  app.require_subcommand(1);

  std::vector<std::pair<std::string, bool>> commands = {{"states-renyi", true},
                                                        {"states-relent", false},
                                                        {"channel-renyi", true},
                                                        {"channel-relent", false},
                                                        {"oracle", true}};
  std::map<std::string, CommonFlags> flags;
  for (auto& [name, needs_alpha] : commands) {
    CLI::App* cmd = app.add_subcommand(name);
    flags[name].attach(cmd, needs_alpha);
  }
  CLI::App* verify = app.add_subcommand("verify", "re-check a report file");
  std::string verify_input;
  verify->add_option("--input", verify_input, "report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 4 : 0;
  }

  try {
    if (verify->parsed()) {
      std::ifstream in(verify_input);
      if (!in) {
        std::fprintf(stderr, "cannot open report: %s\n", verify_input.c_str());
        return 4;
      }
      Json report;
      try {
        in >> report;
      } catch (const std::exception& e) {
        std::fprintf(stderr, "report is not valid JSON: %s\n", e.what());
        return 4;
      }
      VerifyOutcome outcome = verify_report(report);
      if (outcome.ok) {
        std::printf("verify: ok\n");
        return 0;
      }
      for (const std::string& f : outcome.failures)
        std::fprintf(stderr, "verify: %s\n", f.c_str());
      return 5;
    }
    for (auto& [name, unused] : commands)
      if (app.get_subcommand(name)->parsed()) return run_command(name, flags[name]);
  } catch (const InputError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  }
  return 4;
}
