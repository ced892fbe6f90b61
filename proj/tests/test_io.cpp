#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include "doctest.h"
#include "mre/measured_states.hpp"
#include "mre/report.hpp"

using namespace mre;
namespace fs = std::filesystem;

namespace {

Json states_problem_json() {
  Json j;
  j["kind"] = "states";
  j["task"] = "renyi";
  j["alpha"] = "2";
  j["rho"] = Json::parse("[[[0.75,0],[0,0]],[[0,0],[0.25,0]]]");
  j["sigma"] = Json::parse("[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]");
  return j;
}

std::string write_temp(const Json& j, const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "mre_test_io";
  fs::create_directories(dir);
  const std::string path = (dir / name).string();
  std::ofstream out(path);
  out << j.dump(2);
  return path;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string cmd = std::string(MRE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string acc;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) acc.append(buf, n);
  const int rc = pclose(pipe);
  if (output) *output = acc;
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("problem parsing and diagnostics") {
  ProblemFile p = ProblemFile::from_json(states_problem_json());
  CHECK(p.kind == ProblemFile::Kind::States);
  CHECK(p.alpha == "2");
  CHECK(p.rho(0, 0).real() == doctest::Approx(0.75));

  Json bad = states_problem_json();
  bad["rho"][0][0] = Json::array({1.0});
  CHECK_THROWS_WITH_AS(static_cast<void>(ProblemFile::from_json(bad)),
                       doctest::Contains("rho"), InputError);

  Json no_alpha = states_problem_json();
  no_alpha.erase("alpha");
  CHECK_THROWS_AS(static_cast<void>(ProblemFile::from_json(no_alpha)), InputError);

  Json float_alpha = states_problem_json();
  float_alpha["alpha"] = 0.5;
  CHECK_THROWS_AS(static_cast<void>(ProblemFile::from_json(float_alpha)), InputError);
}

TEST_CASE("canonical serialization is stable and digest changes with content") {
  Json j = states_problem_json();
  const std::string a = canonical_dump(j);
  const std::string b = canonical_dump(Json::parse(a));
  CHECK(a == b);
  const std::string d1 = digest(j);
  j["alpha"] = "3";
  CHECK(digest(j) != d1);
}

TEST_CASE("report build and verify round trip") {
  ProblemFile p = ProblemFile::from_json(states_problem_json());
  auto r = measured_renyi_quasi(p.rho, p.sigma, RenyiOrder::parse(p.alpha));
  Json report = report_for_states(p, r, 0.01);
  VerifyOutcome v = verify_report(report);
  CHECK(v.ok);

  // Tampered value trips the objective recheck.
  Json tampered = report;
  tampered["value"] = tampered["value"].get<double>() + 0.01;
  CHECK(!verify_report(tampered).ok);

  // A zeroed measurement column breaks identity resolution.
  Json broken = report;
  for (auto& entry : broken["measurement"][0]) entry = Json::array({0.0, 0.0});
  CHECK(!verify_report(broken).ok);
}

TEST_CASE("cli: states tasks, exit codes, determinism") {
  const std::string prob = write_temp(states_problem_json(), "renyi.json");
  fs::path dir = fs::temp_directory_path() / "mre_test_io";

  std::string out1, out2;
  const std::string rpath = (dir / "r1.json").string();
  CHECK(run_cli("states-renyi --input " + prob + " --out " + rpath) == 0);
  CHECK(run_cli("verify --input " + rpath) == 0);

  // Determinism: identical runs agree except for the wall-time field.
  std::ifstream f1(rpath);
  std::string text1((std::istreambuf_iterator<char>(f1)), {});
  const std::string rpath2 = (dir / "r2.json").string();
  CHECK(run_cli("states-renyi --input " + prob + " --out " + rpath2) == 0);
  std::ifstream f2(rpath2);
  std::string text2((std::istreambuf_iterator<char>(f2)), {});
  auto strip_time = [](std::string s) {
    return std::regex_replace(s, std::regex("\"wall_time_seconds\":[^,}]*"), "");
  };
  CHECK(strip_time(text1) == strip_time(text2));

  // alpha = 1/2 with rho = sigma: value 0, exit 0.
  Json same = states_problem_json();
  same["alpha"] = "1/2";
  same["sigma"] = same["rho"];
  const std::string same_path = write_temp(same, "same.json");
  std::string out;
  CHECK(run_cli("states-renyi --input " + same_path, &out) == 0);
  Json rep = Json::parse(out);
  CHECK(std::abs(rep["value"].get<double>()) < 1e-6);

  // Orthogonal pure states: relent reports the infinite flag with exit 2.
  Json orth = states_problem_json();
  orth["task"] = "relent";
  orth.erase("alpha");
  orth["rho"] = Json::parse("[[[1,0],[0,0]],[[0,0],[0,0]]]");
  orth["sigma"] = Json::parse("[[[0,0],[0,0]],[[0,0],[1,0]]]");
  const std::string orth_path = write_temp(orth, "orth.json");
  CHECK(run_cli("states-relent --input " + orth_path, &out) == 2);
  CHECK(Json::parse(out)["status"] == "infinite");

  // Malformed input: exit 4.
  const std::string junk = (dir / "junk.json").string();
  std::ofstream(junk) << "{ not json";
  CHECK(run_cli("states-renyi --input " + junk) == 4);

  // Tampered report: exit 5.
  Json rep2 = Json::parse(text1);
  rep2["value"] = rep2["value"].get<double>() + 0.01;
  const std::string tampered = (dir / "tampered.json").string();
  std::ofstream(tampered) << rep2.dump();
  CHECK(run_cli("verify --input " + tampered) == 5);
}

TEST_CASE("cli: infeasible energy constraint exits 2") {
  Json j;
  j["kind"] = "channel";
  j["task"] = "relent";
  j["d_a"] = 2;
  j["d_b"] = 2;
  j["channel_n"] = Json{{"kraus", Json::array({Json::parse("[[[1,0],[0,0]],[[0,0],[1,0]]]")})}};
  j["channel_m"] = j["channel_n"];
  j["energy"] = Json{{"h", Json::parse("[[[0,0],[0,0]],[[0,0],[1,0]]]")}, {"e", -1.0}};
  const std::string path = write_temp(j, "ec.json");
  CHECK(run_cli("channel-relent --input " + path) == 2);
}

TEST_CASE("cli: oracle subcommand") {
  Json j = states_problem_json();
  j["budget"] = 60;
  j["seed"] = 7;
  const std::string path = write_temp(j, "oracle.json");
  std::string out;
  CHECK(run_cli("oracle --input " + path + " --budget 60 --seed 7", &out) == 0);
  Json rep = Json::parse(out);
  CHECK(std::abs(rep["value"].get<double>() - std::log(1.25)) < 1e-5);
}

TEST_CASE("cli: batch directory mode") {
  fs::path dir = fs::temp_directory_path() / "mre_batch_in";
  fs::path outdir = fs::temp_directory_path() / "mre_batch_out";
  fs::remove_all(dir);
  fs::remove_all(outdir);
  fs::create_directories(dir);
  Json a = states_problem_json();
  std::ofstream(dir / "a.json") << a.dump();
  Json b = states_problem_json();
  b["alpha"] = "1/2";
  std::ofstream(dir / "b.json") << b.dump();
  CHECK(run_cli("states-renyi --input " + dir.string() + " --out " + outdir.string()) == 0);
  CHECK(fs::exists(outdir / "a.json"));
  CHECK(fs::exists(outdir / "b.json"));
  CHECK(run_cli("verify --input " + (outdir / "a.json").string()) == 0);
}
