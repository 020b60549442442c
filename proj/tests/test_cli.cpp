#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string binary_path() {
  const char* p = std::getenv("SEPSTEIN_BIN");
  REQUIRE_MESSAGE(p != nullptr, "SEPSTEIN_BIN must point at the command-line binary");
  return p;
}

RunResult run(const std::string& args) {
  std::string cmd = binary_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("measure command emits a labeled json record") {
  auto r = run("measure maxent:d=2 robustness --model ppt");
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["value_bits"].get<double>() - 1.0) < 1e-6);
  CHECK(j["model"] == "ppt");
  CHECK(j.contains("direction"));
}

TEST_CASE("measure command closed form on the antisymmetric family") {
  auto r = run("measure antisym:d=5 ekappa-tilde --model werner");
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["value_bits"].get<double>() - std::log2(7.0 / 5.0)) < 1e-6);
}

TEST_CASE("csv format") {
  auto r = run("measure maxent:d=2 ekappa --format csv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("measure,value_bits") != std::string::npos);
  CHECK(r.out.find("ekappa,1") != std::string::npos);
}

TEST_CASE("parse errors exit with the usage code and a byte offset") {
  CHECK(run("measure maxint:d=2 robustness").exit_code == 2);
  CHECK(run("measure maxent:d=x robustness").exit_code == 2);
  CHECK(run("measure isotropic:d=3,p=1.5 robustness").exit_code == 2);
  CHECK(run("measure maxent:d=2 nosuchmeasure").exit_code == 2);
  CHECK(run("measure file:/does/not/exist robustness").exit_code == 2);
  CHECK(run("nosuchcommand").exit_code == 2);
  CHECK(run("measure maxent:d=40 robustness --cap-dim 256").exit_code == 2);
}

TEST_CASE("distillation bounds command") {
  auto r = run("distill-bounds maxent:d=2 --eps 0 --delta 0 --format csv");
  REQUIRE(r.exit_code == 0);
  // lower,upper,eps,delta,model
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  CHECK(header == "lower_bits,upper_bits,eps,delta,model");
  double lower = 0, upper = 0;
  char c;
  std::istringstream fields(row);
  fields >> lower >> c >> upper;
  CHECK(lower == doctest::Approx(0.0));
  CHECK(upper == doctest::Approx(std::log2(1.5) + 1.0).epsilon(1e-6));
}

TEST_CASE("dilution bounds command marks the upper side unavailable at delta zero") {
  auto r = run("dilute-bounds maxent:d=2 --eps 0 --delta 0");
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["has_upper"] == false);
  CHECK(std::abs(j["lower_bits"].get<double>() - 1.0) < 1e-6);

  auto r1 = run("dilute-bounds maxent:d=2 --eps 0 --delta 1");
  REQUIRE(r1.exit_code == 0);
  auto j1 = nlohmann::json::parse(r1.out);
  CHECK(j1["has_upper"] == true);
  CHECK(std::abs(j1["upper_bits"].get<double>() - 2.0) < 1e-6);
}

TEST_CASE("antisym table command") {
  auto r = run("antisym-table --d-min 2 --d-max 20 --format csv");
  REQUIRE(r.exit_code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);   // header
  int rows = 0, first_gap = 0;
  while (std::getline(is, line)) {
    ++rows;
    if (first_gap == 0 && line.find("true") != std::string::npos)
      first_gap = std::stoi(line.substr(0, line.find(',')));
  }
  CHECK(rows == 19);
  CHECK(first_gap == 13);

  CHECK(run("antisym-table --d-min 5 --d-max 3").exit_code == 2);

  // json mirror round-trips
  auto rj = run("antisym-table --d-min 3 --d-max 4");
  REQUIRE(rj.exit_code == 0);
  auto j = nlohmann::json::parse(rj.out);
  CHECK(j["complete"] == true);
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][0]["d"] == 3);
}

TEST_CASE("output is deterministic") {
  auto a = run("measure werner:d=3,p=0.8 ekappa-tilde --model werner");
  auto b = run("measure werner:d=3,p=0.8 ekappa-tilde --model werner");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("quick selftest passes under the default seed") {
  auto r = run("selftest --level quick");
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.contains("suites"));
}
