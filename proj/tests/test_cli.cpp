#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with the given arguments; stderr is dropped.
Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" PWAFF_CLI "\" " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_CASE("partition of a fixture") {
  Run r = run("partition @example1 -n 5 --format json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["growth"]["cells"]["entries"].back()["value"] == 32);
  Run csv = run("partition @doubling -n 3 --format csv");
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("n,cells,max_mult\n1,2,", 0) == 0);
}

TEST_CASE("artifacts go to the output directory") {
  const auto dir = std::filesystem::temp_directory_path() / "pwaff_cli_out";
  std::filesystem::remove_all(dir);
  Run r = run("partition @example1 -n 3 --out " + dir.string());
  CHECK(r.code == 0);
  CHECK_FALSE(std::filesystem::is_empty(dir));
  std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes") {
  CHECK(run("").code == 4);
  CHECK(run("partition").code == 4);
  CHECK(run("partition @no-such-fixture").code == 4);
  CHECK(run("partition @example1 --format xml").code == 4);
  CHECK(run("estimate @doubling --eps-ladder -0.5").code == 4);
  CHECK(run("partition /no/such/file.json").code == 2);
  const std::string bad = write_temp("pwaff_bad_map.json", R"({"dim": 1,
    "ambient": {"constraints": [{"a": [1], "b": 1}, {"a": [-1], "b": 0}]},
    "pieces": [{"domain": {"constraints": [{"a": [1], "b": 1, "strict": true}, {"a": [-1], "b": 0, "strict": true}]},
                "A": [[1]], "b": ["1/2"]}]})");
  CHECK(run("partition " + bad).code == 2);
  CHECK(run("partition @doubling -n 12", "PWAFF_CELL_CAP=100").code == 3);
  CHECK(run("partition @doubling -n 12 --cell-cap 100").code == 3);
  CHECK(run("skew-bound @doubling").code == 2);
}

TEST_CASE("exported maps load back") {
  Run exp = run("catalog export example3");
  REQUIRE(exp.code == 0);
  const std::string path = write_temp("pwaff_example3.json", exp.out);
  Run a = run("partition " + path + " -n 4 --format json");
  Run b = run("partition @example3 -n 4 --format json");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  Run list = run("catalog list");
  CHECK(list.out.find("example1") != std::string::npos);
  CHECK(list.out.find("shift5") != std::string::npos);
}

TEST_CASE("verify reports success") {
  Run r = run("verify identity rotation --format json");
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j.size() == 2);
}

TEST_CASE("skew bounds of a shift") {
  Run r = run("skew-bound @shift3 -n 4 -m 3 --format json");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["lower"].get<double>() - std::log(3.0)) <= 1e-9);
  CHECK(std::abs(j["upper"].get<double>() - std::log(3.0)) <= 1e-9);
}

TEST_CASE("output does not depend on the thread count") {
  const std::string args = "estimate @doubling --samples 2000 --format json";
  Run one = run(args + " --threads 1");
  Run four = run(args + " --threads 4");
  REQUIRE(one.code == 0);
  CHECK(one.out == four.out);
  Run r1 = run("rates @example1 -n 6 --samples 300 --format json --threads 1");
  Run r3 = run("rates @example1 -n 6 --samples 300 --format json --threads 3");
  CHECK(r1.code == 0);
  CHECK(r1.out == r3.out);
}
