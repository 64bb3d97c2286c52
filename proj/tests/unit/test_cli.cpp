#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ndstab/cli.hpp"
#include "support.hpp"

using namespace ndstab;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ndstab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("check --json on the variable neutral lag") {
  const Result r = run({"check", testing::corpus("variable_neutral_lag.json"), "--alpha", "auto", "--json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  bool found = false;
  for (const auto& v : j["verdicts"]) {
    if (v["criterion"] != "limit_delay") continue;
    found = true;
    CHECK(v["satisfied"] == true);
    const double alpha = v["alpha"];
    CHECK(alpha > 0.1 * std::numbers::e);
    CHECK(alpha < 0.35 * std::numbers::e);
  }
  CHECK(found);
  CHECK(j.contains("series_bound_alpha_interval"));
}

TEST_CASE("check: plain text and a fixed alpha") {
  const Result r = run({"check", testing::corpus("pantograph.json"), "--alpha", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("integral_delay: satisfied") != std::string::npos);
  CHECK(run({"check", testing::corpus("pantograph.json"), "--alpha", "1.5"}).code == 2);
  CHECK(run({"check", testing::corpus("pantograph.json"), "--alpha", "x"}).code == 2);
}

TEST_CASE("examples --id 5 prints the integral left-hand side") {
  const Result r = run({"examples", "--id", "5", "--no-simulate"});
  CHECK(r.code == 0);
  CHECK(r.out.find("0.50897") != std::string::npos);
  CHECK(r.out.find("MISMATCH (waived)") != std::string::npos);
}

TEST_CASE("examples --all --json") {
  const Result r = run({"examples", "--all", "--no-simulate", "--json"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.size() == 5);
  for (const auto& ex : j) CHECK(ex["ok"] == true);
}

TEST_CASE("bad input exits with 2") {
  CHECK(run({"check", "missing.json"}).code == 2);
  CHECK(run({"check", testing::corpus("pantograph.json"), "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"examples"}).code == 2);
  CHECK(run({"examples", "--id", "9"}).code == 2);
  CHECK(run({"simulate", testing::corpus("pantograph.json"), "--history", "cubic", "--t-end", "5"}).code == 2);

  const auto bad = scratch("ndstab_invalid.json");
  std::ofstream(bad) << R"({"a":1.2,"b":1,"g":["-",["t"],1],"h":["-",["t"],1],"t0":0,"horizon":10})";
  const Result r = run({"check", bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("assumption failed") != std::string::npos);
}

TEST_CASE("--help matches the golden file") {
  const Result r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out == slurp(std::filesystem::path(NDSTAB_GOLDEN_DIR) / "help.txt"));
  CHECK(run({"sweep", "--help"}).out.find("--alpha-grid") != std::string::npos);
}

TEST_CASE("seeded simulation is repeatable") {
  const std::vector<std::string> args = {"--seed", "7", "simulate", testing::corpus("oscillating_lag_family.json"),
                                         "--history", "seeded", "--t-end", "5", "--stride", "100"};
  const Result a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.starts_with("t,x,y\n"));
  auto other = args;
  other[1] = "8";
  CHECK(run(other).out != a.out);
}

TEST_CASE("simulate --out --json") {
  const auto path = scratch("ndstab_sim.csv");
  const Result r = run({"simulate", testing::corpus("variable_neutral_lag.json"), "--t-end", "60", "--step", "1e-2",
                        "--out", path.string(), "--json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["nodes"] > 0);
  CHECK(slurp(path).starts_with("t,x,y\n"));
}

TEST_CASE("sweep writes its CSV") {
  const auto path = scratch("ndstab_sweep.csv");
  std::filesystem::remove(path);
  const Result r = run({"sweep", testing::corpus("oscillating_lag_family.json"), "--alpha-grid", "0:1:0.5", "--r-grid",
                        "0:0.2:0.1", "--out", path.string(), "--threads", "2"});
  CHECK(r.code == 0);
  const std::string csv = slurp(path);
  CHECK(csv.starts_with("alpha,r_lower,r_upper,r,feasible\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 3);
  CHECK(run({"sweep", testing::corpus("variable_neutral_lag.json"), "--alpha-grid", "0:1:0.5", "--out", path.string()})
            .code == 2);
}

TEST_CASE("compare and fundamental") {
  const Result c = run({"compare", testing::corpus("constant_delay_family.json"), "--json"});
  CHECK(c.code == 0);
  CHECK(json::parse(c.out).size() == 4);
  const Result f = run({"fundamental", testing::corpus("variable_neutral_lag.json"), "--s", "1", "--t-end", "20",
                        "--json"});
  CHECK(f.code == 0);
  CHECK(json::parse(f.out)["positive"] == true);
}
