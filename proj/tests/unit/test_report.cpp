#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace ndstab;
using Catch::Approx;

namespace {

const double e = std::numbers::e;

ParameterSummary oscillating_unit() { return unit_summary(testing::load("oscillating_lag_family.json"), "r"); }

}  // namespace

TEST_CASE("sweep: oscillating family band") {
  const ParameterSummary unit = oscillating_unit();
  const double alphas[] = {0.0, 0.5, 1.0};
  const auto rows = sweep_alpha_r(unit, alphas);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].r_lower == 0.0);
  CHECK(rows[0].r_upper == Approx(0.4 * 4.0 / 13.0).margin(1e-12));
  CHECK(rows[1].r_lower == Approx(0.2 / e).margin(1e-12));
  CHECK(rows[1].r_upper == Approx(1.6 / 13.0 * (1.0 + 0.5 / e)).margin(1e-12));
  CHECK(rows[2].r_lower == Approx(0.147152).margin(1e-6));
  CHECK(rows[2].r_upper == Approx(0.168354).margin(1e-6));
}

TEST_CASE("sweep: b must be linear in the parameter") {
  const auto s = testing::spec(R"({"a":0.5,"b":["*",["param","r"],["param","r"]],"g":["-",["t"],1],
                                   "h":["-",["t"],1],"t0":0,"horizon":20,"params":{"r":0.3}})");
  CHECK_THROWS_AS(unit_summary(s, "r", 1000), SpecError);
  CHECK_THROWS_AS(unit_summary(s, "q", 1000), SpecError);
}

TEST_CASE("sweep: 101 alphas are fast") {
  const ParameterSummary unit = oscillating_unit();
  const auto alphas = parse_range("0:1:0.01");
  REQUIRE(alphas.size() == 101);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = sweep_alpha_r(unit, alphas);
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  CHECK(rows.size() == 101);
  CHECK(ms < 100.0);
}

TEST_CASE("sweep CSV does not depend on the thread count") {
  const ParameterSummary unit = oscillating_unit();
  const auto alphas = parse_range("0:1:0.05");
  const auto rs = parse_range("0:0.3:0.01");
  std::ostringstream one, four;
  write_sweep_csv(one, sweep_alpha_r(unit, alphas, rs, 1));
  write_sweep_csv(four, sweep_alpha_r(unit, alphas, rs, 4));
  CHECK(one.str() == four.str());
  CHECK(one.str().starts_with("alpha,r_lower,r_upper,r,feasible\n0,0,"));

  std::ostringstream bare;
  write_sweep_csv(bare, sweep_alpha_r(unit, alphas));
  CHECK(bare.str().starts_with("alpha,r_lower,r_upper\n"));
}

TEST_CASE("sweep cells agree with the pointwise series check") {
  const ParameterSummary unit = oscillating_unit();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int feasible = 0;
  for (int i = 0; i < 1000; ++i) {
    const double alpha = u(rng), r = 0.3 * u(rng);
    const double rs[] = {r};
    const SweepRow row = sweep_row(unit, alpha, rs);
    const CriterionVerdict v = check_series_bound(scaled_summary(unit, r), alpha);
    CHECK(row.cells[0].feasible == (v.applicable && v.satisfied));
    if (row.cells[0].feasible) {
      ++feasible;
      CHECK(r >= row.r_lower - 1e-12);
      CHECK(r < row.r_upper);
    }
  }
  CHECK(feasible > 0);
}

TEST_CASE("parse_range") {
  CHECK(parse_range("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(parse_range("2:2:1") == std::vector<double>{2.0});
  CHECK(parse_range("0:1:0.1").size() == 11);
  CHECK_THROWS_AS(parse_range("0:1"), SpecError);
  CHECK_THROWS_AS(parse_range("0:1:0"), SpecError);
  CHECK_THROWS_AS(parse_range("1:0:0.1"), SpecError);
  CHECK_THROWS_AS(parse_range("a:1:0.1"), SpecError);
}

TEST_CASE("worked examples: mismatches are exactly the waived ones") {
  const std::filesystem::path dir = NDSTAB_DEFAULT_CORPUS;
  ReproductionOptions opt;
  opt.simulate = false;

  const auto bare = reproduce_examples(dir, {}, opt);
  REQUIRE(bare.size() == 5);
  Waivers mismatched;
  for (const auto& r : bare) {
    for (const auto& q : r.quantities) {
      if (!q.match) mismatched.emplace(r.id, q.label);
    }
  }
  CHECK(mismatched.size() == 5);
  CHECK(mismatched.count({3, "no-lag series test: upper bound"}));
  CHECK(mismatched.count({3, "no-lag series test: lower bound"}));
  CHECK(mismatched.count({4, "sign-split right-hand side at alpha = 0.45"}));
  CHECK(mismatched.count({5, "integral test right-hand side at alpha = 1"}));
  CHECK_FALSE(bare[2].ok());
  CHECK(bare[0].ok());

  const Waivers bundled = load_waivers(dir / "waivers.json");
  CHECK(bundled == mismatched);
  for (const auto& r : reproduce_examples(dir, bundled, opt)) CHECK(r.ok());
}

TEST_CASE("worked examples: derived replacements") {
  const std::filesystem::path dir = NDSTAB_DEFAULT_CORPUS;
  ReproductionOptions opt;
  opt.simulate = false;
  auto find = [](const ExampleReport& r, const std::string& label) -> const QuotedQuantity& {
    for (const auto& q : r.quantities) {
      if (q.label == label) return q;
    }
    FAIL("no quantity " << label);
    throw 0;
  };
  const ExampleReport four = reproduce_example(4, dir, {}, opt);
  CHECK(find(four, "sign-split right-hand side at alpha = 0.45").derived == Approx(0.4 + 0.4 / e * 0.45).margin(1e-12));
  CHECK(find(four, "sign-split left-hand side").derived == Approx(0.4125).margin(1e-12));
  const ExampleReport five = reproduce_example(5, dir, {}, opt);
  CHECK(find(five, "integral test right-hand side at alpha = 1").derived == Approx(0.45 * (1 + 1 / e)).margin(1e-12));
  CHECK(find(five, "integral test left-hand side").derived == Approx(0.508974).margin(1e-4));
  const ExampleReport three = reproduce_example(3, dir, {}, opt);
  CHECK(find(three, "no-lag series test: upper bound").derived == Approx(0.0797373).margin(1e-6));

  CHECK_THROWS_AS(reproduce_example(6, dir, {}, opt), SpecError);
  CHECK(to_json(five)["quantities"].size() == five.quantities.size());
}

TEST_CASE("worked example with simulation") {
  ReproductionOptions opt;
  opt.span = 200.0;
  const ExampleReport r = reproduce_example(1, NDSTAB_DEFAULT_CORPUS, {}, opt);
  REQUIRE(r.simulation.has_value());
  CHECK(r.simulation->verdict == DecayVerdict::Decaying);
  std::ostringstream os;
  print_example(os, r);
  CHECK(os.str().find("simulation (history const:1") != std::string::npos);
}

TEST_CASE("baseline comparison") {
  const EquationSpec three = testing::load("constant_delay_family.json");
  const auto rows = compare_baselines(three, summarize(three), std::string("r"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == "baseline_yu");
  CHECK(rows[0].upper == Approx(0.002002).margin(1e-6));
  CHECK(rows[1].method == "baseline_tang_zou");
  CHECK(rows[1].upper == Approx(std::sqrt(0.004)).margin(1e-6));
  CHECK(rows[0].value == Approx(0.05 * (0.9 * std::numbers::pi + 0.2)).margin(1e-9));
  for (const auto& r : rows) CHECK(to_json(r)["method"] == r.method);

  const EquationSpec one = testing::load("variable_neutral_lag.json");
  for (const auto& r : compare_baselines(one, summarize(one))) {
    if (r.method.starts_with("baseline")) CHECK_FALSE(r.applicable);
  }

  ParameterSummary ode = testing::summary(0.0, 0.0, 1.0, 0.0, 1.0, 1.0);
  ode.constant_delays = true;
  CHECK(yu_threshold(0.0) == Approx(1.5));
  CHECK(check_baseline_yu(ode, 1.4).satisfied);
}
