#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace ndstab;
using Catch::Approx;

namespace {

// Oscillating-lag family with the bounds left to the grid.
EquationSpec oscillating_unpinned(double r) {
  EquationSpec s = testing::load("oscillating_lag_family.json").with_param("r", r);
  s.overrides.clear();
  return s;
}

}  // namespace

TEST_CASE("summarize: oscillating lag family at r = 0.1") {
  const ParameterSummary s = summarize(testing::load("oscillating_lag_family.json").with_param("r", 0.1));
  CHECK(s.norm_a == 0.6);
  CHECK(s.inf_a == 0.4);
  CHECK(s.sigma == 1.0);
  CHECK(s.tau == 1.0);
  CHECK(s.delta == 1.0);
  CHECK(s.norm_b == Approx(0.1).epsilon(1e-15));
  CHECK(s.provenance.at("norm_b") == Provenance::AnalyticOverride);

  const ParameterSummary g = summarize(oscillating_unpinned(0.1));
  CHECK(g.norm_a == Approx(0.6).margin(1e-6));
  CHECK(g.inf_a == Approx(0.4).margin(1e-6));
  CHECK(g.sigma == Approx(1.0).margin(1e-6));
  CHECK(g.tau == Approx(1.0).margin(1e-12));
  CHECK(g.delta == Approx(1.0).margin(1e-12));
  CHECK(g.norm_b == Approx(0.1).margin(1e-7));
  CHECK(g.provenance.at("norm_b") == Provenance::GridEstimate);
  CHECK_FALSE(g.limit_tau.has_value());  // never estimated
}

TEST_CASE("summarize: sign-changing a") {
  const EquationSpec spec = testing::load("sign_changing_a.json");
  const ParameterSummary s = summarize(spec);
  CHECK(s.norm_a == 0.6);
  CHECK(s.norm_a_plus == 0.6);
  CHECK(s.norm_a_minus == 0.6);
  CHECK(s.norm_b == 0.15);
  CHECK(s.tau == 0.5);
  CHECK(s.sigma == 0.2);

  EquationSpec bare = spec;
  bare.overrides.clear();
  const ParameterSummary g = summarize(bare);
  CHECK(g.norm_a == Approx(0.6).margin(1e-6));
  CHECK(g.norm_a_plus == Approx(0.6).margin(1e-6));
  CHECK(g.norm_a_minus == Approx(0.6).margin(1e-6));
  CHECK(g.norm_b == Approx(0.15).margin(1e-6));
  CHECK(g.norm_a == std::max(g.norm_a_plus, g.norm_a_minus));
}

TEST_CASE("summarize: non-neutral, non-delayed equation") {
  const auto s = summarize(testing::spec(R"({"a":0,"b":1,"g":["t"],"h":["t"],"t0":0,"horizon":10})"), 1000);
  CHECK(s.norm_a == 0.0);
  CHECK(s.sigma == 0.0);
  CHECK(s.tau == 0.0);
  CHECK(s.delta == 0.0);
  CHECK(s.constant_delays);
}

TEST_CASE("summarize: non-positive b is an error") {
  CHECK_THROWS_AS(summarize(testing::spec(R"({"a":0,"b":["sin",["t"]],"g":["t"],"h":["t"],"t0":0,"horizon":10})"), 1000),
                  SummaryError);
}

TEST_CASE("positive and negative parts split a pointwise") {
  const EquationSpec s = testing::load("sign_changing_a.json");
  for (double t : s.grid(2001)) {
    const double a = s.a(t);
    const double plus = std::max(a, 0.0), minus = std::max(-a, 0.0);
    CHECK(a == plus - minus);
    CHECK(plus * minus == 0.0);
  }
}

TEST_CASE("grid refinement never shrinks sup estimates or raises inf estimates") {
  const EquationSpec s = oscillating_unpinned(0.2);
  std::size_t n = 101;
  ParameterSummary prev = summarize(s, n);
  for (int level = 0; level < 6; ++level) {
    n = 2 * n - 1;
    const ParameterSummary next = summarize(s, n);
    CHECK(next.norm_a >= prev.norm_a);
    CHECK(next.norm_b >= prev.norm_b);
    CHECK(next.sigma >= prev.sigma);
    CHECK(next.tau >= prev.tau);
    CHECK(next.inf_a <= prev.inf_a);
    CHECK(next.inf_b <= prev.inf_b);
    CHECK(next.delta <= prev.delta);
    prev = next;
  }
}

TEST_CASE("integral summary: pantograph") {
  const IntegralSummary is = integral_summary(testing::load("pantograph.json"));
  CHECK(is.tilde_tau == Approx(0.25 * std::log(2.0)).margin(1e-8));
  CHECK(is.tilde_delta == Approx(0.25 * std::log(2.0)).margin(1e-8));
  CHECK(is.tilde_sigma == Approx(0.25 * std::log(3.0)).margin(1e-8));
  CHECK(is.tilde_tau0 == (1.0 - 0.55) / std::numbers::e);
  CHECK(is.tilde_tau0 == Approx(0.1655457).margin(1e-7));
  CHECK(is.skipped > 0);  // early t reach below t0
  CHECK_FALSE(is.notes.empty());
}

TEST_CASE("integral summary: constant b gives c times the lag") {
  const auto s = testing::spec(R"({"a":0.3,"b":0.7,"g":["-",["t"],0.4],"h":["-",["t"],1.5],"t0":0,"horizon":30})");
  const ParameterSummary ps = summarize(s, 1000);
  const IntegralSummary is = integral_summary(s);
  CHECK(is.tilde_tau == Approx(0.7 * ps.tau).margin(1e-10));
  CHECK(is.tilde_delta == Approx(0.7 * ps.delta).margin(1e-10));
  CHECK(is.tilde_sigma == Approx(0.7 * ps.sigma).margin(1e-10));
}

TEST_CASE("integral summary: nothing to integrate is an error") {
  // h(t) stays below t0 on the whole window.
  const auto s = testing::spec(R"({"a":0,"b":1,"g":["t"],"h":["-",["t"],50],"t0":0,"horizon":10})");
  CHECK_THROWS_AS(integral_summary(s), QuadratureError);
}

TEST_CASE("delay-integral limsup estimate") {
  const EquationSpec s = testing::load("constant_delay_family.json").with_param("r", 1.0);
  const double est = limsup_delay_integral(s, std::numbers::pi, 4096);
  CHECK(est == Approx(0.9 * std::numbers::pi + 0.2).margin(1e-4));
}

TEST_CASE("pairwise sum and Simpson") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  std::vector<double> w(v.rbegin(), v.rend());
  CHECK(pairwise_sum(v) == Approx(pairwise_sum(w)).epsilon(1e-15));
  CHECK(simpson([](double x) { return x * x * x - x; }, 0.0, 2.0, 2) == Approx(2.0).epsilon(1e-14));
  CHECK(simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 2048) == Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
}

TEST_CASE("summary JSON carries provenance") {
  const json j = to_json(summarize(testing::load("pantograph.json")));
  CHECK(j["provenance"]["norm_a"] == "analytic-override");
  CHECK(j["provenance"]["tau"] == "grid-estimate");
  CHECK(j["limit_tau"].is_null());
}
