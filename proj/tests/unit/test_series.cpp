#include <cmath>
#include <random>

#include "support.hpp"

using namespace ndstab;
using Catch::Approx;

namespace {

EquationSpec constant_shift(double a, const char* g) {
  return testing::spec(std::string(R"({"a":)") + std::to_string(a) + R"(,"b":1,"g":)" + g +
                       R"(,"h":["-",["t"],1],"t0":0,"horizon":50})");
}

SampledFunction ones(double t0, double t1, std::size_t n) {
  return SampledFunction::sample([](double) { return 1.0; }, t0, (t1 - t0) / static_cast<double>(n - 1), n);
}

}  // namespace

TEST_CASE("iterated delay") {
  const auto p = testing::spec(R"({"a":0.5,"b":1,"g":["/",["t"],3],"h":["t"],"t0":0,"horizon":100})");
  CHECK(iterated_delay(p, 9.0, 2) == Approx(1.0).epsilon(1e-15));
  CHECK(iterated_delay(p, 9.0, 0) == 9.0);
  const auto c = constant_shift(0.5, R"(["-",["t"],0.3])");
  for (std::size_t n : {1u, 4u, 10u}) CHECK(10.0 - iterated_delay(c, 10.0, n) == Approx(0.3 * n).epsilon(1e-12));
  CHECK_THROWS_AS(iterated_delay(c, 1.0, 10), DomainError);
}

TEST_CASE("delay chain bounds") {
  const EquationSpec spec = testing::load("variable_neutral_lag.json");
  const ParameterSummary s = summarize(spec);
  const ChainBound cb = delay_chain_bounds(spec, s, 10.0, 3);
  CHECK(cb.lower == Approx(0.14));
  CHECK(cb.upper == Approx(0.74));
  CHECK(cb.value >= 0.14);
  CHECK(cb.value <= 0.74);
  CHECK(delay_chain_bounds(spec, s, 10.0, 0).value == Approx(0.14));

  const auto c = testing::spec(R"({"a":0.5,"b":1,"g":["-",["t"],0.3],"h":["-",["t"],0.7],"t0":0,"horizon":50})");
  const ParameterSummary cs = summarize(c, 1000);
  CHECK(delay_chain_bounds(c, cs, 20.0, 5).value == Approx(5 * 0.3 + 0.7).epsilon(1e-12));

  ParameterSummary wrong = cs;
  wrong.tau = 0.1;
  CHECK_THROWS_AS(delay_chain_bounds(c, wrong, 20.0, 0), InvariantViolation);
}

TEST_CASE("neutral shift operator") {
  const auto same = constant_shift(0.5, R"(["t"])");
  const SampledFunction y = ones(0.0, 10.0, 101);
  const SampledFunction sy = apply_S(same, y, 0.0);
  for (double v : sy.values) CHECK(v == 0.5);

  // g(t) = t - 2: zero while g(t) < t0
  const auto shifted = constant_shift(0.5, R"(["-",["t"],2])");
  const SampledFunction ramp = SampledFunction::sample([](double t) { return t; }, 0.0, 0.1, 101);
  const SampledFunction sr = apply_S(shifted, ramp, 0.0);
  for (std::size_t i = 0; i < sr.values.size(); ++i) {
    const double t = sr.time(i);
    const double expected = t - 2.0 >= 0.0 ? 0.5 * (t - 2.0) : 0.0;
    CHECK(sr.values[i] == Approx(expected).margin(1e-12));
  }
}

TEST_CASE("Neumann inverse: geometric series") {
  const auto same = constant_shift(0.5, R"(["t"])");
  const auto [x, cert] = neumann_inverse(same, ones(0.0, 10.0, 101), 1e-12);
  for (double v : x.values) CHECK(v == Approx(2.0).margin(1e-12));
  CHECK(cert.tail_bound <= 1e-12);
  CHECK(std::pow(0.5, cert.terms - 1) * 2.0 > 1e-12);  // minimal

  const auto six = constant_shift(0.6, R"(["t"])");
  CHECK(neumann_inverse(six, ones(0.0, 10.0, 11), 1e-12).second.terms == 56);
}

TEST_CASE("Neumann inverse undoes E - S") {
  const EquationSpec spec = testing::load("variable_neutral_lag.json");
  const SampledFunction y = SampledFunction::sample([](double t) { return std::sin(0.7 * t) + 0.3; }, 0.0, 0.01, 2001);
  const auto [x, cert] = neumann_inverse(spec, y, 1e-12);
  const SampledFunction sx = apply_S(spec, x, 0.0);
  for (std::size_t i = 0; i < y.values.size(); ++i) CHECK(x.values[i] - sx.values[i] == Approx(y.values[i]).margin(1e-11));
}

TEST_CASE("Neumann bound on random coefficients, delays and data") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tol = 1e-10;
  for (int trial = 0; trial < 200; ++trial) {
    const double amp = 0.95 * u(rng), freq = 3.0 * u(rng), lag = 2.0 * u(rng), lag_amp = u(rng);
    EquationSpec s;
    s.a = amp * Expr::cos(freq * Expr::time());
    s.b = Expr::constant(1.0);
    s.g = Expr::time() - (Expr::constant(lag) + lag_amp * Expr::abs(Expr::sin(Expr::time())));
    s.h = Expr::time();
    s.t0 = 0.0;
    s.horizon = 20.0;
    const double c1 = u(rng), c2 = 5 * u(rng);
    const SampledFunction y =
        SampledFunction::sample([&](double t) { return std::cos(c2 * t) * c1 + 0.2; }, 0.0, 0.02, 1001);
    const auto [x, cert] = neumann_inverse(s, y, tol);
    const double A = NeutralShift(s, y, 0.0).norm();
    CHECK(x.sup_norm() <= y.sup_norm() / (1.0 - A) + tol);
  }
}

TEST_CASE("series coefficient: constant a and b") {
  const auto c = testing::spec(R"({"a":0.5,"b":1,"g":["-",["t"],0.1],"h":["-",["t"],0.1],"t0":0,"horizon":50})");
  const ParameterSummary s = summarize(c, 1000);
  const auto [value, cert] = big_B(c, s, 40.0, 1e-12);
  CHECK(value == Approx(2.0).margin(1e-12));
}

TEST_CASE("series coefficient: oscillating family stays in its band") {
  const EquationSpec spec = testing::load("oscillating_lag_family.json").with_param("r", 0.1);
  const ParameterSummary s = summarize(spec);
  const auto [value, cert] = big_B(spec.resolved(), s, 20.0, 1e-10);
  CHECK(value >= 0.08 / 0.6);
  CHECK(value <= 0.25);
  CHECK(cert.tail_bound <= 1e-10);
}

TEST_CASE("series coefficient band holds on every bounded-delay example with a > 0") {
  for (const char* f : {"variable_neutral_lag.json", "oscillating_lag_family.json", "constant_delay_family.json"}) {
    const EquationSpec spec = testing::load(f).resolved();
    const ParameterSummary s = summarize(spec);
    for (double t = spec.t0; t <= spec.horizon; t += 0.37) {
      double v = 0;
      REQUIRE_NOTHROW(v = big_B(spec, s, t, 1e-10).first);
      CHECK(v >= s.inf_b / (1.0 - s.inf_a) - 1e-10);
      CHECK(v <= s.norm_b / (1.0 - s.norm_a) + 1e-10);
    }
  }
}

TEST_CASE("truncation certificate is sound") {
  const EquationSpec spec = testing::load("oscillating_lag_family.json").resolved();
  const ParameterSummary s = summarize(spec);
  for (double tol : {1e-3, 1e-6}) {
    for (double t : {150.0, 250.0, 399.0}) {
      const auto [coarse, cert] = big_B(spec, s, t, tol);
      REQUIRE_FALSE(cert.exact_tail);
      // ten more terms: tolerance shrunk by |a|^10
      const auto [fine, cert2] = big_B(spec, s, t, tol * std::pow(s.norm_a, 10.0) * 0.999);
      CHECK(cert2.terms >= cert.terms + 10);
      CHECK(std::fabs(fine - coarse) < cert.tail_bound);
    }
  }
}

TEST_CASE("positive-part series with a+ = 0 on the chain is b") {
  const auto s = testing::spec(R"({"a":["scale",-0.5,["abs",["sin",["t"]]]],"b":["+",1,["scale",0.5,["cos",["t"]]]],
                                   "g":["-",["t"],0.5],"h":["-",["t"],0.5],"t0":0,"horizon":50})");
  const ParameterSummary ps = summarize(s, 10000);
  for (double t : {3.0, 17.0, 42.0}) {
    CHECK(big_B(s, ps, t, 1e-12, SeriesVariant::PositivePart).first == Approx(s.b(t)).epsilon(1e-15));
  }
}

TEST_CASE("reconstruction: x = (E - S)^-1 y for a forced solution with zero history") {
  EquationSpec spec = testing::load("variable_neutral_lag.json");
  spec.forcing = Expr::constant(1.0);
  const Trajectory tr = integrate(spec, [](double) { return 0.0; }, 30.0, 1e-3);
  const auto [x, cert] = neumann_inverse(spec, tr.y_samples(), 1e-10);
  double err = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) err = std::max(err, std::fabs(x.values[i] - tr.x[i]));
  CHECK(err <= 1e-4);
}

TEST_CASE("series CSV dump") {
  const EquationSpec spec = testing::load("variable_neutral_lag.json");
  const ParameterSummary s = summarize(spec);
  std::ostringstream os;
  const double ts[] = {1.0, 2.0};
  write_series_csv(os, spec, s, ts, 1e-8);
  CHECK(os.str().starts_with("t,B,terms\n1,"));
}
