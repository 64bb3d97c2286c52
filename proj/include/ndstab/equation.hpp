#pragma once

// Equation model for (x(t) - a(t) x(g(t)))' = -b(t) x(h(t)) + f(t) on a finite
// window [t0, horizon], plus the structural checks on that window.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ndstab/errors.hpp"
#include "ndstab/expr.hpp"

namespace ndstab {

/// Summary fields that may be pinned analytically in an equation file.
inline constexpr std::array<std::string_view, 14> kOverrideKeys = {
    "norm_a",  "inf_a", "norm_a_plus", "norm_a_minus", "norm_b",      "inf_b",       "sigma",
    "tau",     "delta", "limit_tau",   "limsup_int_b", "tilde_delta", "tilde_tau",   "tilde_sigma",
};

struct EquationSpec {
  std::string name;
  Expr a;  ///< neutral coefficient
  Expr b;  ///< delay coefficient
  Expr g;  ///< neutral delay argument g(t) <= t
  Expr h;  ///< retarded delay argument h(t) <= t
  std::optional<Expr> forcing;
  double t0 = 0.0;
  double horizon = 100.0;
  std::map<std::string, double> params;
  std::map<std::string, Expr> overrides;

  /// Copy with every parameter substituted by its bound value.
  [[nodiscard]] EquationSpec resolved() const {
    EquationSpec out = *this;
    for (const auto& [key, v] : params) {
      out.a = out.a.bind(key, v);
      out.b = out.b.bind(key, v);
      out.g = out.g.bind(key, v);
      out.h = out.h.bind(key, v);
      if (out.forcing) out.forcing = out.forcing->bind(key, v);
      for (auto& [k, e] : out.overrides) e = e.bind(key, v);
    }
    return out;
  }

  [[nodiscard]] EquationSpec with_param(const std::string& key, double v) const {
    EquationSpec out = *this;
    out.params[key] = v;
    return out;
  }

  [[nodiscard]] bool in_window(double t) const {
    const double eps = 1e-9 * std::max(1.0, std::fabs(horizon));
    return t >= t0 - eps && t <= horizon + eps;
  }

  void require_window(double t) const {
    if (!in_window(t)) {
      std::ostringstream os;
      os << "t = " << t << " outside validity window [" << t0 << ", " << horizon << "]";
      throw DomainError(os.str());
    }
  }

  [[nodiscard]] double a_at(double t) const { require_window(t); return a(t); }
  [[nodiscard]] double b_at(double t) const { require_window(t); return b(t); }
  [[nodiscard]] double g_at(double t) const { require_window(t); return g(t); }
  [[nodiscard]] double h_at(double t) const { require_window(t); return h(t); }
  [[nodiscard]] double f_at(double t) const {
    require_window(t);
    return forcing ? (*forcing)(t) : 0.0;
  }

  /// Value of an analytic override, if present. Overrides may reference
  /// parameters but not t.
  [[nodiscard]] std::optional<double> override_value(std::string_view key) const {
    const auto it = overrides.find(std::string(key));
    if (it == overrides.end()) return std::nullopt;
    Expr e = it->second;
    for (const auto& [k, v] : params) e = e.bind(k, v);
    return e(0.0);
  }

  /// Uniform grid of `n` points over [t0, horizon].
  [[nodiscard]] std::vector<double> grid(std::size_t n) const {
    if (n < 2) throw SpecError("grid needs at least 2 points");
    std::vector<double> ts(n);
    const double step = (horizon - t0) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) ts[i] = t0 + step * static_cast<double>(i);
    ts.back() = horizon;
    return ts;
  }
};

inline json to_json(const EquationSpec& s) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["a"] = to_json(s.a);
  j["b"] = to_json(s.b);
  j["g"] = to_json(s.g);
  j["h"] = to_json(s.h);
  if (s.forcing) j["f"] = to_json(*s.forcing);
  j["t0"] = s.t0;
  j["horizon"] = s.horizon;
  if (!s.params.empty()) j["params"] = s.params;
  if (!s.overrides.empty()) {
    json o = json::object();
    for (const auto& [k, e] : s.overrides) {
      o[k] = e.kind() == ExprKind::Constant ? json(e.value()) : to_json(e);
    }
    j["overrides"] = o;
  }
  return j;
}

inline EquationSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("equation file must hold a JSON object");
  static const std::array<std::string_view, 10> known = {"name", "a",       "b",      "g",        "h",
                                                         "f",    "t0",      "horizon", "params",  "overrides"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw SpecError("unknown key '" + key + "'");
  }
  EquationSpec s;
  for (const char* key : {"a", "b", "g", "h", "t0", "horizon"}) {
    if (!j.contains(key)) throw SpecError(std::string("missing key '") + key + "'");
  }
  s.name = j.value("name", std::string{});
  s.a = expr_from_json(j.at("a"));
  s.b = expr_from_json(j.at("b"));
  s.g = expr_from_json(j.at("g"));
  s.h = expr_from_json(j.at("h"));
  if (j.contains("f")) s.forcing = expr_from_json(j.at("f"));
  if (!j.at("t0").is_number() || !j.at("horizon").is_number()) throw SpecError("t0 and horizon must be numbers");
  s.t0 = j.at("t0").get<double>();
  s.horizon = j.at("horizon").get<double>();
  if (s.t0 < 0.0) throw SpecError("t0 must be >= 0");
  if (!(s.horizon > s.t0)) throw SpecError("horizon must exceed t0");
  if (j.contains("params")) {
    for (const auto& [k, v] : j.at("params").items()) {
      if (!v.is_number()) throw SpecError("parameter '" + k + "' must be a number");
      s.params[k] = v.get<double>();
    }
  }
  if (j.contains("overrides")) {
    for (const auto& [k, v] : j.at("overrides").items()) {
      if (std::find(kOverrideKeys.begin(), kOverrideKeys.end(), k) == kOverrideKeys.end()) {
        throw SpecError("unknown override '" + k + "'");
      }
      Expr e = expr_from_json(v);
      if (e.depends_on_time()) throw SpecError("override '" + k + "' must not depend on t");
      s.overrides.emplace(k, std::move(e));
    }
  }
  return s;
}

inline EquationSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open equation file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecError("'" + path + "': " + e.what());
  }
  return spec_from_json(j);
}

// ---------------------------------------------------------------------------
// Validation

struct AssumptionCheck {
  std::string id;
  std::string description;
  bool passed = true;
  std::vector<double> witnesses;  ///< sample times where the check failed
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  std::size_t grid_points = 0;
  double A0 = 0.0;  ///< max |a|
  double b0 = 0.0;  ///< min b
  double B0 = 0.0;  ///< max b
  double sigma = 0.0;
  double tau = 0.0;
  double delta = 0.0;

  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  [[nodiscard]] const AssumptionCheck* find(std::string_view id) const {
    for (const auto& c : checks) {
      if (c.id == id) return &c;
    }
    return nullptr;
  }
};

namespace detail {

inline constexpr std::size_t kMaxWitnesses = 8;

inline void fail_at(AssumptionCheck& c, double t) {
  c.passed = false;
  if (c.witnesses.size() < kMaxWitnesses) c.witnesses.push_back(t);
}

}  // namespace detail

/// Checks the structural assumptions on a uniform grid over [t0, horizon].
/// Failures are report entries; nothing is thrown for a bad equation.
///
/// The requirement that g and h are unbounded above cannot be decided on a
/// finite window; only g(horizon) > t0 and h(horizon) > t0 are checked.
inline ValidationReport validate(const EquationSpec& raw, std::size_t grid_points) {
  if (grid_points < 2) throw SpecError("validate needs grid_points >= 2");
  const EquationSpec spec = raw.resolved();
  ValidationReport rep;
  rep.grid_points = grid_points;

  AssumptionCheck domain{"domain", "coefficients finite, denominators away from zero", true, {}};
  AssumptionCheck abs_a{"a1.abs_a", "|a(t)| <= A0 < 1", true, {}};
  AssumptionCheck b_pos{"a1.b_positive", "0 < b0 <= b(t) <= B0", true, {}};
  AssumptionCheck g_le{"a3.g_le_t", "g(t) <= t", true, {}};
  AssumptionCheck h_le{"a3.h_le_t", "h(t) <= t", true, {}};
  AssumptionCheck reach{"a3.arguments_advance", "g(horizon) > t0 and h(horizon) > t0", true, {}};
  AssumptionCheck lags{"a4.lags", "0 <= t - g(t) <= sigma, 0 <= delta <= t - h(t) <= tau", true, {}};

  constexpr double kDenFloor = 1e-9;
  constexpr double kSlack = 1e-12;
  const std::vector<Expr> dens = [&] {
    std::vector<Expr> all;
    for (const Expr* e : {&spec.a, &spec.b, &spec.g, &spec.h}) {
      auto d = e->denominators();
      all.insert(all.end(), d.begin(), d.end());
    }
    if (spec.forcing) {
      auto d = spec.forcing->denominators();
      all.insert(all.end(), d.begin(), d.end());
    }
    return all;
  }();

  double A0 = 0.0, b0 = std::numeric_limits<double>::infinity(), B0 = -std::numeric_limits<double>::infinity();
  double sigma = 0.0, tau = -std::numeric_limits<double>::infinity(), delta = std::numeric_limits<double>::infinity();
  bool any_sample = false;

  for (double t : spec.grid(grid_points)) {
    double av = 0, bv = 0, gv = 0, hv = 0;
    try {
      bool tiny_den = false;
      for (const auto& d : dens) {
        if (std::fabs(d(t)) < kDenFloor) tiny_den = true;
      }
      if (tiny_den) {
        detail::fail_at(domain, t);
        continue;
      }
      av = spec.a(t);
      bv = spec.b(t);
      gv = spec.g(t);
      hv = spec.h(t);
      if (spec.forcing) (void)(*spec.forcing)(t);
      if (!std::isfinite(av) || !std::isfinite(bv) || !std::isfinite(gv) || !std::isfinite(hv)) {
        detail::fail_at(domain, t);
        continue;
      }
    } catch (const DomainError&) {
      detail::fail_at(domain, t);
      continue;
    }
    any_sample = true;
    if (!(std::fabs(av) < 1.0)) detail::fail_at(abs_a, t);
    if (!(bv > 0.0)) detail::fail_at(b_pos, t);
    if (gv > t + kSlack) detail::fail_at(g_le, t);
    if (hv > t + kSlack) detail::fail_at(h_le, t);
    if (t - gv < -kSlack || t - hv < -kSlack) detail::fail_at(lags, t);
    A0 = std::max(A0, std::fabs(av));
    b0 = std::min(b0, bv);
    B0 = std::max(B0, bv);
    sigma = std::max(sigma, t - gv);
    tau = std::max(tau, t - hv);
    delta = std::min(delta, t - hv);
  }
  try {
    if (!(spec.g(spec.horizon) > spec.t0) || !(spec.h(spec.horizon) > spec.t0)) detail::fail_at(reach, spec.horizon);
  } catch (const DomainError&) {
    detail::fail_at(reach, spec.horizon);
  }

  if (any_sample) {
    rep.A0 = A0;
    rep.b0 = b0;
    rep.B0 = B0;
    rep.sigma = sigma;
    rep.tau = tau;
    rep.delta = delta;
  }
  rep.checks = {domain, abs_a, b_pos, g_le, h_le, reach, lags};
  return rep;
}

}  // namespace ndstab
