#pragma once

// Scalar bounds consumed by the stability criteria.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ndstab/equation.hpp"
#include "ndstab/errors.hpp"

namespace ndstab {

enum class Provenance { AnalyticOverride, GridEstimate };

inline const char* to_string(Provenance p) {
  return p == Provenance::AnalyticOverride ? "analytic-override" : "grid-estimate";
}

inline constexpr std::size_t kDefaultGridPoints = 100000;
inline constexpr std::size_t kDefaultQuadraturePanels = 2048;

/// Order-independent summation.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
inline double simpson(const std::function<double(double)>& f, double lo, double hi, std::size_t panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  if (hi == lo) return 0.0;
  const double step = (hi - lo) / static_cast<double>(panels);
  std::vector<double> terms(panels + 1);
  for (std::size_t i = 0; i <= panels; ++i) {
    const double x = i == panels ? hi : lo + step * static_cast<double>(i);
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    terms[i] = w * f(x);
  }
  return pairwise_sum(terms) * step / 3.0;
}

struct ParameterSummary {
  double norm_a = 0.0;        ///< sup |a|
  double inf_a = 0.0;         ///< inf a, may be <= 0
  double norm_a_plus = 0.0;   ///< sup max(a, 0)
  double norm_a_minus = 0.0;  ///< sup max(-a, 0)
  double norm_b = 0.0;
  double inf_b = 0.0;
  double sigma = 0.0;  ///< sup (t - g(t))
  double tau = 0.0;    ///< sup (t - h(t))
  double delta = 0.0;  ///< inf (t - h(t))
  std::optional<double> limit_tau;
  std::optional<double> limsup_int_b;  ///< limsup of the integral of b over [t - tau, t]
  bool constant_delays = false;
  std::map<std::string, Provenance> provenance;

  [[nodiscard]] bool certified(std::initializer_list<const char*> fields) const {
    for (const char* f : fields) {
      const auto it = provenance.find(f);
      if (it == provenance.end() || it->second != Provenance::AnalyticOverride) return false;
    }
    return true;
  }
};

struct IntegralSummary {
  double tilde_delta = 0.0;  ///< inf of the integral of b over [h(t), t]
  double tilde_tau = 0.0;    ///< sup of the same integral
  double tilde_sigma = 0.0;  ///< sup of the integral of b over [g(t), t]
  double tilde_tau0 = 0.0;   ///< (1 - norm_a) / e
  double norm_a = 0.0;
  double inf_a = 0.0;
  std::size_t skipped = 0;  ///< sample times whose integration range left the window
  std::vector<std::string> notes;
  std::map<std::string, Provenance> provenance;
};

/// Extracts the scalar bounds. Each field is the analytic override when the
/// equation supplies one, else the extremum over a uniform grid.
inline ParameterSummary summarize(const EquationSpec& raw, std::size_t grid_points = kDefaultGridPoints) {
  const EquationSpec spec = raw.resolved();
  const auto ts = spec.grid(grid_points);

  double norm_a = 0, inf_a = std::numeric_limits<double>::infinity(), a_plus = 0, a_minus = 0;
  double norm_b = -std::numeric_limits<double>::infinity(), inf_b = std::numeric_limits<double>::infinity();
  double sigma = 0, sigma_min = std::numeric_limits<double>::infinity();
  double tau = -std::numeric_limits<double>::infinity(), delta = std::numeric_limits<double>::infinity();
  for (double t : ts) {
    const double av = spec.a(t);
    const double bv = spec.b(t);
    const double lag_g = t - spec.g(t);
    const double lag_h = t - spec.h(t);
    norm_a = std::max(norm_a, std::fabs(av));
    inf_a = std::min(inf_a, av);
    a_plus = std::max(a_plus, std::max(av, 0.0));
    a_minus = std::max(a_minus, std::max(-av, 0.0));
    norm_b = std::max(norm_b, bv);
    inf_b = std::min(inf_b, bv);
    sigma = std::max(sigma, lag_g);
    sigma_min = std::min(sigma_min, lag_g);
    tau = std::max(tau, lag_h);
    delta = std::min(delta, lag_h);
  }

  ParameterSummary s;
  s.constant_delays = (sigma - sigma_min) < 1e-12 && (tau - delta) < 1e-12;
  auto pick = [&](const char* key, double estimate) {
    if (auto v = spec.override_value(key)) {
      s.provenance[key] = Provenance::AnalyticOverride;
      return *v;
    }
    s.provenance[key] = Provenance::GridEstimate;
    return estimate;
  };
  s.norm_a = pick("norm_a", norm_a);
  s.inf_a = pick("inf_a", inf_a);
  s.norm_a_plus = pick("norm_a_plus", a_plus);
  s.norm_a_minus = pick("norm_a_minus", a_minus);
  s.norm_b = pick("norm_b", norm_b);
  s.inf_b = pick("inf_b", inf_b);
  s.sigma = pick("sigma", std::max(sigma, 0.0));
  s.tau = pick("tau", std::max(tau, 0.0));
  s.delta = pick("delta", std::max(delta, 0.0));
  // A limit cannot be confirmed by sampling; only an override sets it.
  if (auto v = spec.override_value("limit_tau")) {
    s.limit_tau = *v;
    s.provenance["limit_tau"] = Provenance::AnalyticOverride;
  }
  if (auto v = spec.override_value("limsup_int_b")) {
    s.limsup_int_b = *v;
    s.provenance["limsup_int_b"] = Provenance::AnalyticOverride;
  }

  if (!(s.inf_b > 0.0)) throw SummaryError("inf b estimate is not positive");
  if (!(s.norm_a < 1.0)) throw SummaryError("sup |a| is not below 1");
  return s;
}

/// Grid estimate of limsup of the integral of b over [t - lag, t], taken as
/// the sup over the last half of the window.
inline double limsup_delay_integral(const EquationSpec& raw, double lag, std::size_t samples = 512,
                                    std::size_t panels = 256) {
  const EquationSpec spec = raw.resolved();
  const double start = std::max(spec.t0 + lag, 0.5 * (spec.t0 + spec.horizon));
  if (start >= spec.horizon) throw QuadratureError("window too short for the delay integral");
  double best = 0.0;
  const std::function<double(double)> b = [&](double s) { return spec.b(s); };
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = start + (spec.horizon - start) * static_cast<double>(i) / static_cast<double>(samples - 1);
    best = std::max(best, simpson(b, t - lag, t, panels));
  }
  return best;
}

/// Bounds of the integrals of b over [h(t), t] and [g(t), t]. Sample times
/// whose range falls below t0 (where b is undefined) are skipped and counted.
inline IntegralSummary integral_summary(const EquationSpec& raw, std::size_t quadrature_points,
                                        const ParameterSummary& base, std::size_t t_samples = 1000) {
  const EquationSpec spec = raw.resolved();
  IntegralSummary out;
  out.norm_a = base.norm_a;
  out.inf_a = base.inf_a;
  out.tilde_tau0 = (1.0 - base.norm_a) / std::numbers::e;

  const std::function<double(double)> b = [&](double s) { return spec.b(s); };
  double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
  double sig = 0.0;
  std::size_t h_used = 0, g_used = 0, skipped = 0;
  for (double t : spec.grid(t_samples)) {
    const double ht = spec.h(t);
    const double gt = spec.g(t);
    bool skip = false;
    if (ht >= spec.t0) {
      const double v = simpson(b, ht, t, quadrature_points);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      ++h_used;
    } else {
      skip = true;
    }
    if (gt >= spec.t0) {
      sig = std::max(sig, simpson(b, gt, t, quadrature_points));
      ++g_used;
    } else {
      skip = true;
    }
    if (skip) ++skipped;
  }
  out.skipped = skipped;
  if (skipped > 0) {
    out.notes.push_back(std::to_string(skipped) + " sample time(s) skipped: integration range reaches below t0");
  }

  auto pick = [&](const char* key, std::optional<double> estimate) -> double {
    if (auto v = spec.override_value(key)) {
      out.provenance[key] = Provenance::AnalyticOverride;
      return *v;
    }
    if (!estimate) throw QuadratureError(std::string("no sample time supports '") + key + "'");
    out.provenance[key] = Provenance::GridEstimate;
    return *estimate;
  };
  out.tilde_delta = pick("tilde_delta", h_used ? std::optional<double>(lo) : std::nullopt);
  out.tilde_tau = pick("tilde_tau", h_used ? std::optional<double>(hi) : std::nullopt);
  out.tilde_sigma = pick("tilde_sigma", g_used ? std::optional<double>(sig) : std::nullopt);
  out.provenance["norm_a"] = base.provenance.count("norm_a") ? base.provenance.at("norm_a") : Provenance::GridEstimate;
  out.provenance["inf_a"] = base.provenance.count("inf_a") ? base.provenance.at("inf_a") : Provenance::GridEstimate;
  return out;
}

inline IntegralSummary integral_summary(const EquationSpec& spec, std::size_t quadrature_points = kDefaultQuadraturePanels) {
  return integral_summary(spec, quadrature_points, summarize(spec));
}

inline json to_json(const ParameterSummary& s) {
  json j;
  j["norm_a"] = s.norm_a;
  j["inf_a"] = s.inf_a;
  j["norm_a_plus"] = s.norm_a_plus;
  j["norm_a_minus"] = s.norm_a_minus;
  j["norm_b"] = s.norm_b;
  j["inf_b"] = s.inf_b;
  j["sigma"] = s.sigma;
  j["tau"] = s.tau;
  j["delta"] = s.delta;
  j["limit_tau"] = s.limit_tau ? json(*s.limit_tau) : json(nullptr);
  j["limsup_int_b"] = s.limsup_int_b ? json(*s.limsup_int_b) : json(nullptr);
  j["constant_delays"] = s.constant_delays;
  json p = json::object();
  for (const auto& [k, v] : s.provenance) p[k] = to_string(v);
  j["provenance"] = p;
  return j;
}

inline json to_json(const IntegralSummary& s) {
  json j;
  j["tilde_delta"] = s.tilde_delta;
  j["tilde_tau"] = s.tilde_tau;
  j["tilde_sigma"] = s.tilde_sigma;
  j["tilde_tau0"] = s.tilde_tau0;
  j["norm_a"] = s.norm_a;
  j["inf_a"] = s.inf_a;
  j["skipped"] = s.skipped;
  j["notes"] = s.notes;
  json p = json::object();
  for (const auto& [k, v] : s.provenance) p[k] = to_string(v);
  j["provenance"] = p;
  return j;
}

}  // namespace ndstab
