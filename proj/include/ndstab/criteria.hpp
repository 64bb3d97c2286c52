#pragma once

// Explicit stability tests for (x(t) - a(t) x(g(t)))' = -b(t) x(h(t)).
//
// Each test returns an auditable verdict: the decisive strict inequality is
// reported as lhs < rhs with margin = rhs - lhs. Hypotheses that gate a test
// (sign of a, lag gates on alpha) decide `applicable`; the margin is only
// reported for applicable verdicts, so that satisfied <=> margin > 0.
//
// Notation used below: |a| = sup |a(t)|, a0 = inf a(t), a+ = max(a, 0),
// a- = max(-a, 0), |b| = sup b(t); sigma bounds t - g(t); delta <= t - h(t) <= tau.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ndstab/equation.hpp"
#include "ndstab/errors.hpp"
#include "ndstab/params.hpp"

namespace ndstab {

enum class StabilityKind { UniformExponential, Asymptotic };
enum class Certification { Certified, NumericallySupported };

inline const char* to_string(StabilityKind k) {
  return k == StabilityKind::UniformExponential ? "uniform-exponential" : "asymptotic";
}
inline const char* to_string(Certification c) {
  return c == Certification::Certified ? "certified" : "numerically-supported";
}

// Criterion identifiers.
namespace criterion {
inline constexpr const char* kSeriesBound = "series_bound";                 // alpha-parameterized, a >= a0 > 0
inline constexpr const char* kSeriesBoundFullLag = "series_bound_full_lag";  // alpha = 1
inline constexpr const char* kSeriesBoundNoLag = "series_bound_no_lag";      // alpha = 0
inline constexpr const char* kLimitDelay = "limit_delay";                    // t - h(t) -> tau
inline constexpr const char* kConstantNeutral = "constant_neutral";          // a constant
inline constexpr const char* kNondelayed = "nondelayed";                     // h(t) = t
inline constexpr const char* kSignSplit = "sign_split";                      // a may change sign
inline constexpr const char* kSignSplitDominant = "sign_split_dominant";     // |a| = |a+|
inline constexpr const char* kSignSplitFullLag = "sign_split_full_lag";
inline constexpr const char* kSignSplitNoLag = "sign_split_no_lag";
inline constexpr const char* kIntegralDelay = "integral_delay";  // unbounded delays, time change
inline constexpr const char* kBaselineYu = "baseline_yu";
inline constexpr const char* kBaselineTangZou = "baseline_tang_zou";
}  // namespace criterion

struct CriterionVerdict {
  std::string criterion;
  bool applicable = false;
  std::string reason;  ///< why the test does not apply; empty when it does
  bool satisfied = false;
  double margin = std::numeric_limits<double>::quiet_NaN();
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> alpha;
  StabilityKind kind = StabilityKind::UniformExponential;
  Certification certification = Certification::NumericallySupported;
  std::vector<std::string> notes;
};

struct AlphaInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_open = false;
  bool upper_open = false;
  bool empty = true;

  [[nodiscard]] bool contains(double alpha) const {
    if (empty) return false;
    const bool above = lower_open ? alpha > lower : alpha >= lower;
    const bool below = upper_open ? alpha < upper : alpha <= upper;
    return above && below;
  }
  [[nodiscard]] double midpoint() const { return 0.5 * (lower + upper); }
};

namespace detail {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline void require_bounds(const ParameterSummary& s) {
  if (!(s.norm_b > 0.0)) throw SummaryError("sup b must be positive");
  if (!(s.norm_a < 1.0)) throw SummaryError("sup |a| must be below 1");
}

inline Certification certification_of(const ParameterSummary& s, std::initializer_list<const char*> fields) {
  return s.certified(fields) ? Certification::Certified : Certification::NumericallySupported;
}

inline void decide(CriterionVerdict& v) {
  if (v.applicable) {
    v.margin = v.rhs - v.lhs;
    v.satisfied = v.margin > 0.0;
  } else {
    v.margin = kNaN;
    v.satisfied = false;
  }
}

/// Interval {alpha in [0,1] : alpha > open_lower and alpha <= closed_upper}.
inline AlphaInterval clip_unit(double lower, bool lower_open, double upper, bool upper_open) {
  AlphaInterval iv;
  if (lower < 0.0 || (lower == 0.0 && !lower_open)) {
    iv.lower = 0.0;
    iv.lower_open = false;
  } else {
    iv.lower = lower;
    iv.lower_open = lower_open;
  }
  if (upper > 1.0 || (upper == 1.0 && !upper_open)) {
    iv.upper = 1.0;
    iv.upper_open = false;
  } else {
    iv.upper = upper;
    iv.upper_open = upper_open;
  }
  iv.empty = iv.lower > iv.upper || (iv.lower == iv.upper && (iv.lower_open || iv.upper_open)) ||
             std::isnan(iv.lower) || std::isnan(iv.upper);
  return iv;
}

/// Largest alpha in [0, 1] with alpha * scale <= bound.
inline double gate_optimum(double bound, double scale) {
  if (!(scale > 0.0)) return 1.0;
  double alpha = std::clamp(bound / scale, 0.0, 1.0);
  while (alpha > 0.0 && alpha * scale > bound) alpha = std::nextafter(alpha, 0.0);
  return alpha;
}

inline const std::initializer_list<const char*> kSeriesFields = {"norm_a", "inf_a", "norm_b", "sigma", "tau", "delta"};
inline const std::initializer_list<const char*> kSplitFields = {"norm_a",       "norm_a_plus", "norm_a_minus", "norm_b",
                                                                 "sigma",        "tau",         "delta"};

}  // namespace detail

/// (1 - |a|) / (e |b|): the lag of the comparison equation at alpha = 1.
inline double lag_scale(const ParameterSummary& s) {
  detail::require_bounds(s);
  return (1.0 - s.norm_a) / (std::numbers::e * s.norm_b);
}

/// (1 - |a+|) / (e |b|), the sign-split counterpart of lag_scale.
inline double lag_scale_plus(const ParameterSummary& s) {
  detail::require_bounds(s);
  return (1.0 - s.norm_a_plus) / (std::numbers::e * s.norm_b);
}

/// tau |b| + sigma |a| |b| (1 - a0) / (1 - |a|)^2
inline double series_bound_lhs(const ParameterSummary& s) {
  const double one_minus = 1.0 - s.norm_a;
  return s.tau * s.norm_b + s.sigma * s.norm_a * s.norm_b * (1.0 - s.inf_a) / (one_minus * one_minus);
}

/// Requires a >= a0 > 0 and alpha * lag_scale <= delta; decides
/// series_bound_lhs < (1 - |a|)(1 + alpha / e).
inline CriterionVerdict check_series_bound(const ParameterSummary& s, double alpha) {
  detail::require_bounds(s);
  CriterionVerdict v;
  v.criterion = criterion::kSeriesBound;
  v.alpha = alpha;
  v.kind = StabilityKind::UniformExponential;
  v.certification = detail::certification_of(s, detail::kSeriesFields);
  v.lhs = series_bound_lhs(s);
  v.rhs = (1.0 - s.norm_a) * (1.0 + alpha / std::numbers::e);
  if (alpha < 0.0 || alpha > 1.0) {
    v.reason = "alpha outside [0, 1]";
  } else if (!(s.inf_a > 0.0)) {
    v.reason = "a(t) >= a0 > 0 fails";
  } else if (!(alpha * lag_scale(s) <= s.delta)) {
    v.reason = "alpha * lag_scale <= delta fails";
  } else {
    v.applicable = true;
  }
  detail::decide(v);
  return v;
}

/// The set of alpha in [0, 1] for which check_series_bound is satisfied.
/// The lower end comes from the strict inequality (open), the upper end from
/// the lag gate (closed).
inline AlphaInterval series_bound_alpha_interval(const ParameterSummary& s) {
  detail::require_bounds(s);
  if (!(s.inf_a > 0.0)) return {};
  const double lower = std::numbers::e * (series_bound_lhs(s) / (1.0 - s.norm_a) - 1.0);
  const double upper = s.delta / lag_scale(s);
  return detail::clip_unit(lower, true, upper, false);
}

/// alpha = 1 (gate lag_scale <= delta) and alpha = 0 (no gate).
inline std::pair<CriterionVerdict, CriterionVerdict> check_series_bound_endpoints(const ParameterSummary& s) {
  CriterionVerdict full = check_series_bound(s, 1.0);
  full.criterion = criterion::kSeriesBoundFullLag;
  if (full.reason == "alpha * lag_scale <= delta fails") full.reason = "lag_scale <= delta fails";
  CriterionVerdict none = check_series_bound(s, 0.0);
  none.criterion = criterion::kSeriesBoundNoLag;
  return {full, none};
}

/// For t - h(t) -> limit_tau: decides
/// alpha (1 - |a|)/e < limit_tau |b| < (1 - |a|)(1 + alpha/e) - sigma |a| |b| (1 - a0)/(1 - |a|)^2.
/// The margin is the smaller of the two slacks; lhs/rhs describe the upper inequality.
inline CriterionVerdict check_limit_delay(const ParameterSummary& s, double alpha) {
  detail::require_bounds(s);
  if (!s.limit_tau) throw MissingLimit("limit_tau must be supplied as an analytic override");
  CriterionVerdict v;
  v.criterion = criterion::kLimitDelay;
  v.alpha = alpha;
  v.certification = detail::certification_of(s, {"norm_a", "inf_a", "norm_b", "sigma", "limit_tau"});
  const double one_minus = 1.0 - s.norm_a;
  const double neutral = s.sigma * s.norm_a * s.norm_b * (1.0 - s.inf_a) / (one_minus * one_minus);
  const double lag_b = *s.limit_tau * s.norm_b;
  const double lower = alpha * one_minus / std::numbers::e;
  v.lhs = lag_b;
  v.rhs = one_minus * (1.0 + alpha / std::numbers::e) - neutral;
  if (alpha < 0.0 || alpha > 1.0) {
    v.reason = "alpha outside [0, 1]";
  } else if (!(s.inf_a > 0.0)) {
    v.reason = "a(t) >= a0 > 0 fails";
  } else {
    v.applicable = true;
  }
  if (v.applicable) {
    v.margin = std::min(lag_b - lower, v.rhs - lag_b);
    v.satisfied = v.margin > 0.0;
  }
  v.notes.push_back("lower bound alpha(1-|a|)/e = " + std::to_string(lower));
  return v;
}

/// Open interval of alpha in [0, 1] satisfying check_limit_delay. Its midpoint
/// maximizes the margin.
inline AlphaInterval limit_delay_alpha_interval(const ParameterSummary& s) {
  detail::require_bounds(s);
  if (!s.limit_tau) throw MissingLimit("limit_tau must be supplied as an analytic override");
  if (!(s.inf_a > 0.0)) return {};
  const double one_minus = 1.0 - s.norm_a;
  const double k = one_minus / std::numbers::e;
  const double neutral = s.sigma * s.norm_a * s.norm_b * (1.0 - s.inf_a) / (one_minus * one_minus);
  const double lag_b = *s.limit_tau * s.norm_b;
  return detail::clip_unit((lag_b + neutral - one_minus) / k, true, lag_b / k, true);
}

/// Constant a: requires alpha <= delta e |b| / (1 - a); decides
/// tau |b| + sigma a |b| / (1 - a) < (1 - a)(1 + alpha/e).
inline CriterionVerdict check_constant_neutral(const ParameterSummary& s, double alpha) {
  detail::require_bounds(s);
  if (std::fabs(s.norm_a - s.inf_a) > 1e-14) throw NotConstant("a is not a positive constant (sup |a| != inf a)");
  const double a = s.inf_a;
  CriterionVerdict v;
  v.criterion = criterion::kConstantNeutral;
  v.alpha = alpha;
  v.certification = detail::certification_of(s, detail::kSeriesFields);
  v.lhs = s.tau * s.norm_b + s.sigma * a * s.norm_b / (1.0 - a);
  v.rhs = (1.0 - a) * (1.0 + alpha / std::numbers::e);
  const double gate = s.delta * std::numbers::e * s.norm_b / (1.0 - a);
  if (alpha < 0.0 || alpha > 1.0) {
    v.reason = "alpha outside [0, 1]";
  } else if (!(a > 0.0)) {
    v.reason = "a is not positive";
  } else if (!(alpha <= gate)) {
    v.reason = "alpha <= delta e |b| / (1 - a) fails";
  } else {
    v.applicable = true;
  }
  detail::decide(v);
  return v;
}

/// h(t) = t: decides sigma |a| |b| (1 - a0) / (1 - |a|)^3 < 1. The
/// degenerate non-neutral case a = 0 is admitted.
inline CriterionVerdict check_nondelayed(const ParameterSummary& s) {
  detail::require_bounds(s);
  if (s.tau > 1e-12) throw NotNonDelayed("h(t) = t is required (tau = 0)");
  CriterionVerdict v;
  v.criterion = criterion::kNondelayed;
  v.certification = detail::certification_of(s, {"norm_a", "inf_a", "norm_b", "sigma", "tau"});
  const double one_minus = 1.0 - s.norm_a;
  v.lhs = s.sigma * s.norm_a * s.norm_b * (1.0 - s.inf_a) / (one_minus * one_minus * one_minus);
  v.rhs = 1.0;
  if (s.inf_a > 0.0) {
    v.applicable = true;
  } else if (s.norm_a == 0.0) {
    v.applicable = true;
    v.notes.push_back("a = 0: ordinary equation x' = -b x");
  } else {
    v.reason = "a(t) >= a0 > 0 fails";
  }
  detail::decide(v);
  return v;
}

/// tau |b| + sigma |a+| |b| / (1 - |a+|)^2 + |a-| |b| / (1 - |a+|)
inline double sign_split_lhs(const ParameterSummary& s) {
  const double one_minus = 1.0 - s.norm_a_plus;
  return s.tau * s.norm_b + s.sigma * s.norm_a_plus * s.norm_b / (one_minus * one_minus) +
         s.norm_a_minus * s.norm_b / one_minus;
}

/// No sign condition on a. Requires alpha * lag_scale_plus <= delta; decides
/// sign_split_lhs < 1 - |a| + alpha (1 - |a+|)/e.
inline CriterionVerdict check_sign_split(const ParameterSummary& s, double alpha) {
  detail::require_bounds(s);
  CriterionVerdict v;
  v.criterion = criterion::kSignSplit;
  v.alpha = alpha;
  v.certification = detail::certification_of(s, detail::kSplitFields);
  v.lhs = sign_split_lhs(s);
  v.rhs = 1.0 - s.norm_a + alpha * (1.0 - s.norm_a_plus) / std::numbers::e;
  if (alpha < 0.0 || alpha > 1.0) {
    v.reason = "alpha outside [0, 1]";
  } else if (!(alpha * lag_scale_plus(s) <= s.delta)) {
    v.reason = "alpha * lag_scale_plus <= delta fails";
  } else {
    v.applicable = true;
  }
  detail::decide(v);
  return v;
}

inline AlphaInterval sign_split_alpha_interval(const ParameterSummary& s) {
  detail::require_bounds(s);
  const double lower = std::numbers::e * (sign_split_lhs(s) - (1.0 - s.norm_a)) / (1.0 - s.norm_a_plus);
  return detail::clip_unit(lower, true, s.delta / lag_scale_plus(s), false);
}

/// Variant for |a| = |a+|: decides
/// tau |b| + sigma |a| |b| / (1-|a|)^2 + |a-| |b| / (1-|a|) < (1-|a|)(1+alpha/e)
/// under the same lag gate as check_sign_split.
inline CriterionVerdict check_sign_split_dominant(const ParameterSummary& s, double alpha) {
  detail::require_bounds(s);
  CriterionVerdict v;
  v.criterion = criterion::kSignSplitDominant;
  v.alpha = alpha;
  v.certification = detail::certification_of(s, detail::kSplitFields);
  const double one_minus = 1.0 - s.norm_a;
  v.lhs = s.tau * s.norm_b + s.sigma * s.norm_a * s.norm_b / (one_minus * one_minus) +
          s.norm_a_minus * s.norm_b / one_minus;
  v.rhs = one_minus * (1.0 + alpha / std::numbers::e);
  if (alpha < 0.0 || alpha > 1.0) {
    v.reason = "alpha outside [0, 1]";
  } else if (std::fabs(s.norm_a - s.norm_a_plus) > 1e-14) {
    v.reason = "|a| = |a+| fails";
  } else if (!(alpha * lag_scale_plus(s) <= s.delta)) {
    v.reason = "alpha * lag_scale_plus <= delta fails";
  } else {
    v.applicable = true;
  }
  detail::decide(v);
  return v;
}

/// alpha = 1 with the strict gate lag_scale_plus < delta, and alpha = 0.
inline std::pair<CriterionVerdict, CriterionVerdict> check_sign_split_endpoints(const ParameterSummary& s) {
  CriterionVerdict full = check_sign_split(s, 1.0);
  full.criterion = criterion::kSignSplitFullLag;
  if (!(lag_scale_plus(s) < s.delta)) {
    full.applicable = false;
    full.reason = "lag_scale_plus < delta fails";
    detail::decide(full);
  }
  CriterionVerdict none = check_sign_split(s, 0.0);
  none.criterion = criterion::kSignSplitNoLag;
  return {full, none};
}

/// tilde_tau + tilde_sigma |a| (1 - a0) / (1 - |a|)^2
inline double integral_delay_lhs(const IntegralSummary& is) {
  const double one_minus = 1.0 - is.norm_a;
  return is.tilde_tau + is.tilde_sigma * is.norm_a * (1.0 - is.inf_a) / (one_minus * one_minus);
}

/// Delays measured by the integral of b. Requires a0 > 0, alpha > 0 and
/// alpha * tilde_tau0 <= tilde_delta; decides
/// integral_delay_lhs < (1 - |a|)(1 + alpha/e). Concludes asymptotic stability.
inline CriterionVerdict check_integral_delay(const IntegralSummary& is, double alpha) {
  CriterionVerdict v;
  v.criterion = criterion::kIntegralDelay;
  v.alpha = alpha;
  v.kind = StabilityKind::Asymptotic;
  bool certified = true;
  for (const char* f : {"tilde_delta", "tilde_tau", "tilde_sigma", "norm_a", "inf_a"}) {
    const auto it = is.provenance.find(f);
    if (it == is.provenance.end() || it->second != Provenance::AnalyticOverride) certified = false;
  }
  v.certification = certified ? Certification::Certified : Certification::NumericallySupported;
  v.lhs = integral_delay_lhs(is);
  v.rhs = (1.0 - is.norm_a) * (1.0 + alpha / std::numbers::e);
  if (!(alpha > 0.0)) {
    v.reason = "alpha > 0 required";
  } else if (!(is.inf_a > 0.0)) {
    v.reason = "a(t) >= a0 > 0 fails";
  } else if (!(alpha * is.tilde_tau0 <= is.tilde_delta)) {
    v.reason = "alpha * tilde_tau0 <= tilde_delta fails";
  } else {
    v.applicable = true;
  }
  detail::decide(v);
  v.notes.push_back("assumed, not verified: integral of b diverges and b(t) != 0 almost everywhere");
  return v;
}

inline AlphaInterval integral_delay_alpha_interval(const IntegralSummary& is) {
  if (!(is.inf_a > 0.0)) return {};
  const double lower = std::numbers::e * (integral_delay_lhs(is) / (1.0 - is.norm_a) - 1.0);
  const double upper = is.tilde_tau0 > 0.0 ? is.tilde_delta / is.tilde_tau0 : std::numeric_limits<double>::infinity();
  AlphaInterval iv = detail::clip_unit(lower, true, upper, false);
  // alpha = 0 is excluded by the hypothesis alpha > 0.
  if (!iv.empty && iv.lower == 0.0) iv.lower_open = true;
  return iv;
}

/// 3/2 - 2 A0 (2 - A0); positive only for A0 < 1/2.
inline double yu_threshold(double A0) { return 1.5 - 2.0 * A0 * (2.0 - A0); }

/// 3/2 - 2 A0 for A0 < 1/4; sqrt(2 (1 - 2 A0)) for 1/4 <= A0 < 1/2.
inline std::optional<double> tang_zou_threshold(double A0) {
  if (A0 < 0.25) return 1.5 - 2.0 * A0;
  if (A0 < 0.5) return std::sqrt(2.0 * (1.0 - 2.0 * A0));
  return std::nullopt;
}

namespace detail {

inline CriterionVerdict baseline(const char* id, const ParameterSummary& s, double limsup_int_b,
                                 std::optional<double> threshold) {
  CriterionVerdict v;
  v.criterion = id;
  v.kind = StabilityKind::Asymptotic;
  const bool cert = s.certified({"norm_a"}) && s.provenance.count("limsup_int_b") &&
                    s.provenance.at("limsup_int_b") == Provenance::AnalyticOverride;
  v.certification = cert ? Certification::Certified : Certification::NumericallySupported;
  v.lhs = limsup_int_b;
  v.rhs = threshold.value_or(kNaN);
  if (!threshold || !(*threshold > 0.0)) {
    v.reason = "|a| too large for this test";
  } else if (!s.constant_delays) {
    v.reason = "constant delays required";
  } else {
    v.applicable = true;
  }
  decide(v);
  return v;
}

}  // namespace detail

/// limsup of the integral of b over [t - tau, t] < 3/2 - 2 A0 (2 - A0).
inline CriterionVerdict check_baseline_yu(const ParameterSummary& s, double limsup_int_b) {
  return detail::baseline(criterion::kBaselineYu, s, limsup_int_b, yu_threshold(s.norm_a));
}

inline CriterionVerdict check_baseline_tang_zou(const ParameterSummary& s, double limsup_int_b) {
  return detail::baseline(criterion::kBaselineTangZou, s, limsup_int_b, tang_zou_threshold(s.norm_a));
}

// ---------------------------------------------------------------------------

struct EvaluationOptions {
  std::optional<double> alpha;  ///< fixed alpha; otherwise each test uses its best alpha
  std::size_t quadrature_points = kDefaultQuadraturePanels;
};

namespace detail {

template <class Fn>
CriterionVerdict guarded(const char* id, Fn&& fn) {
  try {
    return fn();
  } catch (const MissingLimit& e) {
    CriterionVerdict v;
    v.criterion = id;
    v.reason = e.what();
    return v;
  } catch (const NotConstant& e) {
    CriterionVerdict v;
    v.criterion = id;
    v.reason = e.what();
    return v;
  } catch (const NotNonDelayed& e) {
    CriterionVerdict v;
    v.criterion = id;
    v.reason = e.what();
    return v;
  } catch (const QuadratureError& e) {
    CriterionVerdict v;
    v.criterion = id;
    v.kind = StabilityKind::Asymptotic;
    v.reason = e.what();
    return v;
  }
}

}  // namespace detail

/// Runs every test against one equation and sorts the verdicts: satisfied
/// first, then by decreasing margin. Alpha-parameterized tests use the margin
/// maximizer of their feasible range unless a fixed alpha is requested.
inline std::vector<CriterionVerdict> evaluate_all(const EquationSpec& spec, const ParameterSummary& s,
                                                  const EvaluationOptions& opt = {}) {
  std::vector<CriterionVerdict> out;

  out.push_back(detail::guarded(criterion::kSeriesBound, [&] {
    const double alpha = opt.alpha.value_or(detail::gate_optimum(s.delta, lag_scale(s)));
    return check_series_bound(s, alpha);
  }));
  {
    auto [full, none] = check_series_bound_endpoints(s);
    out.push_back(full);
    out.push_back(none);
  }
  out.push_back(detail::guarded(criterion::kLimitDelay, [&] {
    double alpha = 0.5;
    if (opt.alpha) {
      alpha = *opt.alpha;
    } else {
      const AlphaInterval iv = limit_delay_alpha_interval(s);
      if (!iv.empty) alpha = iv.midpoint();
    }
    return check_limit_delay(s, alpha);
  }));
  out.push_back(detail::guarded(criterion::kConstantNeutral, [&] {
    const double a = s.inf_a;
    const double gate = a < 1.0 ? s.delta * std::numbers::e * s.norm_b / (1.0 - a) : 0.0;
    const double alpha = opt.alpha.value_or(std::clamp(gate, 0.0, 1.0));
    return check_constant_neutral(s, alpha);
  }));
  out.push_back(detail::guarded(criterion::kNondelayed, [&] { return check_nondelayed(s); }));
  out.push_back(detail::guarded(criterion::kSignSplit, [&] {
    const double alpha = opt.alpha.value_or(detail::gate_optimum(s.delta, lag_scale_plus(s)));
    return check_sign_split(s, alpha);
  }));
  out.push_back(detail::guarded(criterion::kSignSplitDominant, [&] {
    const double alpha = opt.alpha.value_or(detail::gate_optimum(s.delta, lag_scale_plus(s)));
    return check_sign_split_dominant(s, alpha);
  }));
  {
    auto [full, none] = check_sign_split_endpoints(s);
    out.push_back(full);
    out.push_back(none);
  }
  out.push_back(detail::guarded(criterion::kIntegralDelay, [&] {
    const IntegralSummary is = integral_summary(spec, opt.quadrature_points, s);
    double alpha = opt.alpha.value_or(detail::gate_optimum(is.tilde_delta, is.tilde_tau0));
    CriterionVerdict v = check_integral_delay(is, alpha);
    for (const auto& n : is.notes) v.notes.push_back(n);
    return v;
  }));

  std::optional<double> limsup = s.limsup_int_b;
  bool limsup_estimated = false;
  if (!limsup && s.constant_delays) {
    try {
      limsup = limsup_delay_integral(spec, s.tau);
      limsup_estimated = true;
    } catch (const QuadratureError&) {
    }
  }
  for (int which = 0; which < 2; ++which) {
    const char* id = which == 0 ? criterion::kBaselineYu : criterion::kBaselineTangZou;
    CriterionVerdict v = which == 0 ? check_baseline_yu(s, limsup.value_or(detail::kNaN))
                                    : check_baseline_tang_zou(s, limsup.value_or(detail::kNaN));
    v.criterion = id;
    if (v.applicable && !limsup) {
      v.applicable = false;
      v.reason = "limsup of the delay integral unavailable";
      detail::decide(v);
    }
    if (limsup_estimated) v.notes.push_back("limsup of the delay integral is a grid estimate");
    out.push_back(v);
  }

  std::stable_sort(out.begin(), out.end(), [](const CriterionVerdict& x, const CriterionVerdict& y) {
    if (x.satisfied != y.satisfied) return x.satisfied;
    const bool xn = std::isnan(x.margin), yn = std::isnan(y.margin);
    if (xn != yn) return yn;
    if (xn) return false;
    return x.margin > y.margin;
  });
  return out;
}

inline json to_json(const CriterionVerdict& v) {
  auto num = [](double d) { return std::isfinite(d) ? json(d) : json(nullptr); };
  json j;
  j["criterion"] = v.criterion;
  j["applicable"] = v.applicable;
  j["satisfied"] = v.satisfied;
  j["margin"] = num(v.margin);
  j["lhs"] = num(v.lhs);
  j["rhs"] = num(v.rhs);
  j["alpha"] = v.alpha ? num(*v.alpha) : json(nullptr);
  j["kind"] = to_string(v.kind);
  j["certification"] = to_string(v.certification);
  json notes = v.notes;
  if (!v.reason.empty()) notes.insert(notes.begin(), "not applicable: " + v.reason);
  j["notes"] = notes;
  return j;
}

inline json to_json(const AlphaInterval& iv) {
  return json{{"lower", iv.lower}, {"upper", iv.upper}, {"lower_open", iv.lower_open},
              {"upper_open", iv.upper_open}, {"empty", iv.empty}};
}

}  // namespace ndstab
