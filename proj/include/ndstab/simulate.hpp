#pragma once

// Method-of-steps integration of
//   (x(t) - a(t) x(g(t)))' = -b(t) x(h(t)) + f(t),  x(t) = phi(t) for t <= t0.
//
// y(t) = x(t) - a(t) x(g(t)) is advanced with classical RK4; x is recovered
// at every node (and every stage) from x = y + a x(g) by fixed-point
// iteration. Past values of x are linearly interpolated; values inside the
// current step use the stage's own provisional x. Derivative jumps that the
// neutral term propagates from t0 are not tracked, so accuracy is limited to
// first order near breaking points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ndstab/equation.hpp"
#include "ndstab/errors.hpp"
#include "ndstab/expr.hpp"
#include "ndstab/params.hpp"
#include "ndstab/series.hpp"

namespace ndstab {

using ScalarFn = std::function<double(double)>;

/// Coefficients as plain callables; `forcing` may be empty.
struct NeutralModel {
  ScalarFn a;
  ScalarFn b;
  ScalarFn g;
  ScalarFn h;
  ScalarFn forcing;
  double t0 = 0.0;
};

struct IntegratorStats {
  std::size_t max_iterations = 0;  ///< worst fixed-point count at a node or stage
  std::size_t total_iterations = 0;
  double max_residual = 0.0;
};

struct Trajectory {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  ScalarFn history;
  std::optional<Expr> forcing;
  IntegratorStats stats;

  [[nodiscard]] std::size_t size() const { return x.size(); }
  [[nodiscard]] double time(std::size_t i) const { return t0 + step * static_cast<double>(i); }
  [[nodiscard]] double t_end() const { return time(x.size() - 1); }

  /// x at any s <= t_end: the history below t0, linear interpolation above.
  [[nodiscard]] double x_at(double s) const {
    if (s < t0) return history ? history(s) : 0.0;
    return x_samples()(s);
  }
  [[nodiscard]] SampledFunction x_samples() const { return {t0, step, x, 0.0}; }
  [[nodiscard]] SampledFunction y_samples() const { return {t0, step, y, 0.0}; }
};

inline constexpr double kFixedPointTolerance = 1e-12;
inline constexpr std::size_t kFixedPointMaxIterations = 100;

namespace detail {

struct NodeCoeffs {
  double t, a, b, g, h, f;
};

class StepIntegrator {
 public:
  StepIntegrator(const NeutralModel& m, const ScalarFn& history, double step, std::size_t nodes)
      : m_(m), history_(history), step_(step) {
    x_.reserve(nodes);
    y_.reserve(nodes);
  }

  Trajectory run(std::size_t steps) {
    const double t0 = m_.t0;
    NodeCoeffs c0 = coeffs(t0);
    const double x0 = history_(t0);
    x_.push_back(x0);
    y_.push_back(x0 - c0.a * (c0.g < t0 ? history_(c0.g) : x0));

    for (std::size_t n = 0; n < steps; ++n) {
      const double tn = time(n);
      const double yn = y_[n];
      const NodeCoeffs mid = coeffs(tn + 0.5 * step_);
      const NodeCoeffs end = coeffs(time(n + 1));
      const double k1 = rhs(c0, yn, n);
      const double k2 = rhs(mid, yn + 0.5 * step_ * k1, n);
      const double k3 = rhs(mid, yn + 0.5 * step_ * k2, n);
      const double k4 = rhs(end, yn + step_ * k3, n);
      const double y1 = yn + step_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double x1 = recover(end, y1, n, true);
      y_.push_back(y1);
      x_.push_back(x1);
      if (!std::isfinite(x1)) break;
      c0 = end;
    }

    Trajectory tr;
    tr.t0 = t0;
    tr.step = step_;
    tr.x = std::move(x_);
    tr.y = std::move(y_);
    tr.history = history_;
    tr.stats = stats_;
    return tr;
  }

 private:
  [[nodiscard]] double time(std::size_t i) const { return m_.t0 + step_ * static_cast<double>(i); }

  NodeCoeffs coeffs(double t) const {
    return {t, m_.a(t), m_.b(t), m_.g(t), m_.h(t), m_.forcing ? m_.forcing(t) : 0.0};
  }

  /// Stored x at s <= t_n (history below t0).
  double stored(double s, std::size_t n) const {
    if (s < m_.t0) return history_(s);
    const double pos = (s - m_.t0) / step_;
    auto i = static_cast<std::size_t>(pos);
    if (i >= n) return x_[n];
    const double w = pos - static_cast<double>(i);
    return x_[i] + w * (x_[i + 1] - x_[i]);
  }

  /// x at the stage time c.t from its y value.
  double recover(const NodeCoeffs& c, double y, std::size_t n, bool node) {
    const double tn = time(n);
    std::size_t iters = 1;
    double x = 0.0;
    double residual = 0.0;
    if (std::fabs(c.t - c.g) < 1e-14) {
      x = y / (1.0 - c.a);
    } else if (c.g <= tn) {
      x = y + c.a * stored(c.g, n);
    } else {
      // g(t) inside the current step: x(g) interpolates between x_n and the unknown.
      const double xn = x_[n];
      const double w = (c.g - tn) / (c.t - tn);
      x = xn;
      bool converged = false;
      for (iters = 1; iters <= kFixedPointMaxIterations; ++iters) {
        const double next = y + c.a * (xn + w * (x - xn));
        residual = std::fabs(next - x);
        x = next;
        if (residual < kFixedPointTolerance) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        throw FixedPointDivergence("fixed-point recovery of x did not contract at t = " + std::to_string(c.t));
      }
    }
    stats_.max_iterations = std::max(stats_.max_iterations, iters);
    stats_.total_iterations += iters;
    if (node) stats_.max_residual = std::max(stats_.max_residual, residual);
    return x;
  }

  double rhs(const NodeCoeffs& c, double y, std::size_t n) {
    const double tn = time(n);
    double xh = 0.0;
    if (c.h <= tn) {
      xh = stored(c.h, n);
    } else {
      const double xs = recover(c, y, n, false);
      const double w = (c.h - tn) / (c.t - tn);
      xh = x_[n] + w * (xs - x_[n]);
    }
    return -c.b * xh + c.f;
  }

  const NeutralModel& m_;
  const ScalarFn& history_;
  double step_;
  std::vector<double> x_;
  std::vector<double> y_;
  IntegratorStats stats_;
};

}  // namespace detail

/// Integrates a model on [t0, t_end] with a fixed step.
inline Trajectory integrate_model(const NeutralModel& model, const ScalarFn& history, double t_end, double step) {
  if (!(step > 0.0)) throw Error("step must be positive");
  if (!(t_end > model.t0)) throw Error("end time must exceed t0");
  const auto steps = static_cast<std::size_t>(std::llround((t_end - model.t0) / step));
  if (steps == 0) throw Error("integration interval shorter than one step");
  detail::StepIntegrator integrator(model, history, step, steps + 1);
  return integrator.run(steps);
}

/// Model backed by an equation; coefficient evaluation is window-checked.
inline NeutralModel model_of(const EquationSpec& spec) {
  NeutralModel m;
  m.a = [spec](double t) { return spec.a_at(t); };
  m.b = [spec](double t) { return spec.b_at(t); };
  m.g = [spec](double t) { return spec.g_at(t); };
  m.h = [spec](double t) { return spec.h_at(t); };
  if (spec.forcing) m.forcing = [spec](double t) { return spec.f_at(t); };
  m.t0 = spec.t0;
  return m;
}

/// Solves the initial value problem for an equation with history phi.
inline Trajectory integrate(const EquationSpec& raw, const ScalarFn& history, double t_end, double step) {
  const EquationSpec spec = raw.resolved();
  Trajectory tr = integrate_model(model_of(spec), history, t_end, step);
  tr.forcing = spec.forcing;
  return tr;
}

/// History from a textual description: "const:<v>", "sin" or "seeded:<n>".
/// A seeded history is piecewise linear with knots every 0.25 time units and
/// values drawn uniformly from [-1, 1].
inline ScalarFn make_history(std::string_view descr, double t0) {
  if (descr == "sin") return [](double t) { return std::sin(t); };
  if (descr.starts_with("const:")) {
    const double v = std::stod(std::string(descr.substr(6)));
    return [v](double) { return v; };
  }
  if (descr.starts_with("seeded:")) {
    const auto seed = static_cast<std::uint32_t>(std::stoul(std::string(descr.substr(7))));
    constexpr std::size_t kKnots = 4096;
    constexpr double kSpacing = 0.25;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto knots = std::make_shared<std::vector<double>>(kKnots);
    for (auto& k : *knots) k = dist(rng);
    return [knots, t0](double t) {
      const double pos = std::max(0.0, (t0 - t) / kSpacing);
      const auto i = static_cast<std::size_t>(pos);
      if (i + 1 >= knots->size()) return knots->back();
      const double w = pos - static_cast<double>(i);
      return (*knots)[i] + w * ((*knots)[i + 1] - (*knots)[i]);
    };
  }
  throw SpecError("unknown history '" + std::string(descr) + "' (expected const:<v>, sin or seeded:<n>)");
}

/// X(t, s) of x'(t) = -b(t) x(h(t)): zero before s, X(s, s) = 1.
inline Trajectory fundamental(const Expr& b, const Expr& h, double s, double t_end, double step) {
  NeutralModel m;
  m.a = [](double) { return 0.0; };
  m.b = [b](double t) { return b(t); };
  m.g = [](double t) { return t; };
  m.h = [h](double t) { return h(t); };
  m.t0 = s;
  const ScalarFn unit = [s](double t) { return t >= s ? 1.0 : 0.0; };
  return integrate_model(m, unit, t_end, step);
}

struct Lemma5Result {
  bool holds = false;
  double margin = 0.0;  ///< 1/e - sup of the integral of b over [h(t), t]
  double sup_integral = 0.0;
};

/// Checks sup_t of the integral of b over [h(t), t] <= 1/e on the given times
/// (non-strict; a rounding slack of 1e-12 is allowed).
inline Lemma5Result lemma5_condition(const Expr& b, const Expr& h, std::span<const double> grid,
                                     std::size_t panels = 256) {
  Lemma5Result r;
  const ScalarFn bf = [&b](double s) { return b(s); };
  for (double t : grid) r.sup_integral = std::max(r.sup_integral, simpson(bf, h(t), t, panels));
  r.margin = 1.0 / std::numbers::e - r.sup_integral;
  r.holds = r.margin >= -1e-12;
  return r;
}

struct Lemma4Result {
  double max_integral = 0.0;  ///< max over t of the integral of X(t,s) b(s) over [t0 + lag, t]
  double min_fundamental = 0.0;
  double lag_bound = 0.0;
};

/// For s on a uniform grid starting at t0, computes X(., s) and the
/// integral of X(t, s) b(s) ds over [t0 + lag_bound, t] (Simpson in s, closing an odd
/// count with a 3/8 panel). Throws PositivityViolation if a sampled
/// X is not positive and InvariantViolation if the integral exceeds 1 + tol.
inline Lemma4Result lemma4_check(const Expr& b, const Expr& h, std::span<const double> s_grid, double t_end,
                                 double step, double tol = 1e-3) {
  if (s_grid.size() < 2) throw Error("s grid needs at least two points");
  Lemma4Result r;
  r.min_fundamental = std::numeric_limits<double>::infinity();
  for (double s : s_grid) r.lag_bound = std::max(r.lag_bound, s - h(s));
  const double t0 = s_grid.front();
  const double ds = s_grid[1] - s_grid[0];

  std::vector<Trajectory> fund;
  fund.reserve(s_grid.size());
  for (double s : s_grid) {
    if (s >= t_end) break;
    fund.push_back(fundamental(b, h, s, t_end, step));
    for (double v : fund.back().x) r.min_fundamental = std::min(r.min_fundamental, v);
  }
  if (r.min_fundamental <= 0.0) {
    throw PositivityViolation("fundamental function not positive: min sample " + std::to_string(r.min_fundamental));
  }

  const double lower = t0 + r.lag_bound;
  const auto first = static_cast<std::size_t>(std::ceil((lower - t0) / ds - 1e-9));
  for (std::size_t ti = first; ti < fund.size(); ++ti) {
    const double t = s_grid[ti];
    // integrand on s_grid[first..ti]
    std::vector<double> vals;
    for (std::size_t si = first; si <= ti; ++si) vals.push_back(fund[si].x_at(t) * b(s_grid[si]));
    double integral = 0.0;
    const std::size_t intervals = vals.size() - 1;
    const std::size_t simpson_intervals = intervals - intervals % 2;
    // an odd count ends with a 3/8 panel over the last three intervals
    const std::size_t even = intervals % 2 == 1 && intervals >= 3 ? simpson_intervals - 2 : simpson_intervals;
    std::vector<double> terms;
    for (std::size_t i = 0; i <= even && even > 0; ++i) {
      const double w = (i == 0 || i == even) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      terms.push_back(w * vals[i]);
    }
    integral = pairwise_sum(terms) * ds / 3.0;
    if (intervals == 1) {
      integral = 0.5 * ds * (vals[0] + vals[1]);
    } else if (intervals % 2 == 1) {
      const std::size_t k = intervals - 3;
      integral += 3.0 * ds / 8.0 * (vals[k] + 3.0 * vals[k + 1] + 3.0 * vals[k + 2] + vals[k + 3]);
    }
    r.max_integral = std::max(r.max_integral, integral);
  }
  if (r.max_integral > 1.0 + tol) {
    throw InvariantViolation("integral of X(t,s) b(s) exceeds 1: " + std::to_string(r.max_integral));
  }
  return r;
}

enum class DecayVerdict { Decaying, NonDecaying, Inconclusive };

inline const char* to_string(DecayVerdict v) {
  switch (v) {
    case DecayVerdict::Decaying: return "decaying";
    case DecayVerdict::NonDecaying: return "non-decaying";
    case DecayVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct DecayEstimate {
  double window_length = 0.0;
  std::vector<double> midpoints;
  std::vector<double> window_sup;  ///< M_k = sup |x| over window k
  double rate = 0.0;               ///< least-squares decay rate of ln M_k
  double ratio = 0.0;              ///< M_last / M_first
  DecayVerdict verdict = DecayVerdict::Inconclusive;
};

inline constexpr double kDecayRatio = 0.5;
inline constexpr double kGrowthRatio = 2.0;

/// Envelope decay over windows of length L after a warmup.
inline DecayEstimate decay_rate(const Trajectory& tr, double warmup, double window) {
  const double start = tr.t0 + warmup;
  const double span = tr.t_end() - start;
  if (!(window > 0.0) || span < 5.0 * window - 1e-9) throw Error("trajectory too short for five decay windows");
  const auto count = static_cast<std::size_t>(std::floor(span / window + 1e-9));

  DecayEstimate est;
  est.window_length = window;
  est.window_sup.assign(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) est.midpoints.push_back(start + (static_cast<double>(k) + 0.5) * window);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.time(i);
    if (t < start - 1e-12) continue;
    auto k = static_cast<std::size_t>(std::floor((t - start) / window + 1e-9));
    if (k >= count) continue;
    est.window_sup[k] = std::max(est.window_sup[k], std::fabs(tr.x[i]));
  }

  std::vector<double> logs;
  for (double m : est.window_sup) logs.push_back(std::log(std::max(m, std::numeric_limits<double>::min())));
  const double n = static_cast<double>(count);
  const double mx = pairwise_sum(est.midpoints) / n;
  const double my = pairwise_sum(logs) / n;
  std::vector<double> sxy, sxx;
  for (std::size_t k = 0; k < count; ++k) {
    sxy.push_back((est.midpoints[k] - mx) * (logs[k] - my));
    sxx.push_back((est.midpoints[k] - mx) * (est.midpoints[k] - mx));
  }
  est.rate = -pairwise_sum(sxy) / pairwise_sum(sxx);

  const double first = est.window_sup.front();
  const double last = est.window_sup.back();
  est.ratio = first > 0.0 ? last / first : (last > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  if (est.ratio < kDecayRatio && est.rate > 0.0) {
    est.verdict = DecayVerdict::Decaying;
  } else if (est.ratio > kGrowthRatio) {
    est.verdict = DecayVerdict::NonDecaying;
  } else {
    est.verdict = DecayVerdict::Inconclusive;
  }
  return est;
}

/// Five equal windows covering the whole run, no warmup. Slowly decaying
/// solutions (power-law envelopes, e.g. proportional delays) only show their
/// decay when the first window includes the start of the run.
inline DecayEstimate envelope_decay(const Trajectory& tr) {
  return decay_rate(tr, 0.0, (tr.t_end() - tr.t0) / 5.0);
}

/// Zero history, forcing switched on at `quiet_until`; returns sup |x|.
/// A smoke test for bounded response, not a proof.
inline double forced_bound_check(const EquationSpec& raw, const Expr& forcing, double t_end, double step,
                                 double quiet_until) {
  const EquationSpec spec = raw.resolved();
  NeutralModel m = model_of(spec);
  m.forcing = [forcing, quiet_until](double t) { return t < quiet_until ? 0.0 : forcing(t); };
  const Trajectory tr = integrate_model(m, [](double) { return 0.0; }, t_end, step);
  double sup = 0.0;
  for (double v : tr.x) {
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    sup = std::max(sup, std::fabs(v));
  }
  return sup;
}

/// CSV with columns t, x, y (12 significant digits).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, std::size_t stride = 1) {
  os << "t,x,y\n";
  const auto old = os.precision(12);
  for (std::size_t i = 0; i < tr.size(); i += std::max<std::size_t>(stride, 1)) {
    os << tr.time(i) << ',' << tr.x[i] << ',' << tr.y[i] << '\n';
  }
  os.precision(old);
}

inline json to_json(const DecayEstimate& d) {
  return json{{"window_length", d.window_length}, {"midpoints", d.midpoints}, {"window_sup", d.window_sup},
              {"rate", d.rate}, {"ratio", d.ratio}, {"verdict", to_string(d.verdict)}};
}

}  // namespace ndstab
