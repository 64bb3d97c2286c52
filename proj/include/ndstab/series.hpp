#pragma once

// Iterated delays, the neutral shift operator (S y)(t) = a(t) y(g(t)) and its
// Neumann inverse, and the series coefficient
//   B(t) = b(t) * sum_j prod_{k<j} a(h(g^[k](t))).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "ndstab/equation.hpp"
#include "ndstab/errors.hpp"
#include "ndstab/params.hpp"

namespace ndstab {

/// Function sampled on a uniform grid, linearly interpolated inside its
/// domain and equal to `below_value` for s < t0.
struct SampledFunction {
  double t0 = 0.0;
  double step = 1.0;
  std::vector<double> values;
  double below_value = 0.0;

  [[nodiscard]] double t1() const { return t0 + step * static_cast<double>(values.size() - 1); }
  [[nodiscard]] double time(std::size_t i) const { return t0 + step * static_cast<double>(i); }

  [[nodiscard]] double operator()(double s) const {
    if (s < t0) return below_value;
    const double pos = (s - t0) / step;
    const auto last = values.size() - 1;
    if (pos > static_cast<double>(last) + 1e-9) throw DomainError("sample query beyond the sampled domain");
    auto i = static_cast<std::size_t>(pos);
    if (i >= last) return values[last];
    const double w = pos - static_cast<double>(i);
    return values[i] + w * (values[i + 1] - values[i]);
  }

  [[nodiscard]] double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
  }

  static SampledFunction sample(const std::function<double(double)>& f, double t0, double step, std::size_t count) {
    SampledFunction out{t0, step, std::vector<double>(count), 0.0};
    for (std::size_t i = 0; i < count; ++i) out.values[i] = f(out.time(i));
    return out;
  }
};

/// Number of series terms kept and the bound on what was dropped.
struct TruncationCert {
  std::size_t terms = 0;
  double tail_bound = 0.0;
  double tol = 0.0;
  bool exact_tail = false;  ///< remaining terms were summed in closed form
};

/// g^[k](t): k-fold composition, g^[0](t) = t. Throws DomainError when the
/// composition leaves the validity window.
inline double iterated_delay(const EquationSpec& spec, double t, std::size_t k) {
  double s = t;
  for (std::size_t i = 0; i < k; ++i) s = spec.g_at(s);
  return s;
}

struct ChainBound {
  double value = 0.0;  ///< t - h(g^[n](t))
  double lower = 0.0;  ///< delta
  double upper = 0.0;  ///< n sigma + tau
};

/// delta <= t - h(g^[n](t)) <= n sigma + tau. Throws InvariantViolation when
/// the sampled value escapes the bounds.
inline ChainBound delay_chain_bounds(const EquationSpec& spec, const ParameterSummary& s, double t, std::size_t n) {
  ChainBound cb;
  cb.value = t - spec.h_at(iterated_delay(spec, t, n));
  cb.lower = s.delta;
  cb.upper = static_cast<double>(n) * s.sigma + s.tau;
  constexpr double kSlack = 1e-9;
  if (cb.value < cb.lower - kSlack || cb.value > cb.upper + kSlack) {
    throw InvariantViolation("t - h(g^[n](t)) = " + std::to_string(cb.value) + " outside [" +
                             std::to_string(cb.lower) + ", " + std::to_string(cb.upper) + "]");
  }
  return cb;
}

/// The operator S tabulated on one grid: coefficient and delayed argument per node.
class NeutralShift {
 public:
  NeutralShift(const EquationSpec& spec, const SampledFunction& like, double t0) : t0_(t0) {
    coeff_.resize(like.values.size());
    arg_.resize(like.values.size());
    for (std::size_t i = 0; i < coeff_.size(); ++i) {
      const double t = like.time(i);
      coeff_[i] = spec.a_at(t);
      arg_[i] = spec.g_at(t);
    }
  }

  [[nodiscard]] SampledFunction apply(const SampledFunction& y) const {
    SampledFunction out{y.t0, y.step, std::vector<double>(y.values.size()), y.below_value};
    for (std::size_t i = 0; i < coeff_.size(); ++i) {
      out.values[i] = arg_[i] >= t0_ ? coeff_[i] * y(arg_[i]) : 0.0;
    }
    return out;
  }

  /// sup |a| over the grid nodes.
  [[nodiscard]] double norm() const {
    double m = 0.0;
    for (double c : coeff_) m = std::max(m, std::fabs(c));
    return m;
  }

 private:
  double t0_;
  std::vector<double> coeff_;
  std::vector<double> arg_;
};

/// (S y)(t) = a(t) y(g(t)) when g(t) >= t0, else 0, on y's grid.
inline SampledFunction apply_S(const EquationSpec& spec, const SampledFunction& y, double t0) {
  return NeutralShift(spec, y, t0).apply(y);
}

/// (E - S)^{-1} y = sum_j S^j y, truncated once the geometric tail
/// |a|^J |y| / (1 - |a|) is at most tol.
inline std::pair<SampledFunction, TruncationCert> neumann_inverse(const EquationSpec& spec, const SampledFunction& y,
                                                                  double tol) {
  const NeutralShift shift(spec, y, y.t0);
  const double A = shift.norm();
  if (!(A < 1.0)) throw InvariantViolation("sup |a| must be below 1 for the Neumann series");
  const double ynorm = y.sup_norm();

  TruncationCert cert;
  cert.tol = tol;
  std::size_t J = 1;
  if (A > 0.0 && ynorm > 0.0) {
    double tail = ynorm / (1.0 - A);
    J = 0;
    while (tail > tol) {
      tail *= A;
      ++J;
    }
    J = std::max<std::size_t>(J, 1);
  }
  cert.terms = J;
  cert.tail_bound = std::pow(A, static_cast<double>(J)) * ynorm / (1.0 - A);

  SampledFunction sum = y;
  SampledFunction term = y;
  for (std::size_t j = 1; j < J; ++j) {
    term = shift.apply(term);
    for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] += term.values[i];
  }
  if (sum.sup_norm() > ynorm / (1.0 - A) + tol) {
    throw InvariantViolation("Neumann sum exceeds |y| / (1 - |a|)");
  }
  return {std::move(sum), cert};
}

enum class SeriesVariant {
  Full,          ///< factors a(.), with a = a0 below t0
  PositivePart,  ///< factors a+(.), with a = 0 below t0
};

/// B(t) (or its positive-part variant) truncated to tolerance `tol`, with the
/// band b0/(1-a0) <= B <= |b|/(1-|a|) (resp. b0 <= B <= |b|/(1-|a+|)) asserted.
inline std::pair<double, TruncationCert> big_B(const EquationSpec& spec, const ParameterSummary& s, double t,
                                               double tol, SeriesVariant variant = SeriesVariant::Full) {
  const bool full = variant == SeriesVariant::Full;
  if (full && !(s.inf_a > 0.0)) throw InvariantViolation("B(t) needs a(t) >= a0 > 0");
  const double A = full ? s.norm_a : s.norm_a_plus;
  const double a0 = s.inf_a;

  TruncationCert cert;
  cert.tol = tol;
  double product = 1.0;
  std::vector<double> terms{1.0};
  double arg = t;  // g^[j-1](t)
  double tail = s.norm_b / (1.0 - A);
  for (std::size_t j = 1;; ++j) {
    tail *= A;
    if (tail <= tol) break;
    const bool below = arg < spec.t0 || spec.h_at(arg) < spec.t0;
    if (below) {
      if (full) terms.push_back(product * a0 / (1.0 - a0));
      cert.exact_tail = true;
      break;
    }
    const double av = spec.a_at(spec.h_at(arg));
    product *= full ? av : std::max(av, 0.0);
    terms.push_back(product);
    arg = spec.g_at(arg);
  }
  cert.terms = terms.size();
  cert.tail_bound = cert.exact_tail ? 0.0 : s.norm_b * std::pow(A, static_cast<double>(terms.size())) / (1.0 - A);

  const double value = spec.b_at(t) * pairwise_sum(terms);
  const double lo = full ? s.inf_b / (1.0 - a0) : s.inf_b;
  const double hi = s.norm_b / (1.0 - A);
  const double slack = tol + 1e-12;
  if (value < lo - slack || value > hi + slack) {
    throw InvariantViolation("B(t) = " + std::to_string(value) + " outside [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "]");
  }
  return {value, cert};
}

/// Debug dump of (t, B(t), terms) triples.
inline void write_series_csv(std::ostream& os, const EquationSpec& spec, const ParameterSummary& s,
                             std::span<const double> ts, double tol, SeriesVariant variant = SeriesVariant::Full) {
  os << "t,B,terms\n";
  os.precision(12);
  for (double t : ts) {
    const auto [value, cert] = big_B(spec, s, t, tol, variant);
    os << t << ',' << value << ',' << cert.terms << '\n';
  }
}

}  // namespace ndstab
