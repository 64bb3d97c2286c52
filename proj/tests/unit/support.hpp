#pragma once

#include <string>

#include "catch_amalgamated.hpp"
#include "ndstab.hpp"

namespace testing {

inline std::string corpus(const std::string& file) { return std::string(NDSTAB_DEFAULT_CORPUS) + "/" + file; }

inline ndstab::EquationSpec load(const std::string& file) { return ndstab::load_spec(corpus(file)); }

/// Equation from JSON text.
inline ndstab::EquationSpec spec(const std::string& text) { return ndstab::spec_from_json(ndstab::json::parse(text)); }

inline ndstab::ParameterSummary summary(double norm_a, double inf_a, double norm_b, double sigma, double tau,
                                        double delta) {
  ndstab::ParameterSummary s;
  s.norm_a = norm_a;
  s.inf_a = inf_a;
  s.norm_a_plus = inf_a >= 0.0 ? norm_a : std::max(norm_a, 0.0);
  s.norm_a_minus = inf_a >= 0.0 ? 0.0 : -inf_a;
  s.norm_b = norm_b;
  s.inf_b = norm_b;
  s.sigma = sigma;
  s.tau = tau;
  s.delta = delta;
  return s;
}

}  // namespace testing
