#pragma once

// Command-line front end. `run` is the whole program; main() only forwards.
//
// Exit codes: 0 ok, 1 a reproduced figure or soundness check failed without a
// waiver, 2 bad input (unreadable/invalid equation, bad flags).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ndstab/criteria.hpp"
#include "ndstab/equation.hpp"
#include "ndstab/errors.hpp"
#include "ndstab/params.hpp"
#include "ndstab/report.hpp"
#include "ndstab/simulate.hpp"

#ifndef NDSTAB_DEFAULT_CORPUS
#define NDSTAB_DEFAULT_CORPUS "corpus"
#endif

namespace ndstab::cli {

inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kBadInput = 2;

inline std::filesystem::path corpus_dir() {
  if (const char* env = std::getenv("NDSTAB_CORPUS_DIR"); env && *env) return env;
  return NDSTAB_DEFAULT_CORPUS;
}

namespace detail {

struct Options {
  unsigned seed = 42;
  std::string spec_path;
  std::size_t grid = 10000;
  bool json = false;
  // check
  std::string alpha = "auto";
  // simulate / fundamental
  std::optional<double> t_end;
  double step = 1e-3;
  std::string history = "const:1";
  std::string out;
  std::size_t stride = 1;
  double s = 0.0;
  // sweep / compare
  std::string param = "r";
  std::string alpha_grid;
  std::string r_grid;
  unsigned threads = 0;
  // examples
  bool all = false;
  std::optional<int> id;
  bool no_simulate = false;
};

/// Loads and validates; throws SpecError describing every failed check.
inline EquationSpec load_checked(const Options& o, std::ostream& err) {
  EquationSpec spec = load_spec(o.spec_path);
  const ValidationReport rep = validate(spec, o.grid);
  if (!rep.passed()) {
    for (const auto& c : rep.checks) {
      if (c.passed) continue;
      err << "assumption failed: " << c.id << " (" << c.description << ")";
      if (!c.witnesses.empty()) err << ", e.g. at t = " << c.witnesses.front();
      err << '\n';
    }
    throw SpecError("equation " + o.spec_path + " fails validation");
  }
  return spec;
}

inline std::string history_of(const Options& o) {
  return o.history == "seeded" ? "seeded:" + std::to_string(o.seed) : o.history;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw SpecError("cannot write " + path);
  return f;
}

inline int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  const EquationSpec spec = load_checked(o, err);
  const ParameterSummary s = summarize(spec);
  EvaluationOptions eo;
  if (o.alpha != "auto") {
    try {
      eo.alpha = std::stod(o.alpha);
    } catch (const std::exception&) {
      throw SpecError("--alpha expects 'auto' or a number, got '" + o.alpha + "'");
    }
    if (*eo.alpha < 0.0 || *eo.alpha > 1.0) throw SpecError("--alpha must lie in [0, 1]");
  }
  const auto verdicts = evaluate_all(spec, s, eo);
  if (o.json) {
    json j{{"equation", spec.name}, {"summary", to_json(s)}};
    if (s.inf_a > 0.0) j["series_bound_alpha_interval"] = to_json(series_bound_alpha_interval(s));
    j["verdicts"] = json::array();
    for (const auto& v : verdicts) j["verdicts"].push_back(to_json(v));
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << spec.name << ": |a| " << ndstab::detail::fmt12(s.norm_a) << ", a0 " << ndstab::detail::fmt12(s.inf_a)
      << ", |b| " << ndstab::detail::fmt12(s.norm_b) << ", b0 " << ndstab::detail::fmt12(s.inf_b) << ", sigma "
      << ndstab::detail::fmt12(s.sigma) << ", tau " << ndstab::detail::fmt12(s.tau) << ", delta "
      << ndstab::detail::fmt12(s.delta) << '\n';
  for (const auto& v : verdicts) {
    out << "  " << v.criterion << ": ";
    if (!v.applicable) {
      out << "not applicable (" << v.reason << ")\n";
      continue;
    }
    out << (v.satisfied ? "satisfied" : "not satisfied") << ", margin " << ndstab::detail::fmt12(v.margin);
    if (v.alpha) out << ", alpha " << ndstab::detail::fmt12(*v.alpha);
    out << ", " << to_string(v.kind) << ", " << to_string(v.certification) << '\n';
  }
  return kOk;
}

inline int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const EquationSpec spec = load_checked(o, err);
  const double t_end = o.t_end.value_or(std::min(spec.horizon, spec.t0 + 300.0));
  const Trajectory tr = integrate(spec, make_history(history_of(o), spec.t0), t_end, o.step);
  if (o.out.empty()) {
    write_trajectory_csv(out, tr, o.stride);
    return kOk;
  }
  auto f = open_out(o.out);
  write_trajectory_csv(f, tr, o.stride);
  std::optional<DecayEstimate> d;
  try {
    d = envelope_decay(tr);
  } catch (const Error&) {
  }
  if (o.json) {
    json j{{"nodes", tr.size()}, {"max_fixed_point_iterations", tr.stats.max_iterations}};
    j["decay"] = d ? to_json(*d) : json(nullptr);
    out << j.dump(2) << '\n';
  } else {
    out << "wrote " << tr.size() << " rows to " << o.out << '\n';
    if (d) out << "envelope: " << to_string(d->verdict) << ", ratio " << ndstab::detail::fmt12(d->ratio) << ", rate "
               << ndstab::detail::fmt12(d->rate) << '\n';
  }
  return kOk;
}

inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const EquationSpec spec = load_checked(o, err);
  const auto alphas = parse_range(o.alpha_grid);
  std::vector<double> rs;
  if (!o.r_grid.empty()) rs = parse_range(o.r_grid);
  const auto rows = sweep_alpha_r(spec, o.param, alphas, rs, o.threads);
  auto f = open_out(o.out);
  write_sweep_csv(f, rows);
  out << "wrote " << rows.size() << " alpha rows to " << o.out << '\n';
  return kOk;
}

inline int cmd_examples(const Options& o, std::ostream& out, std::ostream&) {
  const auto dir = corpus_dir();
  Waivers waivers;
  if (std::filesystem::exists(dir / "waivers.json")) waivers = load_waivers(dir / "waivers.json");
  ReproductionOptions ro;
  ro.simulate = !o.no_simulate;
  ro.step = o.step;
  ro.history = history_of(o);
  std::vector<ExampleReport> reps;
  if (o.id) {
    reps.push_back(reproduce_example(*o.id, dir, waivers, ro));
  } else {
    reps = reproduce_examples(dir, waivers, ro);
  }
  bool ok = true;
  for (const auto& r : reps) {
    ok = ok && r.ok();
    const bool predicted = std::any_of(r.verdicts.begin(), r.verdicts.end(),
                                       [](const CriterionVerdict& v) { return v.applicable && v.satisfied; });
    if (predicted && r.simulation && r.simulation->verdict != DecayVerdict::Decaying) ok = false;
  }
  if (o.json) {
    json j = json::array();
    for (const auto& r : reps) j.push_back(to_json(r));
    out << j.dump(2) << '\n';
  } else {
    for (const auto& r : reps) print_example(out, r);
  }
  return ok ? kOk : kCheckFailed;
}

inline int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
  const EquationSpec spec = load_checked(o, err);
  const ParameterSummary s = summarize(spec);
  std::optional<std::string> param;
  if (spec.params.count(o.param)) param = o.param;
  const auto rows = compare_baselines(spec, s, param);
  if (o.json) {
    json j = json::array();
    for (const auto& r : rows) j.push_back(to_json(r));
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << "method                  applicable  range of limsup int b          value         satisfied\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-24s%-12s[%-12s, %-12s)   %-14s%s\n", r.method.c_str(), r.applicable ? "yes" : "no",
                  ndstab::detail::fmt12(r.lower).c_str(), ndstab::detail::fmt12(r.upper).c_str(),
                  ndstab::detail::fmt12(r.value).c_str(), r.satisfied ? "yes" : "no");
    out << line;
    if (!r.note.empty()) out << "    " << r.note << '\n';
  }
  return kOk;
}

inline int cmd_fundamental(const Options& o, std::ostream& out, std::ostream& err) {
  const EquationSpec spec = load_checked(o, err).resolved();
  if (!spec.in_window(o.s)) throw SpecError("--s must lie in the equation's window");
  const double t_end = o.t_end.value_or(std::min(spec.horizon, o.s + 50.0));
  const Trajectory tr = fundamental(spec.b, spec.h, o.s, t_end, o.step);
  double lo = tr.x.front();
  for (double v : tr.x) lo = std::min(lo, v);
  if (!o.out.empty()) {
    auto f = open_out(o.out);
    write_trajectory_csv(f, tr, o.stride);
  }
  if (o.json) {
    out << json{{"s", o.s}, {"t_end", tr.t_end()}, {"min", lo}, {"positive", lo > 0.0}}.dump(2) << '\n';
  } else {
    out << "X(t, " << ndstab::detail::fmt12(o.s) << ") on [" << ndstab::detail::fmt12(o.s) << ", "
        << ndstab::detail::fmt12(tr.t_end()) << "]: min " << ndstab::detail::fmt12(lo)
        << (lo > 0.0 ? " (positive)" : " (not positive)") << '\n';
  }
  return kOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  detail::Options o;
  CLI::App app{"Stability criteria and simulation for scalar neutral delay equations", "ndstab"};
  app.require_subcommand(1);
  app.add_option("--seed", o.seed, "Seed for generated histories (default 42)");

  auto spec_arg = [&](CLI::App* sub) {
    sub->add_option("spec", o.spec_path, "Equation file (JSON)")->required();
    sub->add_option("--grid", o.grid, "Validation grid points (default 10000)");
  };

  auto* check = app.add_subcommand("check", "Evaluate every stability criterion");
  spec_arg(check);
  check->add_option("--alpha", o.alpha, "auto, or a fixed alpha in [0, 1]");
  check->add_flag("--json", o.json, "Machine-readable output");

  auto* simulate = app.add_subcommand("simulate", "Integrate the equation and write a t,x,y CSV");
  spec_arg(simulate);
  simulate->add_option("--t-end", o.t_end, "End time (default min(horizon, t0 + 300))");
  simulate->add_option("--step", o.step, "Step size (default 1e-3)");
  simulate->add_option("--history", o.history, "const:<v>, sin, seeded or seeded:<n>");
  simulate->add_option("--out", o.out, "CSV path (default: standard output)");
  simulate->add_option("--stride", o.stride, "Write every n-th node");
  simulate->add_flag("--json", o.json, "Machine-readable summary");

  auto* sweep = app.add_subcommand("sweep", "Feasible (alpha, r) band of the series test");
  spec_arg(sweep);
  sweep->add_option("--param", o.param, "Parameter b is linear in (default r)");
  sweep->add_option("--alpha-grid", o.alpha_grid, "start:stop:step")->required();
  sweep->add_option("--r-grid", o.r_grid, "start:stop:step; adds per-cell feasibility");
  sweep->add_option("--out", o.out, "CSV path")->required();
  sweep->add_option("--threads", o.threads, "Worker threads (default: all cores)");

  auto* examples = app.add_subcommand("examples", "Reproduce the worked examples");
  auto* all = examples->add_flag("--all", o.all, "All five examples");
  auto* id = examples->add_option("--id", o.id, "One example, 1-5")->check(CLI::Range(1, kExampleCount));
  all->excludes(id);
  examples->add_flag("--no-simulate", o.no_simulate, "Skip the simulation cross-check");
  examples->add_option("--step", o.step, "Simulation step (default 1e-3)");
  examples->add_option("--history", o.history, "Simulation history (default const:1)");
  examples->add_flag("--json", o.json, "Machine-readable output");

  auto* compare = app.add_subcommand("compare", "Baseline thresholds next to the series criteria");
  spec_arg(compare);
  compare->add_option("--param", o.param, "Family parameter (default r)");
  compare->add_flag("--json", o.json, "Machine-readable output");

  auto* fund = app.add_subcommand("fundamental", "Fundamental function of the non-neutral part");
  spec_arg(fund);
  fund->add_option("--s", o.s, "Start time s")->required();
  fund->add_option("--t-end", o.t_end, "End time (default min(horizon, s + 50))");
  fund->add_option("--step", o.step, "Step size (default 1e-3)");
  fund->add_option("--out", o.out, "CSV path");
  fund->add_option("--stride", o.stride, "Write every n-th node");
  fund->add_flag("--json", o.json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help("", CLI::AppFormatMode::All) : subs.back()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kBadInput;
  }
  if (examples->parsed() && !o.all && !o.id) {
    err << "examples: pass --all or --id <n>\n";
    return kBadInput;
  }

  try {
    if (check->parsed()) return detail::cmd_check(o, out, err);
    if (simulate->parsed()) return detail::cmd_simulate(o, out, err);
    if (sweep->parsed()) return detail::cmd_sweep(o, out, err);
    if (examples->parsed()) return detail::cmd_examples(o, out, err);
    if (compare->parsed()) return detail::cmd_compare(o, out, err);
    if (fund->parsed()) return detail::cmd_fundamental(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace ndstab::cli
