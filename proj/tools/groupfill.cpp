// Copyright 2026 The Groupfill Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// groupfill: command-line front end for the power-allocation solvers.
//
// Exit codes: 0 success, 1 verification failure, 2 input error,
// 3 numerical tolerance not reached.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "groupfill.hpp"
#include "groupfill/problem_io.hpp"

namespace {

using namespace groupfill;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitTolerance = 3;

struct Options {
  std::string file;
  std::string out;
  bool bits = false;
  double tol = kDefaultBisectionTol;
  std::uint64_t seed = 1;
  std::optional<std::size_t> samples;
  std::string ensemble = "orth-iid";
  std::string grid;
  std::string curves;
  std::string mode = "fixed";
  bool tpc_only = false;
  bool pgpc_only = false;
  std::vector<std::uint64_t> random;
  double inject = 0.0;
};

std::string fmt(double v) { return format_real(v); }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fmt(v[i]);
  }
  return s;
}

// Sends the report to --out when given, otherwise to stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Error(ErrorCode::kSchemaError, "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

// The solve commands print to stdout and optionally save a JSON copy.
void write_json(const std::string& path, const nlohmann::json& doc) {
  if (path.empty()) return;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kSchemaError, "cannot write '" + path + "'");
  f << doc.dump(2) << '\n';
}

std::string echo(const std::string& cmd, const Options& o) {
  std::ostringstream os;
  os << "# groupfill " << cmd;
  if (!o.file.empty()) os << " file=" << o.file;
  os << " tol=" << fmt(o.tol) << " seed=" << o.seed;
  if (o.samples) os << " samples=" << *o.samples;
  if (cmd == "montecarlo") os << " ensemble=" << o.ensemble;
  if (cmd == "sweep") os << " mode=" << o.mode << " grid=" << o.grid << " curves=" << o.curves;
  if (o.tpc_only) os << " tpc-only";
  if (o.pgpc_only) os << " pgpc-only";
  if (!o.random.empty()) {
    os << " random=";
    for (std::size_t i = 0; i < o.random.size(); ++i) os << (i ? "," : "") << o.random[i];
  }
  if (o.inject != 0.0) os << " inject-perturbation=" << fmt(o.inject);
  os << " units=" << (o.bits ? "bits" : "nats");
  return os.str();
}

double unit_scale(const Options& o) { return o.bits ? kNatsToBits : 1.0; }
const char* unit_name(const Options& o) { return o.bits ? "bits" : "nats"; }

RawProblem load(const Options& o) {
  if (o.file.empty()) throw Error(ErrorCode::kSchemaError, "a problem file is required");
  return read_problem_file(o.file);
}

int cmd_solve_fixed(const Options& o) {
  const ValidatedProblem problem = validate(load(o));
  auto& os = std::cout;
  os << echo("solve-fixed", o) << '\n';

  nlohmann::json doc;
  doc["command"] = "solve-fixed";
  doc["units"] = unit_name(o);
  std::vector<double> powers;
  if (o.tpc_only || o.pgpc_only) {
    const PowerAllocation a = o.tpc_only
                                  ? waterfill_tpc(problem.gains, problem.partition.total())
                                  : waterfill_pgpc(problem);
    powers = expand_to_original(problem, a.powers);
    const double cap = capacity_fixed(problem.gains, a);
    os << "mode: " << (o.tpc_only ? "tpc-only" : "pgpc-only") << '\n';
    os << "powers: " << join(powers) << '\n';
    os << "capacity_" << unit_name(o) << ": " << fmt(cap * unit_scale(o)) << '\n';
    doc["mode"] = o.tpc_only ? "tpc-only" : "pgpc-only";
    doc["powers"] = powers;
    doc["capacity"] = cap * unit_scale(o);
    write_json(o.out, doc);
    return kExitOk;
  }

  const FixedSolveReport r = opa_fixed(problem, o.tol);
  const KktResiduals kkt = kkt_residuals(problem, r);
  powers = expand_to_original(problem, r.allocation.powers);
  os << "powers: " << join(powers) << '\n';
  os << "mu: " << fmt(r.duals.mu) << '\n';
  for (std::size_t j = 0; j < problem.num_groups(); ++j) {
    os << "lambda[" << problem.group_map[j] + 1 << "]: " << fmt(r.duals.lambdas[j])
       << " budget=" << fmt(r.group_budgets[j])
       << (r.active_groups[j] ? " active" : "") << '\n';
  }
  os << "tpc_active: " << (r.active_tpc ? "yes" : "no") << '\n';
  os << "mu_residual: " << fmt(r.duals.mu_residual) << '\n';
  os << "capacity_" << unit_name(o) << ": " << fmt(r.capacity_nats * unit_scale(o)) << '\n';
  os << "kkt_max_residual: " << fmt(kkt.max()) << '\n';
  doc["mode"] = "joint";
  doc["powers"] = powers;
  doc["mu"] = r.duals.mu;
  doc["mu_residual"] = r.duals.mu_residual;
  nlohmann::json lambdas = nlohmann::json::array();
  for (std::size_t j = 0; j < problem.num_groups(); ++j) {
    lambdas.push_back({{"group", problem.group_map[j] + 1},
                       {"lambda", r.duals.lambdas[j]},
                       {"residual", r.duals.lambda_residuals[j]},
                       {"budget", r.group_budgets[j]},
                       {"active", static_cast<bool>(r.active_groups[j])}});
  }
  doc["lambdas"] = lambdas;
  doc["capacity"] = r.capacity_nats * unit_scale(o);
  doc["kkt_max_residual"] = kkt.max();
  write_json(o.out, doc);
  return kExitOk;
}

int cmd_solve_fading(const Options& o) {
  const RawProblem raw = load(o);
  if (!raw.gains.empty()) {
    std::cerr << "warning: gains are ignored by the fading solver (i.i.d. gains assumed)\n";
  }
  const GroupPartition part = validate_partition(raw);
  const FadingSolveReport r = opa_fading(part);
  auto& os = std::cout;
  os << echo("solve-fading", o) << '\n';
  os << "powers: " << join(r.allocation.powers) << '\n';
  os << "active_groups:";
  for (std::size_t j : r.active_groups) os << ' ' << part.source_index(j) + 1;
  os << '\n';
  os << "rounds: " << r.rounds << '\n';
  os << "case: " << to_string(detect_case(part)) << '\n';
  os << "residual_power: " << fmt(r.residual_power) << '\n';
  os << "residual_count: " << r.residual_count << '\n';
  os << "ergodic_capacity_" << unit_name(o) << ": "
     << fmt(ergodic_capacity_closed_form(r.allocation.powers) * unit_scale(o)) << '\n';
  nlohmann::json doc;
  doc["command"] = "solve-fading";
  doc["units"] = unit_name(o);
  doc["powers"] = r.allocation.powers;
  std::vector<std::size_t> active;
  for (std::size_t j : r.active_groups) active.push_back(part.source_index(j) + 1);
  doc["active_groups"] = active;
  doc["rounds"] = r.rounds;
  doc["case"] = to_string(detect_case(part));
  doc["residual_power"] = r.residual_power;
  doc["residual_count"] = r.residual_count;
  doc["ergodic_capacity"] = ergodic_capacity_closed_form(r.allocation.powers) * unit_scale(o);
  write_json(o.out, doc);
  return kExitOk;
}

int cmd_sweep(const Options& o) {
  SweepSpec spec;
  if (o.mode == "fixed" || o.mode == "FIXED") {
    spec.mode = SweepMode::kFixed;
  } else if (o.mode == "fading" || o.mode == "FADING") {
    spec.mode = SweepMode::kFading;
  } else {
    throw Error(ErrorCode::kSchemaError, "mode must be fixed or fading");
  }
  if (o.grid.empty()) throw Error(ErrorCode::kSchemaError, "--grid is required");
  spec.budget_grid = parse_grid(o.grid);
  spec.curves = parse_curves(o.curves.empty() ? (spec.mode == SweepMode::kFixed
                                                     ? "JOINT,TPC_ONLY,PGPC_ONLY"
                                                     : "JOINT,TPC_ONLY,PGPC_ONLY,JENSEN")
                                              : o.curves);
  check_spec(spec);

  const RawProblem raw = load(o);
  std::vector<SweepRow> rows;
  if (spec.mode == SweepMode::kFixed) {
    rows = run_fixed_sweep(validate(raw), spec, o.tol);
  } else {
    rows = run_fading_sweep(validate_partition(raw), spec);
  }
  Sink sink(o.out);
  auto& os = sink.stream();
  os << echo("sweep", o) << '\n';
  write_csv(os, spec, rows, unit_scale(o));
  return kExitOk;
}

int cmd_verify(const Options& o) {
  VerifyOptions vo;
  vo.tol = o.tol;
  vo.seed = o.seed;
  vo.inject_perturbation = o.inject;
  if (o.samples) vo.saa_samples = vo.mc_samples = *o.samples;

  VerifyReport report;
  if (!o.random.empty()) {
    if (o.random.size() != 4) throw Error(ErrorCode::kSchemaError, "--random takes m s seed count");
    report = verify_random(o.random[0], o.random[1], o.random[2], o.random[3], vo);
  } else {
    const RawProblem raw = load(o);
    if (!raw.gains.empty()) verify_fixed(validate(raw), vo, report);
    verify_fading(validate_partition(raw), vo, report);
  }

  Sink sink(o.out);
  auto& os = sink.stream();
  os << echo("verify", o) << '\n';
  for (const auto& c : report.checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << fmt(c.value)
       << " limit=" << fmt(c.limit) << " margin=" << fmt(c.margin());
    if (!c.detail.empty()) os << " (" << c.detail << ')';
    os << '\n';
  }
  os << "summary: " << report.checks.size() - report.failures() << '/' << report.checks.size()
     << " checks passed\n";
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

ChannelEnsemble parse_ensemble(const std::string& spec, std::size_t m, std::uint64_t seed) {
  if (spec == "orth-iid") return ChannelEnsemble::orthogonal_iid(m, seed);
  if (spec == "rayleigh-miso") return ChannelEnsemble::rayleigh_miso(m, seed);
  const std::string prefix = "rayleigh-mimo:";
  if (spec.rfind(prefix, 0) == 0) {
    const std::string dims = spec.substr(prefix.size());
    const auto x = dims.find('x');
    std::size_t n = 0;
    std::size_t t = 0;
    try {
      std::size_t used = 0;
      n = std::stoul(dims.substr(0, x), &used);
      if (x == std::string::npos || used != x) throw std::invalid_argument("dims");
      t = std::stoul(dims.substr(x + 1), &used);
      if (used != dims.size() - x - 1) throw std::invalid_argument("dims");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kSchemaError, "ensemble must be rayleigh-mimo:NxM");
    }
    if (t != m) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "ensemble has " + std::to_string(t) + " transmit antennas, problem has " +
                      std::to_string(m));
    }
    return ChannelEnsemble::rayleigh_mimo(n, t, seed);
  }
  throw Error(ErrorCode::kSchemaError, "unknown ensemble '" + spec + "'");
}

int cmd_montecarlo(const Options& o) {
  const std::size_t n = o.samples.value_or(100000);
  if (n == 0) throw Error(ErrorCode::kDomainError, "--samples must be positive");
  const RawProblem raw = load(o);
  const GroupPartition part = validate_partition(raw);
  const ChannelEnsemble ens = parse_ensemble(o.ensemble, part.num_antennas(), o.seed);
  const FadingSolveReport r = opa_fading(part);
  const MonteCarloEstimate est = ergodic_capacity_mc(ens, r.allocation.powers, n);

  Sink sink(o.out);
  auto& os = sink.stream();
  os << echo("montecarlo", o) << '\n';
  os << "ensemble: " << ens.describe() << '\n';
  os << "powers: " << join(r.allocation.powers) << '\n';
  os << "mean_" << unit_name(o) << ": " << fmt(est.mean * unit_scale(o)) << '\n';
  os << "std_error_" << unit_name(o) << ": " << fmt(est.std_error * unit_scale(o)) << '\n';
  os << "samples: " << est.samples << '\n';
  os << "seed: " << est.seed << '\n';
  if (ens.kind() == ChannelKind::kOrthogonalIid) {
    os << "closed_form_" << unit_name(o) << ": "
       << fmt(ergodic_capacity_closed_form(ens, r.allocation.powers) * unit_scale(o)) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power allocation under total and per-group power constraints"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub, bool file_required) {
    auto* f = sub->add_option("file", o.file, "Problem file (.json or .toml)");
    if (file_required) f->required();
    sub->add_option("--out", o.out,
                    "Output path (JSON report for solve-*, otherwise replaces stdout)");
    sub->add_flag("--bits", o.bits, "Report capacities in bits instead of nats");
    sub->add_option("--tol", o.tol, "Bisection tolerance (power units)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed");
  };

  auto* solve_fixed = app.add_subcommand("solve-fixed", "Optimal allocation, fixed channel");
  common(solve_fixed, true);
  auto* only = solve_fixed->add_flag("--tpc-only", o.tpc_only, "Ignore the group caps");
  solve_fixed->add_flag("--pgpc-only", o.pgpc_only, "Ignore the total budget")->excludes(only);

  auto* solve_fading = app.add_subcommand("solve-fading", "Optimal allocation, i.i.d. fading");
  common(solve_fading, true);

  auto* sweep = app.add_subcommand("sweep", "Capacity versus total budget as CSV");
  common(sweep, true);
  sweep->add_option("--grid", o.grid, "Budget grid a:b:step")->required();
  sweep->add_option("--curves", o.curves, "Comma list of JOINT,TPC_ONLY,PGPC_ONLY,JENSEN");
  sweep->add_option("--mode", o.mode, "fixed or fading")->check(CLI::IsMember({"fixed", "fading"}));

  auto* verify = app.add_subcommand("verify", "Check solver outputs against the oracles");
  common(verify, false);
  verify->add_option("--random", o.random, "m s seed count")->expected(4);
  verify->add_option("--samples", o.samples, "Sample count for the fading checks");
  verify->add_option("--inject-perturbation", o.inject,
                     "Move EPS power off the largest entry before checking");

  auto* mc = app.add_subcommand("montecarlo", "Monte-Carlo ergodic capacity");
  common(mc, true);
  mc->add_option("--ensemble", o.ensemble, "orth-iid | rayleigh-miso | rayleigh-mimo:NxM");
  mc->add_option("--samples", o.samples, "Sample count N");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve_fixed) return cmd_solve_fixed(o);
    if (*solve_fading) return cmd_solve_fading(o);
    if (*sweep) return cmd_sweep(o);
    if (*verify) return cmd_verify(o);
    if (*mc) return cmd_montecarlo(o);
  } catch (const ToleranceError& e) {
    std::cerr << "error: " << e.what() << " (residual " << fmt(e.residual()) << ")\n";
    return kExitTolerance;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
  return kExitInput;
}
