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

// Verification suites: solver outputs checked against the oracles, the
// optimality conditions, the majorization witness and Schur-concavity.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "groupfill/ergodic.hpp"
#include "groupfill/fading_solver.hpp"
#include "groupfill/fixed_solver.hpp"
#include "groupfill/generators.hpp"
#include "groupfill/oracle.hpp"
#include "groupfill/problem.hpp"
#include "groupfill/random.hpp"
#include "groupfill/sweep.hpp"

namespace groupfill {

/// One check: passes iff value <= limit.
struct CheckResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
  std::string detail;

  double margin() const { return limit - value; }
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  void add(std::string name, double value, double limit, std::string detail = {}) {
    const bool ok = value <= limit;  // NaN fails
    checks.push_back({std::move(name), value, limit, ok, std::move(detail)});
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.passed; }));
  }
  bool passed() const { return failures() == 0; }
};

struct VerifyOptions {
  double tol = kDefaultBisectionTol;
  double oracle_tol = 1e-6;
  double kkt_tol = 1e-8;
  double grid_tol = 1e-2;
  double grid_resolution = 1e-3;
  double saa_tol = 5e-3;
  /// Power moved off the largest entry before checking (negative control).
  double inject_perturbation = 0.0;
  std::uint64_t seed = 1;
  std::size_t saa_samples = 20000;
  std::size_t mc_samples = 20000;
  std::size_t perturbations = 200;
  std::size_t schur_pairs = 100;
  bool run_saa = true;
};

namespace detail {

inline void inject(std::vector<double>& p, double eps) {
  if (eps <= 0.0 || p.empty()) return;
  auto it = std::max_element(p.begin(), p.end());
  *it = std::max(0.0, *it - eps);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace detail

/// Random feasible perturbation of an active-group allocation: each active
/// group gives up a random share of its cap and the freed power is spread
/// evenly over the antennas of the inactive groups. The shares are scaled down
/// when needed so that no inactive cap is exceeded. Empty when every group is
/// active (there is nowhere to move power).
inline std::vector<double> active_group_perturbation(const GroupPartition& partition,
                                                     const FadingSolveReport& report,
                                                     SampleStream& rng) {
  if (report.residual_count == 0) return {};
  std::vector<double> p = report.allocation.powers;
  std::vector<bool> active(partition.num_groups(), false);
  for (std::size_t j : report.active_groups) active[j] = true;

  double per_antenna_cap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < partition.num_groups(); ++j) {
    if (active[j]) continue;
    per_antenna_cap = std::min(per_antenna_cap,
                               partition.cap(j) / static_cast<double>(partition.group_size(j)));
  }
  const double count = static_cast<double>(report.residual_count);
  const double headroom = std::max(0.0, per_antenna_cap * count - report.residual_power);

  std::vector<double> eps(partition.num_groups(), 0.0);
  double freed = 0.0;
  for (std::size_t j : report.active_groups) {
    eps[j] = rng.uniform() * partition.cap(j);
    freed += eps[j];
  }
  const double scale = freed > headroom ? headroom / freed : 1.0;
  freed = 0.0;
  for (std::size_t j : report.active_groups) {
    const double e = eps[j] * scale;
    freed += e;
    const double share = (partition.cap(j) - e) / static_cast<double>(partition.group_size(j));
    for (std::size_t i : partition.group(j)) p[i] = share;
  }
  const double rest = std::min(per_antenna_cap, (report.residual_power + freed) / count);
  for (std::size_t j = 0; j < partition.num_groups(); ++j) {
    if (active[j]) continue;
    for (std::size_t i : partition.group(j)) p[i] = rest;
  }
  return p;
}

/// A random feasible pair (x, y) with x majorized by y and equal sums: y is
/// a random convex combination of polytope vertices and x blends y with its
/// per-group averages, which preserves every group sum.
inline std::pair<std::vector<double>, std::vector<double>> random_majorization_pair(
    const GroupPartition& partition, SampleStream& rng) {
  const LaminarPolytope poly{partition};
  const std::size_t m = partition.num_antennas();
  std::vector<double> y(m, 0.0);
  double weight_sum = 0.0;
  std::vector<double> weights(3);
  for (auto& w : weights) {
    w = rng.uniform();
    weight_sum += w;
  }
  for (double w : weights) {
    std::vector<double> c(m);
    for (auto& v : c) v = rng.uniform();
    const auto vertex = lp_greedy(c, poly);
    for (std::size_t i = 0; i < m; ++i) y[i] += (w / weight_sum) * vertex.powers[i];
  }
  const double alpha = rng.uniform();
  std::vector<double> x = y;
  for (std::size_t j = 0; j < partition.num_groups(); ++j) {
    const double mean = group_sum(partition, j, y) / static_cast<double>(partition.group_size(j));
    for (std::size_t i : partition.group(j)) x[i] = alpha * y[i] + (1.0 - alpha) * mean;
  }
  return {std::move(x), std::move(y)};
}

/// Fixed-channel checks for one problem. `label` prefixes every check name.
inline void verify_fixed(const ValidatedProblem& problem, const VerifyOptions& opts,
                         VerifyReport& report, const std::string& label = "fixed") {
  const FixedSolveReport solved = opa_fixed(problem, opts.tol);
  std::vector<double> p = solved.allocation.powers;
  detail::inject(p, opts.inject_perturbation);
  const double capacity = capacity_fixed(problem.gains, p);

  const OracleResult oracle = oracle_fixed(problem);
  report.add(label + ".oracle_gap", std::abs(capacity - oracle.objective), opts.oracle_tol,
             "certified_gap=" + format_real(oracle.certified_gap));

  const KktResiduals kkt = kkt_residuals(problem, p, solved.duals.mu, solved.duals.lambdas);
  report.add(label + ".kkt", kkt.max(), opts.kkt_tol);

  const FeasibilitySlack slack = compute_slack(problem.partition, p);
  double violation = std::max(0.0, -slack.total);
  for (double s : slack.groups) violation = std::max(violation, -s);
  violation = std::max(violation, -slack.min_power);
  report.add(label + ".feasibility", violation, kFeasibilityTol);

  if (problem.partition.cap_sum() > problem.partition.total()) {
    double dual = solved.duals.mu_residual;
    for (double r : solved.duals.lambda_residuals) dual = std::max(dual, r);
    report.add(label + ".dual_equations", dual, opts.tol);
  }
  double bound_violation = std::max(0.0, -solved.duals.mu);
  bound_violation = std::max(bound_violation, solved.duals.mu - problem.gains.max());
  for (std::size_t j = 0; j < problem.num_groups(); ++j) {
    double group_max = 0.0;
    for (std::size_t i : problem.partition.group(j)) group_max = std::max(group_max, problem.gains[i]);
    const double lambda = solved.duals.lambdas[j];
    bound_violation = std::max({bound_violation, -lambda, lambda - group_max});
  }
  report.add(label + ".dual_bounds", bound_violation, 0.0);

  if (problem.num_antennas() <= 3) {
    const OracleResult grid = grid_oracle(problem, opts.grid_resolution);
    report.add(label + ".grid_gap", std::abs(capacity - grid.objective), opts.grid_tol);
  }
}

/// Fading checks for one partition: sample-average oracle agreement,
/// majorization witness, Schur-concavity and case consistency.
inline void verify_fading(const GroupPartition& partition, const VerifyOptions& opts,
                          VerifyReport& report, const std::string& label = "fading") {
  const FadingSolveReport solved = opa_fading(partition);
  std::vector<double> p = solved.allocation.powers;
  detail::inject(p, opts.inject_perturbation);

  if (opts.run_saa) {
    const FadingSampleAverage saa(partition.num_antennas(), opts.saa_samples, opts.seed);
    FrankWolfeOptions fw;
    fw.gap_tol = 1e-6;
    fw.step = FrankWolfeStep::kPairwise;
    const OracleResult oracle = frank_wolfe(saa.as_objective(), LaminarPolytope{partition}, fw);
    report.add(label + ".saa_allocation", detail::max_abs_diff(p, oracle.allocation.powers),
               opts.saa_tol);
    report.add(label + ".saa_objective", oracle.objective - saa.value(p), 1e-6);
  }

  SampleStream rng(opts.seed, 0x6d616a6fULL);
  std::size_t tried = 0;
  std::size_t failed = 0;
  for (std::size_t k = 0; k < opts.perturbations; ++k) {
    const auto alt = active_group_perturbation(partition, solved, rng);
    if (alt.empty()) break;
    ++tried;
    if (!majorizes(p, alt)) ++failed;
  }
  report.add(label + ".majorization", static_cast<double>(failed), 0.0,
             std::to_string(tried) + " perturbations");

  const auto ensemble = ChannelEnsemble::orthogonal_iid(partition.num_antennas(), opts.seed);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
  for (std::size_t k = 0; k < opts.schur_pairs; ++k) {
    const auto [x, y] = random_majorization_pair(partition, rng);
    if (!majorizes(x, y)) continue;
    ++pairs;
    const auto fx = ergodic_capacity_mc(ensemble, x, opts.mc_samples);
    const auto fy = ergodic_capacity_mc(ensemble, y, opts.mc_samples);
    const double se = std::hypot(fx.std_error, fy.std_error);
    worst = std::max(worst, fy.mean - fx.mean - 3.0 * se);
  }
  if (pairs > 0) {
    report.add(label + ".schur", worst, 0.0, std::to_string(pairs) + " pairs");
  }

  double case_error = 0.0;
  const FadingCase c = detect_case(partition);
  for (std::size_t j = 0; j < partition.num_groups(); ++j) {
    const double n = static_cast<double>(partition.group_size(j));
    const double expect = c == FadingCase::kCase1
                              ? partition.total() / static_cast<double>(partition.num_antennas())
                              : partition.cap(j) / n;
    if (c == FadingCase::kGeneral) break;
    for (std::size_t i : partition.group(j)) {
      case_error = std::max(case_error, std::abs(p[i] - expect));
    }
  }
  report.add(label + ".case", case_error, 0.0, to_string(c));
}

/// Fixed checks on `count` random problems with m antennas and s groups,
/// plus the cheap fading checks on their partitions.
inline VerifyReport verify_random(std::size_t m, std::size_t s, std::uint64_t seed,
                                  std::size_t count, VerifyOptions opts) {
  if (m == 0 || s == 0 || s > m) {
    throw Error(ErrorCode::kDomainError, "random suite needs 1 <= s <= m");
  }
  VerifyReport report;
  SampleStream rng(seed, 0);
  opts.run_saa = false;
  opts.perturbations = std::min<std::size_t>(opts.perturbations, 2);
  opts.schur_pairs = std::min<std::size_t>(opts.schur_pairs, 1);
  for (std::size_t k = 0; k < count; ++k) {
    const RawProblem raw = random_raw_problem(rng, m, s);
    const ValidatedProblem problem = validate(raw);
    const std::string label = "random[" + std::to_string(k) + "]";
    verify_fixed(problem, opts, report, label + ".fixed");
    VerifyOptions fading = opts;
    fading.seed = seed + k;
    verify_fading(problem.partition, fading, report, label + ".fading");
  }
  return report;
}

}  // namespace groupfill
