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

// Optimal power allocation for a fixed orthogonal MIMO channel (diagonal
// Gram matrix with entries g_i) under a total power budget P_T and per-group
// caps P_j.
//
// The optimum has the form
//
//   p_i = ((mu + lambda_j)^{-1} - g_i^{-1})_+      for i in group j,
//
// where mu >= 0 prices the total budget and lambda_j >= 0 the cap of group j.
// mu solves  sum_j min{P_j, W_j(mu)} = P_T  with the group water-fill
// W_j(mu) = sum_{i in j} (1/mu - 1/g_i)_+ (mu = 0 when sum_j P_j <= P_T), and
// each lambda_j then solves its own group equation independently.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "groupfill/error.hpp"
#include "groupfill/problem.hpp"

namespace groupfill {

inline constexpr double kDefaultBisectionTol = 1e-10;
inline constexpr int kMaxBisectionIters = 200;

/// Classic water-filling of `budget` over `gains`: p_i = (w - 1/g_i)_+ with
/// the water level w found exactly by sorting (no iteration).
inline PowerAllocation waterfill_tpc(const GainVector& gains, double budget) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::kNonPositiveBudget, "water-filling budget must be positive");
  }
  const std::size_t m = gains.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });

  double inv_sum = 0.0;
  double level = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    inv_sum += 1.0 / gains[order[k]];
    level = (budget + inv_sum) / static_cast<double>(k + 1);
    if (k + 1 == m || level <= 1.0 / gains[order[k + 1]]) break;
  }

  PowerAllocation out;
  out.powers.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.powers[i] = std::max(0.0, level - 1.0 / gains[i]);
  }
  out.slack.total = budget - out.sum();
  out.slack.min_power = *std::min_element(out.powers.begin(), out.powers.end());
  return out;
}

/// Allocation with the total budget removed: each group water-fills its own
/// cap independently.
inline PowerAllocation waterfill_pgpc(const ValidatedProblem& problem) {
  std::vector<double> powers(problem.num_antennas(), 0.0);
  for (std::size_t j = 0; j < problem.num_groups(); ++j) {
    auto members = problem.partition.group(j);
    std::vector<double> g;
    for (std::size_t i : members) g.push_back(problem.gains[i]);
    PowerAllocation local = waterfill_tpc(GainVector(std::move(g)), problem.partition.cap(j));
    for (std::size_t k = 0; k < members.size(); ++k) powers[members[k]] = local.powers[k];
  }
  return make_allocation(problem.partition.with_total(
                             std::max(problem.partition.total(), problem.partition.cap_sum())),
                         std::move(powers));
}

/// W_j(mu) = sum_{i in group j} (1/mu - 1/g_i)_+, infinite at mu = 0.
inline double group_waterfill(const ValidatedProblem& problem, std::size_t j, double mu) {
  if (mu <= 0.0) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i : problem.partition.group(j)) {
    s += std::max(0.0, 1.0 / mu - 1.0 / problem.gains[i]);
  }
  return s;
}

/// Power B_j = min{P_j, W_j(mu)} granted to group j at price mu.
inline double group_budget(const ValidatedProblem& problem, std::size_t j, double mu) {
  if (j >= problem.num_groups()) {
    throw Error(ErrorCode::kIndexOutOfRange, "group index out of range");
  }
  if (mu <= 0.0) return problem.partition.cap(j);
  return std::min(problem.partition.cap(j), group_waterfill(problem, j, mu));
}

/// Signed residual sum_j B_j(mu) - P_T of the total-budget equation.
inline double mu_equation_residual(const ValidatedProblem& problem, double mu) {
  double s = 0.0;
  for (std::size_t j = 0; j < problem.num_groups(); ++j) s += group_budget(problem, j, mu);
  return s - problem.partition.total();
}

/// Signed residual sum_{i in j} ((mu+lambda)^{-1} - 1/g_i)_+ - B_j.
inline double lambda_equation_residual(const ValidatedProblem& problem, std::size_t j,
                                       double mu, double lambda, double budget) {
  const double price = mu + lambda;
  if (price <= 0.0) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t i : problem.partition.group(j)) {
    s += std::max(0.0, 1.0 / price - 1.0 / problem.gains[i]);
  }
  return s - budget;
}

/// Price of the total budget. Returns 0 when the caps alone already respect
/// P_T; otherwise bisects on [0, max_i g_i] until the equation residual is
/// within `tol` (power units). Throws ToleranceError if 200 halvings do not
/// get there.
inline double solve_mu(const ValidatedProblem& problem, double tol = kDefaultBisectionTol) {
  if (problem.partition.cap_sum() <= problem.partition.total()) return 0.0;

  double lo = 0.0;
  double hi = problem.gains.max();
  // The left side is non-increasing in mu: sum_j P_j - P_T > 0 just above
  // zero and -P_T at mu = max g.
  if (!(mu_equation_residual(problem, hi) < 0.0)) {
    throw Error(ErrorCode::kDomainError, "mu bracket upper end does not change sign");
  }

  // Only points with residual <= 0 are accepted, so the returned price never
  // grants more than P_T.
  double best = hi;
  double best_residual = std::abs(mu_equation_residual(problem, hi));
  for (int it = 0; it < kMaxBisectionIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = mu_equation_residual(problem, mid);
    if (r <= 0.0 && -r < best_residual) {
      best = mid;
      best_residual = -r;
    }
    if (r <= 0.0 && -r <= tol) return mid;
    (r > 0.0 ? lo : hi) = mid;
  }
  if (best_residual <= tol) return best;
  throw ToleranceError("mu bisection did not converge", best_residual);
}

/// Price lambda_j of group j's cap given mu and the group's granted budget.
///
/// A zero budget returns max_i g_i over all antennas (any value at or above
/// the strongest group gain minus mu solves the group equation). When the
/// unpriced water-fill already equals the budget the answer is 0 without
/// iterating. Otherwise bisects on [0, max_{i in j} g_i - mu].
inline double solve_lambda(const ValidatedProblem& problem, std::size_t j, double mu,
                           double budget, double tol = kDefaultBisectionTol) {
  if (j >= problem.num_groups()) {
    throw Error(ErrorCode::kIndexOutOfRange, "group index out of range");
  }
  if (budget <= 0.0) return problem.gains.max();

  double group_max = 0.0;
  for (std::size_t i : problem.partition.group(j)) {
    group_max = std::max(group_max, problem.gains[i]);
  }

  if (mu > 0.0 && lambda_equation_residual(problem, j, mu, 0.0, budget) <= 0.0) {
    return 0.0;
  }

  // As in solve_mu, only residuals <= 0 are accepted (no overspent cap).
  double lo = 0.0;
  double hi = std::max(0.0, group_max - mu);
  double best = hi;
  double best_residual = std::abs(lambda_equation_residual(problem, j, mu, hi, budget));
  for (int it = 0; it < kMaxBisectionIters; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = lambda_equation_residual(problem, j, mu, mid, budget);
    if (r <= 0.0 && -r < best_residual) {
      best = mid;
      best_residual = -r;
    }
    if (r <= 0.0 && -r <= tol) return mid;
    (r > 0.0 ? lo : hi) = mid;
  }
  if (best_residual <= tol) return best;
  throw ToleranceError("lambda bisection did not converge for group " + std::to_string(j),
                       best_residual);
}

/// Lagrange multipliers of the total budget and the group caps, with the
/// absolute residuals of their defining equations.
struct DualSolution {
  double mu = 0.0;
  std::vector<double> lambdas;
  double mu_residual = 0.0;
  std::vector<double> lambda_residuals;
};

struct FixedSolveReport {
  PowerAllocation allocation;
  DualSolution duals;
  double capacity_nats = 0.0;
  std::vector<double> group_budgets;
  bool active_tpc = false;
  std::vector<bool> active_groups;
};

/// Sum_i ln(1 + g_i p_i), in nats.
inline double capacity_fixed(const GainVector& gains, std::span<const double> powers) {
  if (powers.size() != gains.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "allocation and gains differ in length");
  }
  double c = 0.0;
  for (std::size_t i = 0; i < powers.size(); ++i) c += std::log1p(gains[i] * powers[i]);
  return c;
}

inline double capacity_fixed(const GainVector& gains, const PowerAllocation& allocation) {
  return capacity_fixed(gains, std::span<const double>(allocation.powers));
}

/// Optimal allocation under the joint total and per-group budgets.
///
/// The reported lambda_j of a group that receives no power is 0: its cap is
/// slack, so that is the multiplier satisfying complementary slackness.
/// (solve_lambda itself returns max g for a zero budget.)
inline FixedSolveReport opa_fixed(const ValidatedProblem& problem,
                                  double tol = kDefaultBisectionTol) {
  const std::size_t s = problem.num_groups();
  FixedSolveReport report;
  DualSolution& duals = report.duals;
  duals.mu = solve_mu(problem, tol);
  duals.mu_residual =
      duals.mu > 0.0 ? std::abs(mu_equation_residual(problem, duals.mu)) : 0.0;

  report.group_budgets.resize(s);
  duals.lambdas.assign(s, 0.0);
  duals.lambda_residuals.assign(s, 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    const double budget = group_budget(problem, j, duals.mu);
    if (budget > 0.0) {
      duals.lambdas[j] = solve_lambda(problem, j, duals.mu, budget, tol);
      duals.lambda_residuals[j] =
          std::abs(lambda_equation_residual(problem, j, duals.mu, duals.lambdas[j], budget));
    }
  }

  std::vector<double> powers(problem.num_antennas(), 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    const double level = 1.0 / (duals.mu + duals.lambdas[j]);
    for (std::size_t i : problem.partition.group(j)) {
      powers[i] = std::max(0.0, level - 1.0 / problem.gains[i]);
    }
  }
  report.allocation = make_allocation(problem.partition, std::move(powers));
  report.capacity_nats = capacity_fixed(problem.gains, report.allocation);

  report.active_tpc = duals.mu > 0.0;
  report.active_groups.resize(s);
  for (std::size_t j = 0; j < s; ++j) {
    report.group_budgets[j] = group_sum(problem.partition, j, report.allocation.powers);
    report.active_groups[j] = report.allocation.slack.groups[j] <= kFeasibilityTol;
  }
  return report;
}

/// Largest violation of each family of optimality conditions.
struct KktResiduals {
  double stationarity = 0.0;
  double complementary_slackness = 0.0;
  double dual_feasibility = 0.0;
  double primal_feasibility = 0.0;

  double max() const {
    return std::max({stationarity, complementary_slackness, dual_feasibility,
                     primal_feasibility});
  }
};

/// Evaluates the optimality conditions of the concave program at an
/// allocation and multiplier set. The bound multipliers are taken as
/// eta_i = (mu + lambda_j - g_i)_+ where p_i = 0 and 0 elsewhere. Never
/// throws on a bad allocation; that is what the residuals are for.
inline KktResiduals kkt_residuals(const ValidatedProblem& problem,
                                  std::span<const double> powers, double mu,
                                  std::span<const double> lambdas) {
  const auto& part = problem.partition;
  if (powers.size() != problem.num_antennas() || lambdas.size() != part.num_groups()) {
    throw Error(ErrorCode::kDimensionMismatch, "allocation or multipliers have wrong size");
  }
  KktResiduals r;
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double g = problem.gains[i];
    const double price = mu + lambdas[part.group_of(i)];
    const double eta = powers[i] > 0.0 ? 0.0 : std::max(0.0, price - g);
    const double marginal = g / (1.0 + g * std::max(0.0, powers[i]));
    r.stationarity = std::max(r.stationarity, std::abs(marginal - price + eta));
    r.complementary_slackness = std::max(r.complementary_slackness, std::abs(eta * powers[i]));
    r.primal_feasibility = std::max(r.primal_feasibility, std::max(0.0, -powers[i]));
  }
  const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
  r.complementary_slackness =
      std::max(r.complementary_slackness, std::abs(mu * (total - part.total())));
  r.primal_feasibility = std::max(r.primal_feasibility, total - part.total());
  r.dual_feasibility = std::max(r.dual_feasibility, std::max(0.0, -mu));
  for (std::size_t j = 0; j < part.num_groups(); ++j) {
    const double used = group_sum(part, j, powers);
    r.complementary_slackness =
        std::max(r.complementary_slackness, std::abs(lambdas[j] * (used - part.cap(j))));
    r.primal_feasibility = std::max(r.primal_feasibility, used - part.cap(j));
    r.dual_feasibility = std::max(r.dual_feasibility, std::max(0.0, -lambdas[j]));
  }
  return r;
}

inline KktResiduals kkt_residuals(const ValidatedProblem& problem,
                                  const FixedSolveReport& report) {
  return kkt_residuals(problem, report.allocation.powers, report.duals.mu,
                       report.duals.lambdas);
}

}  // namespace groupfill
