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


// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <sys/wait.h>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "groupfill.hpp"
#include "groupfill/problem_io.hpp"

namespace {

using namespace groupfill;
using Vec = std::vector<double>;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string summary;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string data(const std::string& name) { return std::string(GROUPFILL_DATA_DIR) + "/" + name; }

GroupPartition eight(double total) {
  return validate_partition({{}, {{1, 2, 3}, {4, 5, 6, 7}, {8}}, {15, 3, 6}, total});
}

std::size_t pick_groups(SampleStream& rng, std::size_t m) {
  return 1 + uniform_index(rng, std::min<std::size_t>(m, 4));
}

// Shared problem set for the fixed-channel criteria.
std::vector<ValidatedProblem> fixed_problems() {
  SampleStream rng(1001, 0);
  std::vector<ValidatedProblem> out;
  for (int k = 0; k < 500; ++k) {
    const std::size_t m = 1 + uniform_index(rng, 12);
    out.push_back(random_problem(rng, m, pick_groups(rng, m)));
  }
  return out;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  double worst_oracle = 0.0, worst_grid = 0.0, worst_kkt = 0.0;
  std::size_t grid_count = 0;
  for (const auto& p : fixed_problems()) {
    const FixedSolveReport r = opa_fixed(p);
    worst_oracle = std::max(worst_oracle, std::abs(r.capacity_nats - oracle_fixed(p).objective));
    if (p.num_antennas() <= 3) {
      ++grid_count;
      worst_grid = std::max(worst_grid, std::abs(r.capacity_nats - grid_oracle(p, 1e-3).objective));
    }
    worst_kkt = std::max(
        worst_kkt, kkt_residuals(p, r.allocation.powers, r.duals.mu, r.duals.lambdas).max());
  }
  const double t = seconds_since(t0);
  return {worst_oracle <= 1e-6 && worst_grid <= 1e-2 && worst_kkt <= 1e-8 && t <= 60.0,
          "500 problems, max |opa - FW| " + num(worst_oracle) + ", max |opa - grid| " +
              num(worst_grid) + " (" + std::to_string(grid_count) + " with m<=3), max KKT " +
              num(worst_kkt) + ", " + num(t) + " s"};
}

Outcome criterion2() {
  double worst_mu = 0.0, worst_lambda = 0.0;
  std::size_t checked = 0, bound_failures = 0;
  for (const auto& p : fixed_problems()) {
    const FixedSolveReport r = opa_fixed(p);
    const DualSolution& d = r.duals;
    if (d.mu < 0.0 || d.mu > p.gains.max()) ++bound_failures;
    for (std::size_t j = 0; j < p.num_groups(); ++j) {
      double group_max = 0.0;
      for (std::size_t i : p.partition.group(j)) group_max = std::max(group_max, p.gains[i]);
      if (d.lambdas[j] < 0.0 || d.lambdas[j] > group_max) ++bound_failures;
    }
    if (!(p.partition.cap_sum() > p.partition.total())) continue;
    ++checked;
    // Recomputed here: sum_j min(P_j, sum_i (1/mu - 1/g_i)_+) - P_T.
    double granted = 0.0;
    for (std::size_t j = 0; j < p.num_groups(); ++j) {
      double w = 0.0;
      for (std::size_t i : p.partition.group(j)) w += std::max(0.0, 1.0 / d.mu - 1.0 / p.gains[i]);
      granted += std::min(p.partition.cap(j), w);
    }
    worst_mu = std::max({worst_mu, d.mu_residual, std::abs(granted - p.partition.total())});
    for (std::size_t j = 0; j < p.num_groups(); ++j) {
      worst_lambda = std::max(worst_lambda, d.lambda_residuals[j]);
      if (r.group_budgets[j] <= 0.0) continue;
      double w = 0.0;
      for (std::size_t i : p.partition.group(j)) {
        w += std::max(0.0, 1.0 / (d.mu + d.lambdas[j]) - 1.0 / p.gains[i]);
      }
      worst_lambda = std::max(worst_lambda, std::abs(w - r.group_budgets[j]));
    }
  }
  return {worst_mu <= 1e-10 && worst_lambda <= 1e-10 && bound_failures == 0,
          std::to_string(checked) + " problems with binding caps, max mu residual " +
              num(worst_mu) + ", max lambda residual " + num(worst_lambda) + ", " +
              std::to_string(bound_failures) + " bound violations"};
}

Outcome criterion3() {
  const Vec want8{1.25, 1.25, 1.25, 0.75, 0.75, 0.75, 0.75, 1.25};
  const Vec want24{5, 5, 5, 0.75, 0.75, 0.75, 0.75, 6};
  bool ok = true;
  std::string notes;
  for (const auto& [total, want] : {std::pair{8.0, want8}, std::pair{24.0, want24}}) {
    const GroupPartition part = eight(total);
    const FadingSolveReport r = opa_fading(part);
    const bool exact = r.allocation.powers == want;
    const bool rounds = r.rounds <= part.num_groups();
    bool saturated = true;
    for (std::size_t j : r.active_groups) saturated &= group_sum(part, j, r.allocation.powers) == part.cap(j);
    ok &= exact && rounds && saturated;
    notes += " P_T=" + num(total) + ": " + (exact ? "exact" : "MISMATCH") + ", " +
             std::to_string(r.rounds) + " rounds, caps " + (saturated ? "saturated" : "NOT saturated") + ";";
  }
  notes.pop_back();
  return {ok, notes.substr(1)};
}

Outcome criterion4() {
  const auto t0 = Clock::now();
  SampleStream rng(1004, 0);
  double worst_alloc = 0.0, worst_obj = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 50; ++k) {
    const std::size_t m = 1 + uniform_index(rng, 10);
    const GroupPartition part = random_partition(rng, m, pick_groups(rng, m));
    const Vec p = opa_fading(part).allocation.powers;
    const FadingSampleAverage saa(m, 20000, 4242 + static_cast<std::uint64_t>(k));
    FrankWolfeOptions opt;
    opt.gap_tol = 1e-6;
    opt.step = FrankWolfeStep::kPairwise;
    const OracleResult o = frank_wolfe(saa.as_objective(), LaminarPolytope{part}, opt);
    for (std::size_t i = 0; i < m; ++i) worst_alloc = std::max(worst_alloc, std::abs(p[i] - o.allocation.powers[i]));
    worst_obj = std::max(worst_obj, o.objective - saa.value(p));
  }
  const double t = seconds_since(t0);
  return {worst_alloc <= 5e-3 && worst_obj <= 1e-6 && t <= 120.0,
          "50 partitions, max |p - p_saa| " + num(worst_alloc) + ", max (F(p_saa) - F(p)) " +
              num(worst_obj) + ", " + num(t) + " s"};
}

// Equal-sum triples from T-transforms: x < y < z by construction.
Vec t_transform(const Vec& y, SampleStream& rng) {
  Vec x = y;
  const std::size_t a = uniform_index(rng, y.size());
  const std::size_t b = uniform_index(rng, y.size());
  const double t = rng.uniform();
  x[a] = t * y[a] + (1 - t) * y[b];
  x[b] = t * y[b] + (1 - t) * y[a];
  return x;
}

Outcome criterion5() {
  SampleStream rng(1005, 0);
  std::size_t perturbations = 0, failures = 0;
  while (perturbations < 200) {
    const std::size_t m = 2 + uniform_index(rng, 9);
    const GroupPartition part = random_partition(rng, m, pick_groups(rng, m));
    const FadingSolveReport r = opa_fading(part);
    const Vec alt = active_group_perturbation(part, r, rng);
    if (alt.empty()) continue;  // every group active: nothing to perturb
    ++perturbations;
    if (!majorizes(r.allocation.powers, alt) || !compute_slack(part, alt).feasible()) ++failures;
  }
  std::size_t property_failures = 0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t m = 1 + uniform_index(rng, 10);
    Vec z(m);
    for (auto& v : z) v = 5.0 * rng.uniform();
    const Vec y = t_transform(z, rng);
    const Vec x = t_transform(y, rng);
    if (!majorizes(z, z)) ++property_failures;
    if (!(majorizes(x, y) && majorizes(y, z) && majorizes(x, z))) ++property_failures;
    Vec perm = z;
    std::reverse(perm.begin(), perm.end());
    if (!(majorizes(perm, z) && majorizes(z, perm))) ++property_failures;
    if (majorizes(x, y) && majorizes(y, x)) {
      Vec a = x, b = y;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(a[i] - b[i]) > 1e-8) ++property_failures;
      }
    }
  }
  return {failures == 0 && property_failures == 0,
          std::to_string(perturbations) + " perturbations, " + std::to_string(failures) +
              " not majorized; " + std::to_string(property_failures) + " order-property failures"};
}

Outcome criterion6() {
  SampleStream rng(1006, 0);
  std::size_t pairs = 0, failures = 0;
  double worst = -std::numeric_limits<double>::infinity();
  while (pairs < 100) {
    const std::size_t m = 2 + uniform_index(rng, 9);
    const GroupPartition part = random_partition(rng, m, pick_groups(rng, m));
    const auto [x, y] = random_majorization_pair(part, rng);
    if (!majorizes(x, y)) continue;
    ++pairs;
    const auto ensemble = ChannelEnsemble::orthogonal_iid(m, 6000 + pairs);
    const auto fx = ergodic_capacity_mc(ensemble, x, 20000);
    const auto fy = ergodic_capacity_mc(ensemble, y, 20000);
    const double slack = fy.mean - fx.mean - 3.0 * std::hypot(fx.std_error, fy.std_error);
    worst = std::max(worst, slack);
    if (slack > 0.0) ++failures;
  }
  return {failures == 0, "100 pairs, max (F(y) - F(x) - 3 se) " + num(worst) + ", " +
                             std::to_string(failures) + " violations"};
}

double ei_quadrature(double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double z = -x;
  auto f = [z](double u) { return std::exp(-(z + u)) / (z + u); };
  return -integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-15);
}

Outcome criterion7() {
  double worst_z = 0.0;
  for (double p : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    const auto ensemble = ChannelEnsemble::orthogonal_iid(1, 7007);
    const Vec powers{p};
    const auto est = ergodic_capacity_mc(ensemble, powers, 10'000'000);
    worst_z = std::max(worst_z, std::abs(est.mean - expected_log_rayleigh(p)) / est.std_error);
  }
  double worst_rel = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double x = -std::pow(10.0, -4.0 + 6.0 * k / 19.0);
    const double ref = ei_quadrature(x);
    worst_rel = std::max(worst_rel, std::abs(expint_ei(x) - ref) / std::abs(ref));
  }
  return {worst_z <= 3.0 && worst_rel <= 1e-10,
          "max |closed form - MC| " + num(worst_z) + " se over 5 powers (N=1e7); max Ei relative error " +
              num(worst_rel) + " over 20 points"};
}

Outcome criterion8() {
  std::size_t rows = 0, failures = 0;
  double worst_tpc = 0.0, worst_sat = 0.0;
  const ValidatedProblem fixed = validate(read_problem_file(data("nine_antennas.json")));
  const SweepSpec fspec{parse_grid("1:30:1"), {Curve::kJoint, Curve::kTpcOnly, Curve::kPgpcOnly},
                        SweepMode::kFixed};
  for (const auto& row : run_fixed_sweep(fixed, fspec)) {
    ++rows;
    const double joint = row.values[0], tpc = row.values[1], pgpc = row.values[2];
    if (joint > std::min(tpc, pgpc) + 1e-12) ++failures;
    const FixedSolveReport r = opa_fixed(with_total(fixed, row.total_power));
    if (std::none_of(r.active_groups.begin(), r.active_groups.end(), [](bool a) { return a; })) {
      worst_tpc = std::max(worst_tpc, std::abs(joint - tpc));
    }
    if (row.total_power >= fixed.partition.cap_sum()) worst_sat = std::max(worst_sat, std::abs(joint - pgpc));
  }
  const GroupPartition part = eight(8);
  const SweepSpec dspec{parse_grid("1:40:1"),
                        {Curve::kJoint, Curve::kTpcOnly, Curve::kPgpcOnly, Curve::kJensen},
                        SweepMode::kFading};
  for (const auto& row : run_fading_sweep(part, dspec)) {
    ++rows;
    const auto& v = row.values;
    if (v[0] > std::min(v[1], v[2]) + 1e-12 || v[0] > v[3]) ++failures;
    if (row.total_power >= part.cap_sum()) worst_sat = std::max(worst_sat, std::abs(v[0] - v[2]));
  }
  return {failures == 0 && worst_tpc <= 1e-6 && worst_sat <= 1e-6,
          std::to_string(rows) + " rows, " + std::to_string(failures) +
              " ordering violations, max |JOINT - TPC| with no active group " + num(worst_tpc) +
              ", max |JOINT - PGPC| past the cap sum " + num(worst_sat)};
}

Outcome criterion9() {
  SampleStream rng(1009, 0);
  std::size_t case_errors = 0, value_errors = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t m = 1 + uniform_index(rng, 12);
    const std::size_t s = pick_groups(rng, m);
    RawProblem raw;
    raw.groups = random_groups(rng, m, s);
    raw.caps.resize(s);
    const bool case1 = k % 2 == 0;
    if (case1) {
      raw.total_power = 2.0 * static_cast<double>(m) * (0.01 + rng.uniform());
      for (std::size_t j = 0; j < s; ++j) {
        const double share = raw.total_power * static_cast<double>(raw.groups[j].size()) / static_cast<double>(m);
        raw.caps[j] = share * (1.01 + rng.uniform());
      }
      // Case 2 must not also hold.
      if (std::accumulate(raw.caps.begin(), raw.caps.end(), 0.0) <= raw.total_power) continue;
    } else {
      for (auto& c : raw.caps) c = 2.0 * static_cast<double>(m) * (0.01 + rng.uniform());
      raw.total_power = std::accumulate(raw.caps.begin(), raw.caps.end(), 0.0) * (1.0 + rng.uniform());
    }
    const GroupPartition part = validate_partition(raw);
    const FadingCase c = detect_case(part);
    if (c != (case1 ? FadingCase::kCase1 : FadingCase::kCase2)) ++case_errors;
    const Vec p = opa_fading(part).allocation.powers;
    for (std::size_t j = 0; j < part.num_groups(); ++j) {
      const double want = case1 ? part.total() / static_cast<double>(part.num_antennas())
                                : part.cap(j) / static_cast<double>(part.group_size(j));
      for (std::size_t i : part.group(j)) {
        if (p[i] != want) ++value_errors;
      }
    }
  }
  return {case_errors == 0 && value_errors == 0,
          "1000 partitions (Case 1 and Case 2 alternating), " + std::to_string(case_errors) +
              " misclassified, " + std::to_string(value_errors) + " entries differ"};
}

std::string run_cli(const std::string& args, const std::string& threads, int& code) {
  namespace fs = std::filesystem;
  const fs::path out = fs::temp_directory_path() / "groupfill_acceptance_out.txt";
  const std::string cmd = "GROUPFILL_THREADS=" + threads + " '" GROUPFILL_CLI "' " + args + " >'" +
                          out.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream s;
  s << in.rdbuf();
  fs::remove(out);
  return s.str();
}

Outcome criterion10() {
  const std::vector<std::string> commands{
      "montecarlo " + data("fading_p24.json") + " --samples 200000 --seed 17",
      "montecarlo " + data("fading_p8.json") + " --ensemble rayleigh-mimo:4x8 --samples 20000 --seed 17",
      "verify " + data("fading_p8.json") + " --seed 17 --samples 5000",
      "verify --random 6 3 17 20",
  };
  std::size_t mismatches = 0, bad_exits = 0;
  for (const auto& args : commands) {
    int c1 = 0, c2 = 0, c4 = 0;
    const std::string a = run_cli(args, "1", c1);
    const std::string b = run_cli(args, "1", c2);
    const std::string d = run_cli(args, "4", c4);
    if (c1 != 0 || c2 != 0 || c4 != 0 || a.empty()) ++bad_exits;
    if (a != b || a != d) ++mismatches;
  }
  return {mismatches == 0 && bad_exits == 0,
          std::to_string(commands.size()) + " commands x 3 runs (threads 1, 1, 4), " +
              std::to_string(mismatches) + " output mismatches, " + std::to_string(bad_exits) +
              " bad exits"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"fixed solver matches oracles", criterion1},
      {"dual equation residuals and bounds", criterion2},
      {"active-group procedure on the eight-antenna partition", criterion3},
      {"fading allocation matches sample-average optimum", criterion4},
      {"majorization of perturbations and order properties", criterion5},
      {"Schur-concavity on majorization pairs", criterion6},
      {"closed-form ergodic rate and Ei", criterion7},
      {"sweep curve shapes", criterion8},
      {"Case 1 and Case 2 closed forms", criterion9},
      {"determinism across runs and thread counts", criterion10},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first
              << " (" << o.summary << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
