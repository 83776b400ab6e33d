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

// Independent ground truth for the solvers. Nothing here calls into
// fixed_solver.hpp or fading_solver.hpp.
//
// The feasible set {p >= 0, sum p <= P_T, sum_{i in I(j)} p_i <= P_j} is a
// laminar polytope: every coordinate sits in exactly one group cap plus the
// global cap. Linear maximization over it is a greedy fill, which makes
// Frank-Wolfe the natural generic concave maximizer.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "groupfill/ergodic.hpp"
#include "groupfill/error.hpp"
#include "groupfill/parallel.hpp"
#include "groupfill/problem.hpp"

namespace groupfill {

/// Absolute tolerance of the majorization predicate.
inline constexpr double kMajorizationTol = 1e-9;

/// True iff x is majorized by y: after sorting both in decreasing order,
/// every prefix sum of y dominates x's and the totals agree (both up to
/// `tol`, absolute).
inline bool majorizes(std::span<const double> x, std::span<const double> y,
                      double tol = kMajorizationTol) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "majorization needs equal-length vectors");
  }
  std::vector<double> xs(x.begin(), x.end());
  std::vector<double> ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end(), std::greater<>());
  std::sort(ys.begin(), ys.end(), std::greater<>());
  double px = 0.0;
  double py = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    px += xs[k];
    py += ys[k];
    if (px > py + tol) return false;
  }
  return std::abs(px - py) <= tol;
}

struct LaminarPolytope {
  GroupPartition partition;
};

/// Maximizes <c, p> over the polytope: coordinates in decreasing c (ties by
/// index), skipping c_i <= 0, each filled to what its group and the total
/// still allow. The result is a vertex.
inline PowerAllocation lp_greedy(std::span<const double> c, const LaminarPolytope& polytope) {
  const auto& part = polytope.partition;
  if (c.size() != part.num_antennas()) {
    throw Error(ErrorCode::kDimensionMismatch, "cost vector has wrong length");
  }
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });

  std::vector<double> group_left(part.caps().begin(), part.caps().end());
  double total_left = part.total();
  std::vector<double> p(c.size(), 0.0);
  for (std::size_t i : order) {
    if (!(c[i] > 0.0) || total_left <= 0.0) break;
    const std::size_t j = part.group_of(i);
    const double amount = std::min(group_left[j], total_left);
    if (amount <= 0.0) continue;
    p[i] = amount;
    group_left[j] -= amount;
    total_left -= amount;
  }
  return make_allocation(part, std::move(p));
}

/// A concave objective for the maximizers. `curvature`, when set, returns
/// the diagonal of the Hessian (all entries <= 0); the line search then uses
/// safeguarded Newton steps instead of plain bisection.
struct ConcaveObjective {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<std::vector<double>(std::span<const double>)> curvature;
};

enum class FrankWolfeStep {
  /// x_{k+1} = x_k + 2/(k+2) (v_k - x_k).
  kOpenLoop,
  /// Pairwise steps (mass moves from the worst active vertex to the new one)
  /// with exact line search; converges linearly on polytopes.
  kPairwise,
};

struct FrankWolfeOptions {
  std::size_t max_iters = 200000;
  double gap_tol = 1e-8;
  FrankWolfeStep step = FrankWolfeStep::kOpenLoop;
  bool record_gaps = false;
};

struct OracleResult {
  PowerAllocation allocation;
  double objective = 0.0;
  std::size_t iterations = 0;
  /// Upper bound on optimal objective minus `objective`.
  double certified_gap = 0.0;
  std::vector<double> gap_trace;
};

namespace detail {

inline std::vector<double> checked_gradient(const ConcaveObjective& f,
                                            std::span<const double> x) {
  std::vector<double> g = f.gradient(x);
  if (g.size() != x.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient has wrong length");
  }
  for (double v : g) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteGradient, "gradient is not finite");
  }
  return g;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Maximizes f(x + t d) over t in [0, t_max]; the slope at 0 is `slope0` > 0.
inline double line_search(const ConcaveObjective& f, std::span<const double> x,
                          std::span<const double> d, double t_max, double slope0) {
  std::vector<double> y(x.size());
  auto at = [&](double t) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::max(0.0, x[i] + t * d[i]);
    return std::span<const double>(y);
  };
  const double slope_max = dot(checked_gradient(f, at(t_max)), d);
  if (slope_max >= 0.0) return t_max;

  double lo = 0.0;
  double hi = t_max;
  double t = 0.5 * t_max;
  const double stop = 1e-15 * slope0;
  for (int it = 0; it < 100; ++it) {
    const auto point = at(t);
    const double slope = dot(checked_gradient(f, point), d);
    if (std::abs(slope) <= stop) return t;
    (slope > 0.0 ? lo : hi) = t;
    if (hi - lo <= 1e-16 * t_max) return 0.5 * (lo + hi);
    double next = 0.5 * (lo + hi);
    if (f.curvature) {
      const std::vector<double> h = f.curvature(point);
      double second = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) second += h[i] * d[i] * d[i];
      if (second < 0.0) {
        const double newton = t - slope / second;
        if (newton > lo && newton < hi) next = newton;
      }
    }
    t = next;
  }
  return t;
}

inline OracleResult finish(const ConcaveObjective& f, const LaminarPolytope& polytope,
                           std::vector<double> x, std::size_t iterations, double gap,
                           std::vector<double> trace) {
  OracleResult out;
  out.objective = f.value(x);
  out.allocation = make_allocation(polytope.partition, std::move(x));
  out.iterations = iterations;
  out.certified_gap = std::max(0.0, gap);
  out.gap_trace = std::move(trace);
  return out;
}

inline OracleResult frank_wolfe_open_loop(const ConcaveObjective& f,
                                          const LaminarPolytope& polytope,
                                          const FrankWolfeOptions& opt) {
  const std::size_t m = polytope.partition.num_antennas();
  std::vector<double> x(m, 0.0);
  std::vector<double> trace;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  for (;; ++k) {
    const std::vector<double> grad = checked_gradient(f, x);
    const std::vector<double> v = lp_greedy(grad, polytope).powers;
    gap = 0.0;
    for (std::size_t i = 0; i < m; ++i) gap += grad[i] * (v[i] - x[i]);
    if (opt.record_gaps) trace.push_back(gap);
    if (gap <= opt.gap_tol || k >= opt.max_iters) break;
    const double step = 2.0 / (static_cast<double>(k) + 2.0);
    for (std::size_t i = 0; i < m; ++i) x[i] += step * (v[i] - x[i]);
  }
  return finish(f, polytope, std::move(x), k, gap, std::move(trace));
}

inline OracleResult frank_wolfe_pairwise(const ConcaveObjective& f,
                                         const LaminarPolytope& polytope,
                                         const FrankWolfeOptions& opt) {
  const std::size_t m = polytope.partition.num_antennas();
  struct Atom {
    std::vector<double> vertex;
    double weight;
  };
  // The origin is a vertex of the polytope.
  std::vector<Atom> active{{std::vector<double>(m, 0.0), 1.0}};
  std::vector<double> x(m, 0.0);
  std::vector<double> d(m);
  std::vector<double> trace;
  double gap = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  for (;; ++k) {
    const std::vector<double> grad = checked_gradient(f, x);
    std::vector<double> v = lp_greedy(grad, polytope).powers;
    gap = 0.0;
    for (std::size_t i = 0; i < m; ++i) gap += grad[i] * (v[i] - x[i]);
    if (opt.record_gaps) trace.push_back(gap);
    if (gap <= opt.gap_tol || k >= opt.max_iters) break;

    std::size_t away = 0;
    double away_score = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      const double score = dot(grad, active[a].vertex);
      if (score < away_score) {
        away_score = score;
        away = a;
      }
    }

    double t_max = active[away].weight;
    double slope = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = v[i] - active[away].vertex[i];
      slope += grad[i] * d[i];
    }
    bool pairwise = slope > 0.0;
    if (!pairwise) {
      // Plain FW step toward v (always ascent when the gap is positive).
      for (std::size_t i = 0; i < m; ++i) d[i] = v[i] - x[i];
      slope = gap;
      t_max = 1.0;
    }
    const double t = line_search(f, x, d, t_max, slope);

    std::size_t target = active.size();
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (active[a].vertex == v) target = a;
    }
    if (target == active.size()) active.push_back({std::move(v), 0.0});
    if (pairwise) {
      active[target].weight += t;
      active[away].weight = (t >= t_max) ? 0.0 : active[away].weight - t;
    } else {
      for (auto& atom : active) atom.weight *= (1.0 - t);
      active[target].weight += t;
    }
    std::erase_if(active, [](const Atom& a) { return a.weight <= 0.0; });

    double total = 0.0;
    for (const auto& atom : active) total += atom.weight;
    std::fill(x.begin(), x.end(), 0.0);
    for (auto& atom : active) {
      atom.weight /= total;
      for (std::size_t i = 0; i < m; ++i) x[i] += atom.weight * atom.vertex[i];
    }
  }
  return finish(f, polytope, std::move(x), k, gap, std::move(trace));
}

}  // namespace detail

/// Maximizes a concave objective over the laminar polytope by Frank-Wolfe.
/// Stops when the duality gap <grad f(x), v - x> drops to gap_tol or after
/// max_iters iterations; the returned gap is the one at the returned point.
inline OracleResult frank_wolfe(const ConcaveObjective& objective,
                                const LaminarPolytope& polytope,
                                const FrankWolfeOptions& options = {}) {
  if (options.step == FrankWolfeStep::kPairwise) {
    return detail::frank_wolfe_pairwise(objective, polytope, options);
  }
  return detail::frank_wolfe_open_loop(objective, polytope, options);
}

/// sum_i ln(1 + g_i p_i) as a ConcaveObjective.
inline ConcaveObjective fixed_rate_objective(const GainVector& gains) {
  std::vector<double> g(gains.values().begin(), gains.values().end());
  ConcaveObjective f;
  f.value = [g](std::span<const double> p) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += std::log1p(g[i] * p[i]);
    return s;
  };
  f.gradient = [g](std::span<const double> p) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] / (1.0 + g[i] * p[i]);
    return out;
  };
  f.curvature = [g](std::span<const double> p) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double q = g[i] / (1.0 + g[i] * p[i]);
      out[i] = -q * q;
    }
    return out;
  };
  return f;
}

/// Fixed-channel optimum by pairwise Frank-Wolfe on sum_i ln(1 + g_i p_i).
inline OracleResult oracle_fixed(const ValidatedProblem& problem, double gap_tol = 1e-8) {
  FrankWolfeOptions opt;
  opt.gap_tol = gap_tol;
  opt.step = FrankWolfeStep::kPairwise;
  return frank_wolfe(fixed_rate_objective(problem.gains), LaminarPolytope{problem.partition},
                     opt);
}

/// Exhaustive search over the grid p_i = k_i * resolution (m <= 3).
///
/// The objective is increasing in every coordinate, so the last coordinate
/// only needs its largest feasible grid value. certified_gap is the Lipschitz
/// bound resolution * sum_i g_i.
inline OracleResult grid_oracle(const ValidatedProblem& problem, double resolution = 1e-3) {
  const std::size_t m = problem.num_antennas();
  if (m > 3) {
    throw Error(ErrorCode::kProblemTooLarge, "grid oracle supports at most 3 antennas");
  }
  if (!(resolution > 0.0)) {
    throw Error(ErrorCode::kDomainError, "grid resolution must be positive");
  }
  const auto& part = problem.partition;
  auto units = [resolution](double budget) {
    return static_cast<std::int64_t>(std::floor(budget / resolution + 1e-9));
  };
  const std::int64_t total_units = units(part.total());
  std::vector<std::int64_t> group_units(part.num_groups());
  for (std::size_t j = 0; j < part.num_groups(); ++j) group_units[j] = units(part.cap(j));

  // ln(1 + g_i k res) for every reachable k.
  std::vector<std::vector<double>> table(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::int64_t reach = std::min(total_units, group_units[part.group_of(i)]);
    table[i].resize(static_cast<std::size_t>(reach) + 1);
    for (std::int64_t k = 0; k <= reach; ++k) {
      table[i][static_cast<std::size_t>(k)] =
          std::log1p(problem.gains[i] * static_cast<double>(k) * resolution);
    }
  }

  std::vector<std::int64_t> k(m, 0);
  std::vector<std::int64_t> best_k(m, 0);
  double best = -1.0;
  std::size_t visited = 0;
  std::vector<std::int64_t> group_left = group_units;

  std::function<void(std::size_t, std::int64_t, double)> walk =
      [&](std::size_t i, std::int64_t total_left, double partial) {
        const std::size_t j = part.group_of(i);
        const std::int64_t reach = std::min(total_left, group_left[j]);
        if (i + 1 == m) {
          ++visited;
          const double value = partial + table[i][static_cast<std::size_t>(reach)];
          if (value > best) {
            best = value;
            k[i] = reach;
            best_k = k;
          }
          return;
        }
        for (std::int64_t u = 0; u <= reach; ++u) {
          k[i] = u;
          group_left[j] -= u;
          walk(i + 1, total_left - u, partial + table[i][static_cast<std::size_t>(u)]);
          group_left[j] += u;
        }
      };
  walk(0, total_units, 0.0);

  std::vector<double> p(m);
  double lipschitz = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    p[i] = static_cast<double>(best_k[i]) * resolution;
    lipschitz += problem.gains[i] * resolution;
  }
  OracleResult out;
  out.objective = best;
  out.allocation = make_allocation(part, std::move(p));
  out.iterations = visited;
  out.certified_gap = lipschitz;
  return out;
}

/// Sample-average fading objective over a fixed set of N i.i.d. gain
/// vectors, symmetrized over antennas: every antenna sees the pooled
/// empirical law of all N*m draws,
///
///   F(p) = sum_i (1/(N m)) sum_{n,k} ln(1 + g_k^{(n)} p_i).
///
/// This is the per-antenna average over the m cyclic shifts of each draw. The
/// true objective is exchangeable, so the shifted copies are equally valid
/// samples; pooling them removes antenna-specific sampling bias from the
/// argmax.
class FadingSampleAverage {
 public:
  FadingSampleAverage(std::size_t m, std::size_t n, std::uint64_t seed,
                      std::size_t workers = worker_count())
      : m_(m), workers_(workers) {
    if (m == 0 || n == 0) {
      throw Error(ErrorCode::kDomainError, "sample-average objective needs m, N > 0");
    }
    const auto ensemble = ChannelEnsemble::orthogonal_iid(m, seed);
    samples_.reserve(m * n);
    for (std::size_t s = 0; s < n; ++s) {
      const auto draw = std::get<std::vector<double>>(sample_gains(ensemble, s));
      samples_.insert(samples_.end(), draw.begin(), draw.end());
    }
  }

  std::size_t antennas() const noexcept { return m_; }
  std::size_t pooled_size() const noexcept { return samples_.size(); }

  /// Pooled mean of ln(1 + g p).
  double per_antenna(double p) const {
    double s = 0.0;
    for (double g : samples_) s += std::log1p(g * p);
    return s / static_cast<double>(samples_.size());
  }

  double value(std::span<const double> p) const {
    return sum_over(p, [this](double q) { return per_antenna(q); });
  }

  std::vector<double> gradient(std::span<const double> p) const {
    return map_coords(p, [this](double q) {
      double s = 0.0;
      for (double g : samples_) s += g / (1.0 + g * q);
      return s / static_cast<double>(samples_.size());
    });
  }

  std::vector<double> curvature(std::span<const double> p) const {
    return map_coords(p, [this](double q) {
      double s = 0.0;
      for (double g : samples_) {
        const double r = g / (1.0 + g * q);
        s -= r * r;
      }
      return s / static_cast<double>(samples_.size());
    });
  }

  ConcaveObjective as_objective() const {
    ConcaveObjective f;
    f.value = [this](std::span<const double> p) { return value(p); };
    f.gradient = [this](std::span<const double> p) { return gradient(p); };
    f.curvature = [this](std::span<const double> p) { return curvature(p); };
    return f;
  }

 private:
  // Evaluates fn once per distinct coordinate value; each evaluation is a
  // sequential sum, so results do not depend on the worker count.
  template <typename Fn>
  std::vector<double> map_coords(std::span<const double> p, Fn fn) const {
    std::vector<double> distinct(p.begin(), p.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> values(distinct.size());
    parallel_for_blocks(
        distinct.size(), [&](std::size_t b) { values[b] = fn(distinct[b]); }, workers_);
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto it = std::lower_bound(distinct.begin(), distinct.end(), p[i]);
      out[i] = values[static_cast<std::size_t>(it - distinct.begin())];
    }
    return out;
  }

  template <typename Fn>
  double sum_over(std::span<const double> p, Fn fn) const {
    const std::vector<double> v = map_coords(p, fn);
    return std::accumulate(v.begin(), v.end(), 0.0);
  }

  std::size_t m_;
  std::size_t workers_;
  std::vector<double> samples_;
};

/// Fading optimum of the symmetrized sample-average objective (N draws,
/// fixed by seed), by pairwise Frank-Wolfe.
inline OracleResult oracle_fading_saa(const GroupPartition& partition, std::size_t n,
                                      std::uint64_t seed, double gap_tol = 1e-6) {
  const FadingSampleAverage saa(partition.num_antennas(), n, seed);
  FrankWolfeOptions opt;
  opt.gap_tol = gap_tol;
  opt.step = FrankWolfeStep::kPairwise;
  return frank_wolfe(saa.as_objective(), LaminarPolytope{partition}, opt);
}

}  // namespace groupfill
