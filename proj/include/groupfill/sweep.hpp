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

// Capacity-versus-budget sweeps and their CSV form.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "groupfill/error.hpp"
#include "groupfill/ergodic.hpp"
#include "groupfill/fading_solver.hpp"
#include "groupfill/fixed_solver.hpp"
#include "groupfill/problem.hpp"

namespace groupfill {

enum class Curve { kJoint, kTpcOnly, kPgpcOnly, kJensen };
enum class SweepMode { kFixed, kFading };

inline const char* to_string(Curve c) {
  switch (c) {
    case Curve::kJoint: return "JOINT";
    case Curve::kTpcOnly: return "TPC_ONLY";
    case Curve::kPgpcOnly: return "PGPC_ONLY";
    case Curve::kJensen: return "JENSEN";
  }
  return "JOINT";
}

inline const char* to_string(SweepMode m) {
  return m == SweepMode::kFixed ? "FIXED" : "FADING";
}

struct SweepSpec {
  std::vector<double> budget_grid;
  std::vector<Curve> curves;
  SweepMode mode = SweepMode::kFixed;
};

struct SweepRow {
  double total_power = 0.0;
  std::vector<double> values;  // one per requested curve, in request order
};

namespace detail {

inline double parse_real(std::string_view text, const char* what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorCode::kSchemaError, std::string(what) + ": '" + std::string(text) +
                                             "' is not a number");
  }
  return v;
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

/// Parses "a:b:step" into a, a+step, ..., up to b (inclusive within 1e-9 of
/// a step). A single number gives a one-point grid.
inline std::vector<double> parse_grid(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() == 1) {
    const double v = detail::parse_real(parts[0], "grid");
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kSchemaError, "grid values must be positive");
    }
    return {v};
  }
  if (parts.size() != 3) throw Error(ErrorCode::kSchemaError, "grid must be a:b:step");
  const double a = detail::parse_real(parts[0], "grid");
  const double b = detail::parse_real(parts[1], "grid");
  const double step = detail::parse_real(parts[2], "grid");
  if (!(a > 0.0) || !(step > 0.0) || !(b >= a) || !std::isfinite(b)) {
    throw Error(ErrorCode::kSchemaError, "grid needs 0 < a <= b and step > 0");
  }
  const double count = std::floor((b - a) / step + 1e-9);
  if (count > 1e7) throw Error(ErrorCode::kSchemaError, "grid has too many points");
  std::vector<double> grid;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(count); ++k) {
    grid.push_back(a + static_cast<double>(k) * step);
  }
  return grid;
}

/// Parses a comma-separated curve list (case-insensitive; "TPC" and "PGPC"
/// are accepted as short names).
inline std::vector<Curve> parse_curves(std::string_view text) {
  std::vector<Curve> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const std::string name = detail::upper(text.substr(start, pos - start));
    Curve c;
    if (name == "JOINT") {
      c = Curve::kJoint;
    } else if (name == "TPC_ONLY" || name == "TPC") {
      c = Curve::kTpcOnly;
    } else if (name == "PGPC_ONLY" || name == "PGPC") {
      c = Curve::kPgpcOnly;
    } else if (name == "JENSEN") {
      c = Curve::kJensen;
    } else {
      throw Error(ErrorCode::kSchemaError, "unknown curve '" + name + "'");
    }
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline void check_spec(const SweepSpec& spec) {
  if (spec.budget_grid.empty()) throw Error(ErrorCode::kSchemaError, "empty budget grid");
  if (spec.curves.empty()) throw Error(ErrorCode::kSchemaError, "no curves requested");
  for (std::size_t k = 0; k < spec.budget_grid.size(); ++k) {
    const double v = spec.budget_grid[k];
    if (!(v > 0.0) || !std::isfinite(v) || (k > 0 && !(v > spec.budget_grid[k - 1]))) {
      throw Error(ErrorCode::kSchemaError, "budget grid must be positive and strictly increasing");
    }
  }
  if (spec.mode == SweepMode::kFixed &&
      std::find(spec.curves.begin(), spec.curves.end(), Curve::kJensen) != spec.curves.end()) {
    throw Error(ErrorCode::kSchemaError, "JENSEN is only defined for FADING sweeps");
  }
}

inline ValidatedProblem with_total(const ValidatedProblem& problem, double total) {
  ValidatedProblem out = problem;
  out.partition = problem.partition.with_total(total);
  return out;
}

/// Fixed-channel capacity (nats) of one curve at budget P_T.
inline double fixed_curve_value(const ValidatedProblem& problem, Curve curve, double total,
                                double tol = kDefaultBisectionTol) {
  switch (curve) {
    case Curve::kJoint: return opa_fixed(with_total(problem, total), tol).capacity_nats;
    case Curve::kTpcOnly: return capacity_fixed(problem.gains, waterfill_tpc(problem.gains, total));
    case Curve::kPgpcOnly: return capacity_fixed(problem.gains, waterfill_pgpc(problem));
    case Curve::kJensen: break;
  }
  throw Error(ErrorCode::kSchemaError, "JENSEN is only defined for FADING sweeps");
}

/// Ergodic capacity (nats, unit-mean exponential gains) of one curve at P_T.
inline double fading_curve_value(const GroupPartition& partition, Curve curve, double total) {
  const GroupPartition part = partition.with_total(total);
  switch (curve) {
    case Curve::kJoint:
      return ergodic_capacity_closed_form(opa_fading(part).allocation.powers);
    case Curve::kTpcOnly: {
      const double m = static_cast<double>(part.num_antennas());
      return m * expected_log_rayleigh(total / m);
    }
    case Curve::kPgpcOnly: {
      double c = 0.0;
      for (std::size_t j = 0; j < part.num_groups(); ++j) {
        const double n = static_cast<double>(part.group_size(j));
        c += n * expected_log_rayleigh(part.cap(j) / n);
      }
      return c;
    }
    case Curve::kJensen: {
      const auto report = opa_fading(part);
      const std::vector<double> unit(part.num_antennas(), 1.0);
      return jensen_upper_bound(report.allocation.powers, unit);
    }
  }
  return 0.0;
}

inline std::vector<SweepRow> run_fixed_sweep(const ValidatedProblem& problem,
                                             const SweepSpec& spec,
                                             double tol = kDefaultBisectionTol) {
  check_spec(spec);
  std::vector<SweepRow> rows;
  for (double total : spec.budget_grid) {
    SweepRow row{total, {}};
    for (Curve c : spec.curves) row.values.push_back(fixed_curve_value(problem, c, total, tol));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<SweepRow> run_fading_sweep(const GroupPartition& partition,
                                              const SweepSpec& spec) {
  check_spec(spec);
  std::vector<SweepRow> rows;
  for (double total : spec.budget_grid) {
    SweepRow row{total, {}};
    for (Curve c : spec.curves) row.values.push_back(fading_curve_value(partition, c, total));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Round-trip-safe text for a double (17 significant digits).
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr double kNatsToBits = 1.0 / std::numbers::ln2;

/// Header row plus one row per budget. Capacities are scaled by `unit`
/// (1 for nats, kNatsToBits for bits).
inline void write_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows,
                      double unit = 1.0) {
  os << "P_T";
  for (Curve c : spec.curves) os << ',' << to_string(c);
  os << '\n';
  for (const auto& row : rows) {
    os << format_real(row.total_power);
    for (double v : row.values) os << ',' << format_real(v * unit);
    os << '\n';
  }
}

}  // namespace groupfill
