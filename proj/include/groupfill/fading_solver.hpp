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

// Active-group allocation for i.i.d. fading orthogonal channels.
//
// With i.i.d. gains the ergodic rate is symmetric and concave in the powers,
// so the optimum only depends on the partition: a group is "active" (pinned
// at its cap, split evenly) when the running average power P/L of the
// unassigned antennas reaches its per-antenna cap P_j/|I(j)|, and every
// antenna left over shares the remaining power evenly.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "groupfill/problem.hpp"

namespace groupfill {

/// Activation ties within this absolute margin count as active.
inline constexpr double kFadingTieTol = 1e-12;

struct FadingSolveReport {
  PowerAllocation allocation;
  /// Group indices in the order they were activated.
  std::vector<std::size_t> active_groups;
  std::size_t rounds = 0;
  double residual_power = 0.0;
  std::size_t residual_count = 0;
};

/// Runs the active-group procedure to its fixpoint.
///
/// Each pass compares the P/L in force at the start of the pass against every
/// remaining group in stored order and activates all that qualify; P/L is
/// recomputed once the pass ends. A pass that activates nothing ends the loop,
/// so there are at most s passes.
inline FadingSolveReport opa_fading(const GroupPartition& partition) {
  const std::size_t s = partition.num_groups();
  FadingSolveReport report;
  std::vector<double> powers(partition.num_antennas(), 0.0);
  std::vector<bool> remaining(s, true);

  double power = partition.total();
  std::size_t count = partition.num_antennas();
  double last_average = power / static_cast<double>(count);

  while (count > 0) {
    const double average = power / static_cast<double>(count);
    // Activating a group at or below the running average can only raise it.
    if (average < last_average - kFadingTieTol) {
      throw std::logic_error("running average power decreased between passes");
    }
    last_average = average;

    bool activated = false;
    for (std::size_t j = 0; j < s; ++j) {
      if (!remaining[j]) continue;
      const double per_antenna = partition.cap(j) / static_cast<double>(partition.group_size(j));
      if (average >= per_antenna - kFadingTieTol) {
        for (std::size_t i : partition.group(j)) powers[i] = per_antenna;
        power -= partition.cap(j);
        count -= partition.group_size(j);
        remaining[j] = false;
        report.active_groups.push_back(j);
        activated = true;
      }
    }
    if (!activated) break;
    ++report.rounds;
  }

  report.residual_power = power;
  report.residual_count = count;
  if (count > 0) {
    const double share = power / static_cast<double>(count);
    for (std::size_t j = 0; j < s; ++j) {
      if (!remaining[j]) continue;
      for (std::size_t i : partition.group(j)) powers[i] = share;
    }
  }
  report.allocation = make_allocation(partition, std::move(powers));
  return report;
}

enum class FadingCase { kCase1, kCase2, kGeneral };

inline const char* to_string(FadingCase c) {
  switch (c) {
    case FadingCase::kCase1: return "Case 1";
    case FadingCase::kCase2: return "Case 2";
    case FadingCase::kGeneral: return "General";
  }
  return "General";
}

/// Case 2: P_T >= sum_j P_j (every cap binds). Case 1: P_T/m <= P_j/|I(j)|
/// for all j (no cap binds, uniform split). Case 2 wins when both hold.
inline FadingCase detect_case(const GroupPartition& partition) {
  if (partition.total() >= partition.cap_sum()) return FadingCase::kCase2;
  const double average =
      partition.total() / static_cast<double>(partition.num_antennas());
  for (std::size_t j = 0; j < partition.num_groups(); ++j) {
    if (average > partition.cap(j) / static_cast<double>(partition.group_size(j))) {
      return FadingCase::kGeneral;
    }
  }
  return FadingCase::kCase1;
}

}  // namespace groupfill
