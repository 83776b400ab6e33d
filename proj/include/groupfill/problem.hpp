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

// Problem inputs shared by every solver: per-antenna channel gains, the
// disjoint antenna groups with their power caps, the total power budget, and
// the allocation type the solvers return.
//
// Indices are 0-based everywhere in the C++ API. Problem files use 1-based
// antenna indices; the conversion happens in validate().

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "groupfill/error.hpp"

namespace groupfill {

/// Absolute slack (power units) tolerated on the budget constraints.
inline constexpr double kFeasibilityTol = 1e-9;

/// Positive, finite per-antenna channel power gains g_i.
class GainVector {
 public:
  explicit GainVector(std::vector<double> gains) : gains_(std::move(gains)) {
    if (gains_.empty()) {
      throw Error(ErrorCode::kEmptyProblem, "gain vector is empty");
    }
    for (double g : gains_) {
      if (!std::isfinite(g)) {
        throw Error(ErrorCode::kNonFiniteInput, "gain is not finite");
      }
      if (!(g > 0.0)) {
        throw Error(ErrorCode::kNegativeGain, "gain must be positive");
      }
    }
  }

  std::size_t size() const noexcept { return gains_.size(); }
  double operator[](std::size_t i) const { return gains_[i]; }
  std::span<const double> values() const noexcept { return gains_; }
  double max() const { return *std::max_element(gains_.begin(), gains_.end()); }

  friend bool operator==(const GainVector&, const GainVector&) = default;

 private:
  std::vector<double> gains_;
};

/// Disjoint antenna groups I(j) covering {0..m-1}, with caps P_j and total
/// budget P_T. Groups are kept sorted by their smallest member, and each
/// group's members ascending.
class GroupPartition {
 public:
  GroupPartition(std::vector<std::vector<std::size_t>> groups,
                 std::vector<double> caps, double total,
                 std::size_t num_antennas)
      : total_(total), owner_(num_antennas, kUnowned) {
    if (num_antennas == 0) {
      throw Error(ErrorCode::kEmptyProblem, "no antennas");
    }
    if (groups.empty()) {
      throw Error(ErrorCode::kInvalidGroup, "at least one group is required");
    }
    if (groups.size() != caps.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "got " + std::to_string(groups.size()) + " groups but " +
                      std::to_string(caps.size()) + " caps");
    }
    if (!std::isfinite(total)) {
      throw Error(ErrorCode::kNonFiniteInput, "total power is not finite");
    }
    if (!(total > 0.0)) {
      throw Error(ErrorCode::kNonPositiveBudget, "total power must be positive");
    }
    for (double cap : caps) {
      if (!std::isfinite(cap)) {
        throw Error(ErrorCode::kNonFiniteInput, "group cap is not finite");
      }
      if (!(cap > 0.0)) {
        throw Error(ErrorCode::kNonPositiveBudget, "group cap must be positive");
      }
    }

    // Each antenna's owner slot is written exactly once.
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (groups[j].empty()) {
        throw Error(ErrorCode::kInvalidGroup,
                    "group " + std::to_string(j) + " is empty");
      }
      for (std::size_t i : groups[j]) {
        if (i >= num_antennas) {
          throw Error(ErrorCode::kIndexOutOfRange,
                      "antenna index " + std::to_string(i) + " out of range");
        }
        if (owner_[i] != kUnowned) {
          throw Error(ErrorCode::kOverlappingGroups,
                      "antenna " + std::to_string(i) +
                          " appears in more than one group");
        }
        owner_[i] = j;
      }
    }
    for (std::size_t i = 0; i < num_antennas; ++i) {
      if (owner_[i] == kUnowned) {
        throw Error(ErrorCode::kUncoveredAntenna,
                    "antenna " + std::to_string(i) + " is in no group");
      }
    }

    for (auto& g : groups) std::sort(g.begin(), g.end());
    std::vector<std::size_t> order(groups.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return groups[a].front() < groups[b].front();
    });
    groups_.reserve(groups.size());
    caps_.reserve(groups.size());
    source_.reserve(groups.size());
    for (std::size_t j : order) {
      groups_.push_back(std::move(groups[j]));
      caps_.push_back(caps[j]);
      source_.push_back(j);
    }
    for (std::size_t j = 0; j < groups_.size(); ++j) {
      for (std::size_t i : groups_[j]) owner_[i] = j;
    }
  }

  std::size_t num_antennas() const noexcept { return owner_.size(); }
  std::size_t num_groups() const noexcept { return groups_.size(); }
  std::span<const std::size_t> group(std::size_t j) const { return groups_[j]; }
  std::size_t group_size(std::size_t j) const { return groups_[j].size(); }
  double cap(std::size_t j) const { return caps_[j]; }
  std::span<const double> caps() const noexcept { return caps_; }
  double total() const noexcept { return total_; }
  double cap_sum() const {
    return std::accumulate(caps_.begin(), caps_.end(), 0.0);
  }

  /// Group owning antenna i.
  std::size_t group_of(std::size_t i) const {
    if (i >= owner_.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "antenna index " + std::to_string(i) + " out of range");
    }
    return owner_[i];
  }

  /// Position of stored group j in the list handed to the constructor.
  std::size_t source_index(std::size_t j) const { return source_[j]; }

  /// Same groups and caps under a different total budget.
  GroupPartition with_total(double total) const {
    GroupPartition copy = *this;
    if (!std::isfinite(total)) {
      throw Error(ErrorCode::kNonFiniteInput, "total power is not finite");
    }
    if (!(total > 0.0)) {
      throw Error(ErrorCode::kNonPositiveBudget, "total power must be positive");
    }
    copy.total_ = total;
    return copy;
  }

  friend bool operator==(const GroupPartition& a, const GroupPartition& b) {
    return a.groups_ == b.groups_ && a.caps_ == b.caps_ && a.total_ == b.total_;
  }

 private:
  static constexpr std::size_t kUnowned = static_cast<std::size_t>(-1);

  std::vector<std::vector<std::size_t>> groups_;
  std::vector<double> caps_;
  double total_;
  std::vector<std::size_t> owner_;
  std::vector<std::size_t> source_;
};

/// Per-constraint slack of an allocation: cap minus usage (negative means
/// the constraint is violated).
struct FeasibilitySlack {
  double total = 0.0;
  std::vector<double> groups;
  double min_power = 0.0;

  bool feasible(double eps = kFeasibilityTol) const {
    if (total < -eps || min_power < 0.0) return false;
    return std::all_of(groups.begin(), groups.end(),
                       [eps](double s) { return s >= -eps; });
  }
};

struct PowerAllocation {
  std::vector<double> powers;
  FeasibilitySlack slack;

  std::size_t size() const noexcept { return powers.size(); }
  double sum() const { return std::accumulate(powers.begin(), powers.end(), 0.0); }
};

inline double group_sum(const GroupPartition& partition, std::size_t j,
                        std::span<const double> powers) {
  double s = 0.0;
  for (std::size_t i : partition.group(j)) s += powers[i];
  return s;
}

inline FeasibilitySlack compute_slack(const GroupPartition& partition,
                                      std::span<const double> powers) {
  if (powers.size() != partition.num_antennas()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "allocation has " + std::to_string(powers.size()) +
                    " entries for " + std::to_string(partition.num_antennas()) +
                    " antennas");
  }
  FeasibilitySlack slack;
  slack.total = partition.total() -
                std::accumulate(powers.begin(), powers.end(), 0.0);
  slack.groups.resize(partition.num_groups());
  for (std::size_t j = 0; j < partition.num_groups(); ++j) {
    slack.groups[j] = partition.cap(j) - group_sum(partition, j, powers);
  }
  slack.min_power = powers.empty()
                        ? 0.0
                        : *std::min_element(powers.begin(), powers.end());
  return slack;
}

inline PowerAllocation make_allocation(const GroupPartition& partition,
                                       std::vector<double> powers) {
  FeasibilitySlack slack = compute_slack(partition, powers);
  return PowerAllocation{std::move(powers), std::move(slack)};
}

/// Problem inputs as read from a file: 1-based antenna indices, nothing
/// checked yet. An empty `gains` means the file carried no gains, which is
/// fine for the fading solver.
struct RawProblem {
  std::vector<double> gains;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> caps;
  double total_power = 0.0;
};

/// A fully checked fixed-channel problem. Zero-gain antennas have been
/// stripped; index_map[i] is the original (0-based) index of internal
/// antenna i and group_map[j] the original position of stored group j.
struct ValidatedProblem {
  GainVector gains;
  GroupPartition partition;
  std::vector<std::size_t> index_map;
  std::vector<std::size_t> group_map;
  std::size_t original_antennas = 0;

  std::size_t num_antennas() const noexcept { return gains.size(); }
  std::size_t num_groups() const noexcept { return partition.num_groups(); }
};

namespace detail {

inline void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFiniteInput, std::string(what) + " is not finite");
    }
  }
}

// 1-based file indices to 0-based, with range and emptiness checks.
inline std::vector<std::vector<std::size_t>> zero_based_groups(
    const std::vector<std::vector<std::size_t>>& groups, std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (groups[j].empty()) {
      throw Error(ErrorCode::kInvalidGroup,
                  "group " + std::to_string(j + 1) + " is empty");
    }
    std::vector<std::size_t> g;
    g.reserve(groups[j].size());
    for (std::size_t idx : groups[j]) {
      if (idx < 1 || idx > m) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "antenna index " + std::to_string(idx) +
                        " outside 1.." + std::to_string(m));
      }
      g.push_back(idx - 1);
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline std::size_t antenna_count(const RawProblem& raw) {
  if (!raw.gains.empty()) return raw.gains.size();
  std::size_t m = 0;
  for (const auto& g : raw.groups) {
    for (std::size_t idx : g) m = std::max(m, idx);
  }
  return m;
}

}  // namespace detail

/// Validates a raw problem for the fixed-channel solvers.
///
/// Antennas with g_i = 0 carry no rate and are removed; a group left empty
/// by the removal is dropped together with its cap. Throws Error with
/// OverlappingGroups, UncoveredAntenna, NonPositiveBudget, NonFiniteInput,
/// NegativeGain, IndexOutOfRange, InvalidGroup, DimensionMismatch or
/// EmptyProblem.
inline ValidatedProblem validate(const RawProblem& raw) {
  const std::size_t m = raw.gains.size();
  if (m == 0) throw Error(ErrorCode::kEmptyProblem, "no gains given");
  detail::check_finite(raw.gains, "gain");
  detail::check_finite(raw.caps, "group cap");
  if (!std::isfinite(raw.total_power)) {
    throw Error(ErrorCode::kNonFiniteInput, "total power is not finite");
  }
  for (double g : raw.gains) {
    if (g < 0.0) throw Error(ErrorCode::kNegativeGain, "gain is negative");
  }

  // Full validation on the unstripped problem first so that structural
  // errors are reported against the file's own indexing.
  auto groups = detail::zero_based_groups(raw.groups, m);
  GroupPartition full(groups, raw.caps, raw.total_power, m);

  std::vector<std::size_t> new_index(m, static_cast<std::size_t>(-1));
  std::vector<std::size_t> index_map;
  std::vector<double> kept_gains;
  for (std::size_t i = 0; i < m; ++i) {
    if (raw.gains[i] > 0.0) {
      new_index[i] = index_map.size();
      index_map.push_back(i);
      kept_gains.push_back(raw.gains[i]);
    }
  }
  if (kept_gains.empty()) {
    throw Error(ErrorCode::kEmptyProblem, "every antenna has zero gain");
  }

  std::vector<std::vector<std::size_t>> kept_groups;
  std::vector<double> kept_caps;
  std::vector<std::size_t> kept_source;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    std::vector<std::size_t> g;
    for (std::size_t i : groups[j]) {
      if (new_index[i] != static_cast<std::size_t>(-1)) g.push_back(new_index[i]);
    }
    if (!g.empty()) {
      kept_groups.push_back(std::move(g));
      kept_caps.push_back(raw.caps[j]);
      kept_source.push_back(j);
    }
  }

  GroupPartition partition(std::move(kept_groups), std::move(kept_caps),
                           raw.total_power, index_map.size());
  std::vector<std::size_t> group_map(partition.num_groups());
  for (std::size_t j = 0; j < partition.num_groups(); ++j) {
    group_map[j] = kept_source[partition.source_index(j)];
  }
  return ValidatedProblem{GainVector(std::move(kept_gains)), std::move(partition),
                          std::move(index_map), std::move(group_map), m};
}

/// Validates only the partition part of a raw problem (gains, if any, are
/// ignored). The antenna count comes from the gains when present, otherwise
/// from the largest index mentioned in the groups.
inline GroupPartition validate_partition(const RawProblem& raw) {
  const std::size_t m = detail::antenna_count(raw);
  if (m == 0) throw Error(ErrorCode::kEmptyProblem, "no antennas");
  detail::check_finite(raw.caps, "group cap");
  if (!std::isfinite(raw.total_power)) {
    throw Error(ErrorCode::kNonFiniteInput, "total power is not finite");
  }
  return GroupPartition(detail::zero_based_groups(raw.groups, m), raw.caps,
                        raw.total_power, m);
}

/// Inverse of validate() in internal indexing (1-based groups).
inline RawProblem to_raw(const ValidatedProblem& problem) {
  RawProblem raw;
  raw.gains.assign(problem.gains.values().begin(), problem.gains.values().end());
  for (std::size_t j = 0; j < problem.num_groups(); ++j) {
    std::vector<std::size_t> g;
    for (std::size_t i : problem.partition.group(j)) g.push_back(i + 1);
    raw.groups.push_back(std::move(g));
    raw.caps.push_back(problem.partition.cap(j));
  }
  raw.total_power = problem.partition.total();
  return raw;
}

inline std::size_t group_of(const ValidatedProblem& problem, std::size_t i) {
  return problem.partition.group_of(i);
}

/// Maps internal per-antenna values back to the original antenna indexing,
/// filling stripped antennas with zero.
inline std::vector<double> expand_to_original(const ValidatedProblem& problem,
                                              std::span<const double> values) {
  std::vector<double> out(problem.original_antennas, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) out[problem.index_map[i]] = values[i];
  return out;
}

}  // namespace groupfill
