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

// Seeded random problem instances for verification runs and tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "groupfill/problem.hpp"
#include "groupfill/random.hpp"

namespace groupfill {

/// Uniform integer in [0, n).
inline std::size_t uniform_index(SampleStream& rng, std::size_t n) {
  const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
  return std::min(k, n - 1);
}

/// Random split of m antennas into s non-empty groups (1-based indices).
inline std::vector<std::vector<std::size_t>> random_groups(SampleStream& rng, std::size_t m,
                                                           std::size_t s) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{1});
  for (std::size_t i = m; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  std::vector<std::vector<std::size_t>> groups(s);
  for (std::size_t k = 0; k < m; ++k) {
    groups[k < s ? k : uniform_index(rng, s)].push_back(perm[k]);
  }
  return groups;
}

/// Gains log-uniform in [0.1, 10]; P_T and every P_j uniform in (0, 2m].
inline RawProblem random_raw_problem(SampleStream& rng, std::size_t m, std::size_t s) {
  RawProblem raw;
  raw.gains.resize(m);
  for (auto& g : raw.gains) g = std::exp(std::log(0.1) + rng.uniform() * std::log(100.0));
  raw.groups = random_groups(rng, m, s);
  const double top = 2.0 * static_cast<double>(m);
  raw.caps.resize(s);
  for (auto& c : raw.caps) c = rng.uniform() * top;
  raw.total_power = rng.uniform() * top;
  return raw;
}

inline ValidatedProblem random_problem(SampleStream& rng, std::size_t m, std::size_t s) {
  return validate(random_raw_problem(rng, m, s));
}

inline GroupPartition random_partition(SampleStream& rng, std::size_t m, std::size_t s) {
  RawProblem raw = random_raw_problem(rng, m, s);
  raw.gains.clear();
  return validate_partition(raw);
}

}  // namespace groupfill
