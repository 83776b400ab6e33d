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

#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace groupfill {

/// Worker count for internal parallel loops. GROUPFILL_THREADS overrides the
/// hardware default; results never depend on it.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("GROUPFILL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    return 1;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Calls fn(b) for every block b in [0, num_blocks), spread over up to
/// `workers` threads. fn must write its result to a slot owned by b; any
/// reduction over blocks is left to the caller, in block order.
template <typename Fn>
void parallel_for_blocks(std::size_t num_blocks, Fn&& fn,
                         std::size_t workers = worker_count()) {
  if (workers <= 1 || num_blocks <= 1) {
    for (std::size_t b = 0; b < num_blocks; ++b) fn(b);
    return;
  }
  if (workers > num_blocks) workers = num_blocks;

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (std::size_t b = t; b < num_blocks; b += workers) fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace groupfill
