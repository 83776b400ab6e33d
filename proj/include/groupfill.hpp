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

// Umbrella header for the solver library. Problem-file readers live in
// groupfill/problem_io.hpp and need the groupfill::io target.

#pragma once

#include "groupfill/error.hpp"
#include "groupfill/problem.hpp"
#include "groupfill/fixed_solver.hpp"
#include "groupfill/fading_solver.hpp"
#include "groupfill/random.hpp"
#include "groupfill/parallel.hpp"
#include "groupfill/ergodic.hpp"
#include "groupfill/oracle.hpp"
#include "groupfill/generators.hpp"
#include "groupfill/sweep.hpp"
#include "groupfill/verify.hpp"
