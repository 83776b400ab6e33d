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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "groupfill/fading_solver.hpp"
#include "groupfill/fixed_solver.hpp"
#include "groupfill/generators.hpp"
#include "groupfill/problem_io.hpp"
#include "groupfill/sweep.hpp"

namespace groupfill {
namespace {

ValidatedProblem nine_antennas() {
  return validate(read_problem_file(std::string(GROUPFILL_DATA_DIR) + "/nine_antennas.json"));
}

GroupPartition eight() {
  return validate_partition({{}, {{1, 2, 3}, {4, 5, 6, 7}, {8}}, {15, 3, 6}, 8});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kDomainError;
}

TEST(ParseGrid, Examples) {
  EXPECT_EQ(parse_grid("1:3:1"), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(parse_grid("2.5"), (std::vector<double>{2.5}));
  EXPECT_EQ(parse_grid("1:30:1").size(), 30u);
  const auto g = parse_grid("0.1:0.3:0.1");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_NEAR(g.back(), 0.3, 1e-15);
  for (const char* bad : {"", "x", "1:2", "0:3:1", "3:1:1", "1:3:0", "-1", "1:3:1:4"}) {
    EXPECT_EQ(code_of([&] { parse_grid(bad); }), ErrorCode::kSchemaError) << bad;
  }
}

TEST(ParseCurves, NamesAndAliases) {
  EXPECT_EQ(parse_curves("JOINT,TPC_ONLY,PGPC_ONLY,JENSEN"),
            (std::vector<Curve>{Curve::kJoint, Curve::kTpcOnly, Curve::kPgpcOnly, Curve::kJensen}));
  EXPECT_EQ(parse_curves("joint,tpc,pgpc"),
            (std::vector<Curve>{Curve::kJoint, Curve::kTpcOnly, Curve::kPgpcOnly}));
  EXPECT_EQ(parse_curves("JOINT,JOINT"), std::vector<Curve>{Curve::kJoint});
  EXPECT_EQ(code_of([] { parse_curves("JOINT,BOGUS"); }), ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] { parse_curves(""); }), ErrorCode::kSchemaError);
}

TEST(CheckSpec, RejectsBadSpecs) {
  EXPECT_EQ(code_of([] { check_spec({{}, {Curve::kJoint}, SweepMode::kFixed}); }),
            ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] { check_spec({{1, 2}, {}, SweepMode::kFixed}); }), ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] { check_spec({{2, 1}, {Curve::kJoint}, SweepMode::kFixed}); }),
            ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] { check_spec({{1, 1}, {Curve::kJoint}, SweepMode::kFixed}); }),
            ErrorCode::kSchemaError);
  EXPECT_EQ(code_of([] { check_spec({{1}, {Curve::kJensen}, SweepMode::kFixed}); }),
            ErrorCode::kSchemaError);
  EXPECT_NO_THROW(check_spec({{1}, {Curve::kJensen}, SweepMode::kFading}));
}

TEST(FixedSweep, OrderingAndMonotonicity) {
  const ValidatedProblem p = nine_antennas();
  const SweepSpec spec{parse_grid("1:30:1"), {Curve::kJoint, Curve::kTpcOnly, Curve::kPgpcOnly},
                       SweepMode::kFixed};
  const auto rows = run_fixed_sweep(p, spec);
  ASSERT_EQ(rows.size(), 30u);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double joint = rows[k].values[0];
    EXPECT_LE(joint, rows[k].values[1] + 1e-9);
    EXPECT_LE(joint, rows[k].values[2] + 1e-9);
    if (k > 0) {
      EXPECT_GE(joint, rows[k - 1].values[0] - 1e-12);
    }
  }
  // Large budget: the total constraint is slack and JOINT meets PGPC_ONLY.
  const double big = 2.0 * p.partition.cap_sum();
  EXPECT_NEAR(fixed_curve_value(p, Curve::kJoint, big), fixed_curve_value(p, Curve::kPgpcOnly, big),
              1e-9);
}

TEST(FixedSweep, SingleBudgetMatchesSolve) {
  const ValidatedProblem p = nine_antennas();
  const SweepSpec spec{{p.partition.total()}, {Curve::kJoint}, SweepMode::kFixed};
  EXPECT_EQ(run_fixed_sweep(p, spec)[0].values[0], opa_fixed(p).capacity_nats);
}

TEST(FixedSweep, SmallBudgetMeetsTpc) {
  // Caps never bind below the smallest cap.
  SampleStream rng(11, 0);
  for (int k = 0; k < 50; ++k) {
    const ValidatedProblem p = random_problem(rng, 1 + uniform_index(rng, 10), 1);
    const double total = 0.5 * *std::min_element(p.partition.caps().begin(), p.partition.caps().end());
    EXPECT_NEAR(fixed_curve_value(p, Curve::kJoint, total),
                fixed_curve_value(p, Curve::kTpcOnly, total), 1e-9);
  }
}

TEST(FadingSweep, OrderingAndJensen) {
  const GroupPartition part = eight();
  const SweepSpec spec{parse_grid("1:40:1"),
                       {Curve::kJoint, Curve::kTpcOnly, Curve::kPgpcOnly, Curve::kJensen},
                       SweepMode::kFading};
  const auto rows = run_fading_sweep(part, spec);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& v = rows[k].values;
    EXPECT_LE(v[0], v[1] + 1e-12);
    EXPECT_LE(v[0], v[2] + 1e-12);
    EXPECT_LE(v[0], v[3]);
    if (k > 0) {
      EXPECT_GE(v[0], rows[k - 1].values[0]);
    }
    if (rows[k].total_power >= part.cap_sum()) {
      EXPECT_EQ(v[0], v[2]);
    }
  }
}

TEST(FadingSweep, TpcCurveIsUniformClosedForm) {
  const double total = 5.0;
  const double expect = 8.0 * expected_log_rayleigh(total / 8.0);
  EXPECT_DOUBLE_EQ(fading_curve_value(eight(), Curve::kTpcOnly, total), expect);
}

TEST(Csv, Format) {
  const SweepSpec spec{{1, 2}, {Curve::kJoint, Curve::kTpcOnly}, SweepMode::kFixed};
  const std::vector<SweepRow> rows{{1, {0.5, 0.25}}, {2, {1.0, 0.75}}};
  std::ostringstream os;
  write_csv(os, spec, rows);
  EXPECT_EQ(os.str(), "P_T,JOINT,TPC_ONLY\n1,0.5,0.25\n2,1,0.75\n");
  std::ostringstream bits;
  const SweepSpec one{{1}, {Curve::kJoint}, SweepMode::kFixed};
  write_csv(bits, one, {{1, {2.0 * std::log(2.0)}}}, kNatsToBits);
  const std::string text = bits.str();
  ASSERT_EQ(text.rfind("P_T,JOINT\n1,", 0), 0u);
  EXPECT_NEAR(std::stod(text.substr(12)), 2.0, 1e-15);
}

TEST(FormatReal, RoundTrips) {
  SampleStream rng(12, 0);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::ldexp(rng.uniform(), static_cast<int>(uniform_index(rng, 60)) - 30);
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
}

}  // namespace
}  // namespace groupfill
