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

#include <string>

#include "groupfill/problem_io.hpp"

namespace groupfill {
namespace {

const std::string kData = GROUPFILL_DATA_DIR;

ErrorCode json_error(const std::string& text) {
  try {
    parse_problem_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a schema error for " << text;
  return ErrorCode::kEmptyProblem;
}

TEST(ProblemIo, JsonAndTomlReadTheSameProblem) {
  const RawProblem a = read_problem_file(kData + "/nine_antennas.json");
  const RawProblem b = read_problem_file(kData + "/nine_antennas.toml");
  EXPECT_EQ(a.gains, b.gains);
  EXPECT_EQ(a.groups, b.groups);
  EXPECT_EQ(a.caps, b.caps);
  EXPECT_EQ(a.total_power, b.total_power);
  EXPECT_EQ(a.groups[1], (std::vector<std::size_t>{4, 5, 6, 7}));
}

TEST(ProblemIo, GainsAreOptional) {
  const RawProblem raw = read_problem_file(kData + "/fading_p8.json");
  EXPECT_TRUE(raw.gains.empty());
  EXPECT_EQ(validate_partition(raw).num_antennas(), 8u);
}

TEST(ProblemIo, SchemaErrors) {
  EXPECT_EQ(json_error("{"), ErrorCode::kSchemaError);
  EXPECT_EQ(json_error("[]"), ErrorCode::kSchemaError);
  EXPECT_EQ(json_error(R"({"groups":[[1]],"caps":[1]})"), ErrorCode::kSchemaError);
  EXPECT_EQ(json_error(R"({"groups":[[1]],"caps":[1],"total_power":"x"})"),
            ErrorCode::kSchemaError);
  EXPECT_EQ(json_error(R"({"groups":[[1.5]],"caps":[1],"total_power":1})"),
            ErrorCode::kSchemaError);
  EXPECT_EQ(json_error(R"({"groups":[[0]],"caps":[1],"total_power":1})"),
            ErrorCode::kSchemaError);
  EXPECT_EQ(json_error(R"({"groups":[[1]],"caps":[1,2],"total_power":1})"),
            ErrorCode::kSchemaError);
  EXPECT_EQ(json_error(R"({"groups":[[1]],"caps":[1],"total_power":1,"extra":2})"),
            ErrorCode::kSchemaError);
  EXPECT_THROW(parse_problem_toml("groups = [[1]]\ncaps = [1]\n"), Error);
  EXPECT_THROW(parse_problem_toml("groups = [[1]\n"), Error);
  EXPECT_THROW(read_problem_file(kData + "/does_not_exist.json"), Error);
}

TEST(ProblemIo, RoundTripThroughJson) {
  const RawProblem raw = read_problem_file(kData + "/hand_2x2.json");
  const RawProblem back = parse_problem_json(to_json(raw).dump());
  EXPECT_EQ(raw.gains, back.gains);
  EXPECT_EQ(raw.groups, back.groups);
  EXPECT_EQ(raw.caps, back.caps);
  EXPECT_EQ(raw.total_power, back.total_power);
}

TEST(ProblemIo, TomlIntegersReadAsReals) {
  const RawProblem raw =
      parse_problem_toml("gains = [1, 2.5]\ngroups = [[1, 2]]\ncaps = [3]\ntotal_power = 2\n");
  EXPECT_EQ(raw.gains, (std::vector<double>{1.0, 2.5}));
  EXPECT_DOUBLE_EQ(raw.total_power, 2.0);
}

}  // namespace
}  // namespace groupfill
