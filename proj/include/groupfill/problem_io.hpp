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

// Problem-file readers. Both formats share one schema:
//
//   gains        array of reals (optional; ignored by the fading solver)
//   groups       array of arrays of 1-based antenna indices
//   caps         array of reals, one per group
//   total_power  real
//
// Requires nlohmann/json and toml++ (link groupfill::io).

#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "groupfill/error.hpp"
#include "groupfill/problem.hpp"

namespace groupfill {

namespace detail {

[[noreturn]] inline void schema_error(const std::string& what) {
  throw Error(ErrorCode::kSchemaError, what);
}

inline std::size_t index_from_real(double v, const char* where) {
  if (!std::isfinite(v) || v < 1.0 || v != std::floor(v)) {
    schema_error(std::string(where) + ": antenna indices must be positive integers");
  }
  return static_cast<std::size_t>(v);
}

inline RawProblem parse_json_document(const nlohmann::json& doc) {
  if (!doc.is_object()) schema_error("top level must be an object");
  RawProblem raw;
  auto reals = [](const nlohmann::json& a, const char* key) {
    if (!a.is_array()) schema_error(std::string(key) + " must be an array");
    std::vector<double> out;
    for (const auto& v : a) {
      if (!v.is_number()) schema_error(std::string(key) + " must hold numbers");
      out.push_back(v.get<double>());
    }
    return out;
  };
  for (const auto& [key, value] : doc.items()) {
    if (key != "gains" && key != "groups" && key != "caps" && key != "total_power") {
      schema_error("unknown key '" + key + "'");
    }
  }
  if (doc.contains("gains")) raw.gains = reals(doc["gains"], "gains");
  if (!doc.contains("groups")) schema_error("missing key 'groups'");
  if (!doc.contains("caps")) schema_error("missing key 'caps'");
  if (!doc.contains("total_power")) schema_error("missing key 'total_power'");

  const auto& groups = doc["groups"];
  if (!groups.is_array()) schema_error("groups must be an array of arrays");
  for (const auto& g : groups) {
    if (!g.is_array()) schema_error("groups must be an array of arrays");
    std::vector<std::size_t> members;
    for (const auto& v : g) {
      if (!v.is_number()) schema_error("groups must hold integers");
      members.push_back(index_from_real(v.get<double>(), "groups"));
    }
    raw.groups.push_back(std::move(members));
  }
  raw.caps = reals(doc["caps"], "caps");
  if (!doc["total_power"].is_number()) schema_error("total_power must be a number");
  raw.total_power = doc["total_power"].get<double>();
  if (raw.caps.size() != raw.groups.size()) {
    schema_error("caps and groups differ in length");
  }
  return raw;
}

inline double toml_real(const toml::node& node, const char* key) {
  if (auto v = node.value<double>()) return *v;
  schema_error(std::string(key) + " must hold numbers");
}

inline RawProblem parse_toml_table(const toml::table& doc) {
  RawProblem raw;
  for (const auto& [key, value] : doc) {
    const std::string k(key.str());
    if (k != "gains" && k != "groups" && k != "caps" && k != "total_power") {
      schema_error("unknown key '" + k + "'");
    }
  }
  auto reals = [](const toml::node* n, const char* key) {
    const auto* arr = n ? n->as_array() : nullptr;
    if (!arr) schema_error(std::string(key) + " must be an array");
    std::vector<double> out;
    for (const auto& v : *arr) out.push_back(toml_real(v, key));
    return out;
  };
  if (const auto* g = doc.get("gains")) raw.gains = reals(g, "gains");
  const auto* groups = doc.get("groups");
  if (!groups) schema_error("missing key 'groups'");
  if (!doc.get("caps")) schema_error("missing key 'caps'");
  const auto* total = doc.get("total_power");
  if (!total) schema_error("missing key 'total_power'");

  const auto* outer = groups->as_array();
  if (!outer) schema_error("groups must be an array of arrays");
  for (const auto& g : *outer) {
    const auto* inner = g.as_array();
    if (!inner) schema_error("groups must be an array of arrays");
    std::vector<std::size_t> members;
    for (const auto& v : *inner) members.push_back(index_from_real(toml_real(v, "groups"), "groups"));
    raw.groups.push_back(std::move(members));
  }
  raw.caps = reals(doc.get("caps"), "caps");
  raw.total_power = toml_real(*total, "total_power");
  if (raw.caps.size() != raw.groups.size()) {
    schema_error("caps and groups differ in length");
  }
  return raw;
}

}  // namespace detail

inline RawProblem parse_problem_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    detail::schema_error(std::string("invalid JSON: ") + e.what());
  }
  return detail::parse_json_document(doc);
}

inline RawProblem parse_problem_toml(const std::string& text) {
  try {
    return detail::parse_toml_table(toml::parse(text));
  } catch (const toml::parse_error& e) {
    detail::schema_error(std::string("invalid TOML: ") + std::string(e.description()));
  }
}

/// Reads a problem file; the format follows the extension (.toml is TOML,
/// anything else JSON).
inline RawProblem read_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::schema_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const bool is_toml = path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  return is_toml ? parse_problem_toml(buf.str()) : parse_problem_json(buf.str());
}

inline nlohmann::json to_json(const RawProblem& raw) {
  nlohmann::json doc;
  if (!raw.gains.empty()) doc["gains"] = raw.gains;
  doc["groups"] = raw.groups;
  doc["caps"] = raw.caps;
  doc["total_power"] = raw.total_power;
  return doc;
}

}  // namespace groupfill
