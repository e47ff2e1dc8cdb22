// SPDX-License-Identifier: Apache-2.0
// Schema helpers shared by the JSON readers. Every failure is a ParseError
// whose message names the document part that was being read.
#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "layoutprior/error.hpp"

namespace layoutprior::detail {

inline const nlohmann::json& require(const nlohmann::json& j, std::string_view key,
                                     std::string_view what) {
  if (!j.is_object()) {
    throw ParseError(std::string(what) + ": expected a JSON object");
  }
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(std::string(what) + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

inline double as_number(const nlohmann::json& j, std::string_view what) {
  if (!j.is_number()) throw ParseError(std::string(what) + ": expected a number");
  return j.get<double>();
}

inline long long as_integer(const nlohmann::json& j, std::string_view what) {
  if (!j.is_number_integer()) throw ParseError(std::string(what) + ": expected an integer");
  return j.get<long long>();
}

inline std::size_t as_count(const nlohmann::json& j, std::string_view what) {
  const long long v = as_integer(j, what);
  if (v < 0) throw ParseError(std::string(what) + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline std::string as_string(const nlohmann::json& j, std::string_view what) {
  if (!j.is_string()) throw ParseError(std::string(what) + ": expected a string");
  return j.get<std::string>();
}

inline const nlohmann::json& as_array(const nlohmann::json& j, std::string_view what) {
  if (!j.is_array()) throw ParseError(std::string(what) + ": expected an array");
  return j;
}

}  // namespace layoutprior::detail
