#pragma once

// Small helpers for strict schema checks over nlohmann::json documents.

#include <cmath>
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "srw/error.hpp"

namespace srw::detail {

using json = nlohmann::json;

inline json parse_json(std::string_view bytes, std::string_view what) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < bytes.size(); ++i)
      if (bytes[i] == '\n') ++line;
    throw Error(ErrorKind::SchemaViolation,
                std::string(what) + ": malformed JSON at line " + std::to_string(line) + ": " + e.what());
  }
}

[[noreturn]] inline void schema_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::SchemaViolation, (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

inline std::string join_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
}

/// Rejects unknown keys and reports missing required ones.
inline void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional = {}) {
  expect_object(j, path);
  std::set<std::string_view> allowed(required);
  allowed.insert(optional.begin(), optional.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) schema_error(join_path(path, it.key()), "unknown field");
  }
  for (auto key : required) {
    if (!j.contains(key)) schema_error(join_path(path, key), "missing required field");
  }
}

inline const json& field(const json& j, std::string_view key) { return j.at(std::string(key)); }

inline std::string get_string(const json& j, std::string_view key, const std::string& path) {
  const auto& v = field(j, key);
  if (!v.is_string()) schema_error(join_path(path, key), "expected a string");
  return v.get<std::string>();
}

inline std::string get_string_or(const json& j, std::string_view key, const std::string& path, std::string fallback) {
  if (!j.contains(key)) return fallback;
  return get_string(j, key, path);
}

inline double get_number(const json& j, std::string_view key, const std::string& path) {
  const auto& v = field(j, key);
  if (!v.is_number()) schema_error(join_path(path, key), "expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) schema_error(join_path(path, key), "expected a finite number");
  return d;
}

inline double as_probability(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected a number");
  double d = v.get<double>();
  if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorKind::BadProbability, path + ": probability out of [0,1]");
  return d;
}

inline double get_probability(const json& j, std::string_view key, const std::string& path) {
  return as_probability(field(j, key), join_path(path, key));
}

inline bool get_bool_or(const json& j, std::string_view key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = field(j, key);
  if (!v.is_boolean()) schema_error(join_path(path, key), "expected a boolean");
  return v.get<bool>();
}

inline const json& get_array(const json& j, std::string_view key, const std::string& path) {
  const auto& v = field(j, key);
  if (!v.is_array()) schema_error(join_path(path, key), "expected an array");
  return v;
}

}  // namespace srw::detail
