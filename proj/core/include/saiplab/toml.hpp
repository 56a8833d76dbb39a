#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace saiplab {

/// Minimal TOML subset used for run configs: bare-key tables ([a] and
/// [a.b]), key = value pairs, strings, booleans, integers, floats, and
/// (nested, possibly multi-line) arrays. Comments start with '#'. Parsing
/// is strict; errors carry 1-based line numbers. Serialization is
/// canonical (sorted keys), so parse-serialize round trips are idempotent.
class TomlValue;
using TomlArray = std::vector<TomlValue>;

class TomlValue {
 public:
  using Storage = std::variant<bool, std::int64_t, double, std::string, TomlArray>;

  TomlValue() : v_(false) {}
  explicit TomlValue(Storage v) : v_(std::move(v)) {}

  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_double() const { return std::holds_alternative<double>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_array() const { return std::holds_alternative<TomlArray>(v_); }

  bool as_bool() const;
  std::int64_t as_int() const;
  /// Accepts integer literals too (promoted).
  double as_double() const;
  const std::string& as_string() const;
  const TomlArray& as_array() const;

 private:
  Storage v_;
};

class TomlTable {
 public:
  std::map<std::string, TomlValue> values;
  std::map<std::string, TomlTable> tables;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  bool has_table(const std::string& key) const { return tables.count(key) > 0; }
  const TomlValue& at(const std::string& key) const;
  const TomlTable& table(const std::string& key) const;

  // Typed lookups with defaults.
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
};

TomlTable parse_toml(const std::string& text);
std::string serialize_toml(const TomlTable& root);

}  // namespace saiplab
