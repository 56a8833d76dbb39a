#include "saiplab/toml.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "saiplab/errors.hpp"

namespace saiplab {

bool TomlValue::as_bool() const {
  if (!is_bool()) throw ConfigError("expected a boolean value");
  return std::get<bool>(v_);
}

std::int64_t TomlValue::as_int() const {
  if (!is_int()) throw ConfigError("expected an integer value");
  return std::get<std::int64_t>(v_);
}

double TomlValue::as_double() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(v_));
  if (!is_double()) throw ConfigError("expected a numeric value");
  return std::get<double>(v_);
}

const std::string& TomlValue::as_string() const {
  if (!is_string()) throw ConfigError("expected a string value");
  return std::get<std::string>(v_);
}

const TomlArray& TomlValue::as_array() const {
  if (!is_array()) throw ConfigError("expected an array value");
  return std::get<TomlArray>(v_);
}

const TomlValue& TomlTable::at(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

const TomlTable& TomlTable::table(const std::string& key) const {
  auto it = tables.find(key);
  if (it == tables.end()) throw ConfigError("missing required table [" + key + "]");
  return it->second;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  return has(key) ? at(key).as_double() : fallback;
}

std::int64_t TomlTable::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? at(key).as_int() : fallback;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? at(key).as_bool() : fallback;
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? at(key).as_string() : fallback;
}

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  void skip_ws_and_comments(bool stop_at_newline) {
    while (!done()) {
      char c = peek();
      if (c == '#') {
        while (!done() && peek() != '\n') take();
      } else if (c == '\n') {
        if (stop_at_newline) return;
        take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        return;
      }
    }
  }
};

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_bare_key(Cursor& cur) {
  std::string key;
  while (!cur.done() && is_bare_key_char(cur.peek())) key += cur.take();
  if (key.empty()) throw ConfigError("expected a key", cur.line);
  return key;
}

std::string parse_basic_string(Cursor& cur) {
  cur.take();  // opening quote
  std::string out;
  while (true) {
    if (cur.done()) throw ConfigError("unterminated string", cur.line);
    char c = cur.take();
    if (c == '"') break;
    if (c == '\n') throw ConfigError("newline inside string", cur.line - 1);
    if (c == '\\') {
      if (cur.done()) throw ConfigError("unterminated escape", cur.line);
      char e = cur.take();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ConfigError(std::string("unsupported escape '\\") + e + "'", cur.line);
      }
    } else {
      out += c;
    }
  }
  return out;
}

TomlValue parse_value(Cursor& cur);

TomlValue parse_array(Cursor& cur) {
  cur.take();  // '['
  TomlArray arr;
  while (true) {
    cur.skip_ws_and_comments(false);
    if (cur.done()) throw ConfigError("unterminated array", cur.line);
    if (cur.peek() == ']') {
      cur.take();
      break;
    }
    arr.push_back(parse_value(cur));
    cur.skip_ws_and_comments(false);
    if (cur.done()) throw ConfigError("unterminated array", cur.line);
    if (cur.peek() == ',') {
      cur.take();
    } else if (cur.peek() != ']') {
      throw ConfigError("expected ',' or ']' in array", cur.line);
    }
  }
  return TomlValue(std::move(arr));
}

TomlValue parse_scalar(Cursor& cur) {
  std::string tok;
  while (!cur.done()) {
    char c = cur.peek();
    if (c == ',' || c == ']' || c == '#' || c == '\n' || std::isspace(static_cast<unsigned char>(c))) break;
    tok += cur.take();
  }
  if (tok.empty()) throw ConfigError("expected a value", cur.line);
  if (tok == "true") return TomlValue(TomlValue::Storage(true));
  if (tok == "false") return TomlValue(TomlValue::Storage(false));
  const bool looks_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "-inf" ||
                           tok == "nan";
  try {
    size_t used = 0;
    if (!looks_float) {
      std::int64_t i = std::stoll(tok, &used);
      if (used == tok.size()) return TomlValue(TomlValue::Storage(i));
    }
    double d = std::stod(tok, &used);
    if (used == tok.size()) return TomlValue(TomlValue::Storage(d));
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse value '" + tok + "'", cur.line);
}

TomlValue parse_value(Cursor& cur) {
  cur.skip_ws_and_comments(false);
  if (cur.done()) throw ConfigError("expected a value", cur.line);
  char c = cur.peek();
  if (c == '"') return TomlValue(TomlValue::Storage(parse_basic_string(cur)));
  if (c == '[') return parse_array(cur);
  return parse_scalar(cur);
}

TomlTable* resolve_table(TomlTable& root, const std::string& dotted, int line) {
  TomlTable* t = &root;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("empty table name component", line);
    t = &t->tables[part];
  }
  return t;
}

std::string fmt_double(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void serialize_value(std::ostream& out, const TomlValue& v) {
  if (v.is_bool()) {
    out << (v.as_bool() ? "true" : "false");
  } else if (v.is_int()) {
    out << v.as_int();
  } else if (v.is_double()) {
    out << fmt_double(v.as_double());
  } else if (v.is_string()) {
    out << '"';
    for (char c : v.as_string()) {
      if (c == '"' || c == '\\') out << '\\';
      out << c;
    }
    out << '"';
  } else {
    out << '[';
    const auto& arr = v.as_array();
    for (size_t i = 0; i < arr.size(); ++i) {
      if (i) out << ", ";
      serialize_value(out, arr[i]);
    }
    out << ']';
  }
}

void serialize_table(std::ostream& out, const TomlTable& t, const std::string& prefix) {
  for (const auto& [key, value] : t.values) {
    out << key << " = ";
    serialize_value(out, value);
    out << '\n';
  }
  for (const auto& [name, sub] : t.tables) {
    const std::string full = prefix.empty() ? name : prefix + "." + name;
    out << '\n' << '[' << full << "]\n";
    serialize_table(out, sub, full);
  }
}

}  // namespace

TomlTable parse_toml(const std::string& text) {
  TomlTable root;
  TomlTable* current = &root;
  Cursor cur{text};
  while (true) {
    cur.skip_ws_and_comments(false);
    if (cur.done()) break;
    const int line = cur.line;
    char c = cur.peek();
    if (c == '[') {
      cur.take();
      std::string name;
      while (!cur.done() && cur.peek() != ']' && cur.peek() != '\n') name += cur.take();
      if (cur.done() || cur.peek() != ']') throw ConfigError("unterminated table header", line);
      cur.take();
      // trim
      size_t b = name.find_first_not_of(" \t");
      size_t e = name.find_last_not_of(" \t");
      if (b == std::string::npos) throw ConfigError("empty table name", line);
      current = resolve_table(root, name.substr(b, e - b + 1), line);
      cur.skip_ws_and_comments(true);
      if (!cur.done() && cur.peek() != '\n') throw ConfigError("unexpected text after table header", line);
      continue;
    }
    std::string key = parse_bare_key(cur);
    cur.skip_ws_and_comments(true);
    if (cur.done() || cur.peek() != '=') throw ConfigError("expected '=' after key '" + key + "'", line);
    cur.take();
    TomlValue value = parse_value(cur);
    cur.skip_ws_and_comments(true);
    if (!cur.done() && cur.peek() != '\n')
      throw ConfigError("unexpected trailing text after value for '" + key + "'", cur.line);
    if (current->values.count(key)) throw ConfigError("duplicate key '" + key + "'", line);
    current->values.emplace(key, std::move(value));
  }
  return root;
}

std::string serialize_toml(const TomlTable& root) {
  std::ostringstream out;
  serialize_table(out, root, "");
  return out.str();
}

}  // namespace saiplab
