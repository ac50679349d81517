#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace susc {

/// Error with the offending line/key attached.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + msg : "config: " + msg) {}
};

/// Value in a structured-text config: number, boolean, string, or array.
struct ConfigValue {
  enum class Kind { number, boolean, string, array };
  Kind kind = Kind::number;
  double num = 0.0;
  bool flag = false;
  std::string str;
  std::vector<ConfigValue> arr;

  double as_number(const std::string& key) const {
    if (kind != Kind::number) throw ConfigError("key '" + key + "' must be a number");
    return num;
  }
  const std::string& as_string(const std::string& key) const {
    if (kind != Kind::string) throw ConfigError("key '" + key + "' must be a string");
    return str;
  }
  bool as_bool(const std::string& key) const {
    if (kind != Kind::boolean) throw ConfigError("key '" + key + "' must be a boolean");
    return flag;
  }
  const std::vector<ConfigValue>& as_array(const std::string& key) const {
    if (kind != Kind::array) throw ConfigError("key '" + key + "' must be an array");
    return arr;
  }
};

struct ConfigTable {
  std::map<std::string, ConfigValue> values;
  int line = 0;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  const ConfigValue& require(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing required key '" + key + "'", line);
    return it->second;
  }

  double number(const std::string& key) const { return require(key).as_number(key); }
  double number_or(const std::string& key, double dflt) const {
    return has(key) ? require(key).as_number(key) : dflt;
  }
  std::string string_or(const std::string& key, const std::string& dflt) const {
    return has(key) ? require(key).as_string(key) : dflt;
  }
  bool bool_or(const std::string& key, bool dflt) const { return has(key) ? require(key).as_bool(key) : dflt; }

  std::vector<double> number_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : require(key).as_array(key)) out.push_back(v.as_number(key));
    return out;
  }

  std::vector<int> int_list(const std::string& key) const {
    std::vector<int> out;
    for (double v : number_list(key)) out.push_back(static_cast<int>(v));
    return out;
  }
};

/// Parsed config: top-level [tables] plus repeated [[tables]].
struct ConfigDoc {
  std::map<std::string, ConfigTable> tables;
  std::map<std::string, std::vector<ConfigTable>> table_arrays;

  const ConfigTable& table(const std::string& name) const {
    auto it = tables.find(name);
    if (it == tables.end()) throw ConfigError("missing required table [" + name + "]");
    return it->second;
  }

  ConfigTable table_or_empty(const std::string& name) const {
    auto it = tables.find(name);
    return it == tables.end() ? ConfigTable{} : it->second;
  }

  const std::vector<ConfigTable>& array(const std::string& name) const {
    static const std::vector<ConfigTable> empty;
    auto it = table_arrays.find(name);
    return it == table_arrays.end() ? empty : it->second;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline ConfigValue parse_value(const std::string& raw, int line);

inline std::vector<std::string> split_top_level(const std::string& s, int line) {
  std::vector<std::string> parts;
  int depth = 0;
  bool in_str = false;
  std::string cur;
  for (char c : s) {
    if (in_str) {
      cur += c;
      if (c == '"') in_str = false;
      continue;
    }
    switch (c) {
      case '"': in_str = true; cur += c; break;
      case '[': ++depth; cur += c; break;
      case ']': --depth; if (depth < 0) throw ConfigError("unbalanced ']'", line); cur += c; break;
      case ',':
        if (depth == 0) {
          parts.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
        break;
      default: cur += c;
    }
  }
  if (depth != 0 || in_str) throw ConfigError("unbalanced array or string", line);
  if (!trim(cur).empty() || !parts.empty()) parts.push_back(cur);
  return parts;
}

inline ConfigValue parse_value(const std::string& raw, int line) {
  std::string s = trim(raw);
  if (s.empty()) throw ConfigError("empty value", line);
  ConfigValue v;
  if (s.front() == '[') {
    if (s.back() != ']') throw ConfigError("array missing ']'", line);
    v.kind = ConfigValue::Kind::array;
    std::string inner = trim(s.substr(1, s.size() - 2));
    if (!inner.empty())
      for (const auto& part : split_top_level(inner, line)) v.arr.push_back(parse_value(part, line));
    return v;
  }
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw ConfigError("string missing closing quote", line);
    v.kind = ConfigValue::Kind::string;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.flag = (s == "true");
    return v;
  }
  char* end = nullptr;
  v.num = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError("cannot parse value '" + s + "'", line);
  v.kind = ConfigValue::Kind::number;
  return v;
}

inline std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

}  // namespace detail

inline ConfigDoc parse_config(std::istream& is) {
  ConfigDoc doc;
  ConfigTable* current = nullptr;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty()) continue;
    if (s.size() >= 4 && s.substr(0, 2) == "[[" && s.substr(s.size() - 2) == "]]") {
      std::string name = detail::trim(s.substr(2, s.size() - 4));
      if (name.empty()) throw ConfigError("empty table name", lineno);
      doc.table_arrays[name].push_back(ConfigTable{{}, lineno});
      current = &doc.table_arrays[name].back();
      continue;
    }
    if (s.front() == '[' && s.back() == ']') {
      std::string name = detail::trim(s.substr(1, s.size() - 2));
      if (name.empty()) throw ConfigError("empty table name", lineno);
      auto [it, fresh] = doc.tables.emplace(name, ConfigTable{{}, lineno});
      if (!fresh) throw ConfigError("duplicate table [" + name + "]", lineno);
      current = &it->second;
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
    std::string key = detail::trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("empty key", lineno);
    if (!current) throw ConfigError("key '" + key + "' outside any [table]", lineno);
    if (current->values.count(key)) throw ConfigError("duplicate key '" + key + "'", lineno);
    current->values[key] = detail::parse_value(s.substr(eq + 1), lineno);
  }
  return doc;
}

inline ConfigDoc parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  return parse_config(f);
}

inline ConfigDoc parse_config_string(const std::string& text) {
  std::istringstream ss(text);
  return parse_config(ss);
}

}  // namespace susc
