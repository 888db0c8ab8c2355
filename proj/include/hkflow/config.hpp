#ifndef HKFLOW_CONFIG_HPP
#define HKFLOW_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace hkflow {

class ConfigError : public Error {
public:
  using Error::Error;
};

/// Line-oriented `key = value` file with `[section]` headers.  Keys are addressed as
/// "section.key"; keys before the first header live in the empty section and are addressed
/// by their bare name.  '#' and ';' start comments.
class Config {
public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static Config parse(std::istream& in, const std::string& source = "<config>")
  {
    Config c;
    c.source_ = source;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string s = trim(strip_comment(raw));
      if (s.empty())
        continue;
      if (s.front() == '[') {
        if (s.back() != ']' || s.size() < 3)
          throw ConfigError(source + ":" + std::to_string(line) + ": malformed section header");
        section = trim(s.substr(1, s.size() - 2));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(source + ":" + std::to_string(line) + ": expected key = value");
      const std::string key = trim(s.substr(0, eq));
      if (key.empty())
        throw ConfigError(source + ":" + std::to_string(line) + ": empty key");
      const std::string full = section.empty() ? key : section + "." + key;
      if (c.entries_.count(full))
        throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + full + "'");
      c.entries_[full] = Entry{trim(s.substr(eq + 1)), line};
      c.order_.push_back(full);
    }
    return c;
  }

  static Config load(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      throw ConfigError("cannot read config file '" + path + "'");
    return parse(in, path);
  }

  const std::string& source() const { return source_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::vector<std::string>& keys() const { return order_; }

  void set(const std::string& key, const std::string& value)
  {
    if (!has(key))
      order_.push_back(key);
    entries_[key] = Entry{value, 0};
  }

  const Entry& entry(const std::string& key) const
  {
    const auto it = entries_.find(key);
    if (it == entries_.end())
      throw ConfigError(source_ + ": missing field '" + key + "'");
    return it->second;
  }

  /// "source:line: field 'key': what", or without the line for defaults and overrides.
  std::string where(const std::string& key) const
  {
    const auto it = entries_.find(key);
    std::string w = source_;
    if (it != entries_.end() && it->second.line > 0)
      w += ":" + std::to_string(it->second.line);
    return w + ": field '" + key + "'";
  }

  std::string get_string(const std::string& key) const { return entry(key).value; }
  std::string get_string(const std::string& key, const std::string& fallback) const
  {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const
  {
    const std::string& v = entry(key).value;
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size())
      throw ConfigError(where(key) + ": expected a number, got '" + v + "'");
    return d;
  }
  double get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

  long long get_int(const std::string& key) const
  {
    const std::string& v = entry(key).value;
    std::size_t used = 0;
    long long i = 0;
    try {
      i = std::stoll(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size())
      throw ConfigError(where(key) + ": expected an integer, got '" + v + "'");
    return i;
  }
  long long get_int(const std::string& key, long long fallback) const { return has(key) ? get_int(key) : fallback; }

  bool get_bool(const std::string& key, bool fallback) const
  {
    if (!has(key))
      return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes")
      return true;
    if (v == "false" || v == "0" || v == "no")
      return false;
    throw ConfigError(where(key) + ": expected true or false, got '" + v + "'");
  }

  /// Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key) const
  {
    std::vector<double> out;
    std::stringstream ss(get_string(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != item.size())
        throw ConfigError(where(key) + ": expected a comma-separated list of numbers");
      out.push_back(d);
    }
    if (out.empty())
      throw ConfigError(where(key) + ": empty list");
    return out;
  }

  /// Checks lo < v (or lo <= v when closed) and v < hi, naming the field on failure.
  double get_in_range(const std::string& key, double lo, double hi, bool lo_closed = false) const
  {
    const double v = get_double(key);
    if (!(lo_closed ? v >= lo : v > lo) || !(v < hi))
      throw ConfigError(where(key) + ": value " + get_string(key) + " out of range");
    return v;
  }
  double get_in_range(const std::string& key, double fallback, double lo, double hi, bool lo_closed = false) const
  {
    return has(key) ? get_in_range(key, lo, hi, lo_closed) : fallback;
  }

  /// Flattened section.key = value lines in file order.
  std::string echo() const
  {
    std::ostringstream os;
    for (const auto& k : order_)
      os << k << " = " << entries_.at(k).value << '\n';
    return os.str();
  }

private:
  std::string source_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;

  static std::string strip_comment(const std::string& s)
  {
    const auto p = s.find_first_of("#;");
    return p == std::string::npos ? s : s.substr(0, p);
  }

  static std::string trim(const std::string& s)
  {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
      return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
};

} // namespace hkflow

#endif
