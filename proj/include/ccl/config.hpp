#pragma once

// Flat key = value configuration files: one pair per line, '#' comments,
// whitespace-insensitive. Lookups with no default throw ConfigError naming
// the offending key, which the CLI surfaces verbatim.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ccl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text,
                            const std::string& origin = "<inline>") {
    Config c;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string stripped = trim(line);
      if (stripped.empty()) continue;
      const size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected key = value, got \"" + stripped + "\"");
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": empty key");
      c.set(key, value);
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
  }

  void set(const std::string& key, const std::string& value) {
    auto it = index_.find(key);
    if (it == index_.end()) {
      index_.emplace(key, items_.size());
      items_.emplace_back(key, value);
    } else {
      items_[it->second].second = value;
    }
  }

  bool has(const std::string& key) const { return index_.count(key) != 0; }

  const std::string& get_str(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end())
      throw ConfigError(origin_ + ": missing key \"" + key + "\"");
    return items_[it->second].second;
  }

  std::string get_str(const std::string& key, const std::string& dflt) const {
    return has(key) ? get_str(key) : dflt;
  }

  int64_t get_i64(const std::string& key) const {
    return parse_i64(key, get_str(key));
  }
  int64_t get_i64(const std::string& key, int64_t dflt) const {
    return has(key) ? get_i64(key) : dflt;
  }

  double get_f64(const std::string& key) const {
    return parse_f64(key, get_str(key));
  }
  double get_f64(const std::string& key, double dflt) const {
    return has(key) ? get_f64(key) : dflt;
  }

  std::vector<double> get_f64_list(const std::string& key) const {
    const std::string& raw = get_str(key);
    std::vector<double> out;
    size_t start = 0;
    while (start <= raw.size()) {
      size_t comma = raw.find(',', start);
      if (comma == std::string::npos) comma = raw.size();
      const std::string piece = trim(raw.substr(start, comma - start));
      if (!piece.empty()) out.push_back(parse_f64(key, piece));
      start = comma + 1;
    }
    if (out.empty())
      throw ConfigError(origin_ + ": key \"" + key + "\" has no values");
    return out;
  }

  const std::string& origin() const { return origin_; }
  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  int64_t parse_i64(const std::string& key, const std::string& v) const {
    try {
      size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<int64_t>(x);
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key \"" + key +
                        "\" is not an integer: \"" + v + "\"");
    }
  }

  double parse_f64(const std::string& key, const std::string& v) const {
    try {
      size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key \"" + key +
                        "\" is not a number: \"" + v + "\"");
    }
  }

  std::string origin_ = "<empty>";
  std::vector<std::pair<std::string, std::string>> items_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace ccl
