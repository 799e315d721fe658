#ifndef SCHROLIP_CONFIG_HPP
#define SCHROLIP_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace schrolip {

struct ConfigKey {
  std::string name;
  std::string fallback;  // empty: unset unless given
  std::string help;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"potential", "hermite", "zero | hermite | radial:a | table:path"},
      {"rh-q", "", "reverse Hoelder exponent q for table potentials (default: all)"},
      {"dim", "1", "space dimension n"},
      {"grid-extent", "4", "half-width R of the box [-R,R]^n"},
      {"grid-points", "2049", "odd number of points per axis"},
      {"regime", "auto", "auto | gaussian | mehler | spectral | spectral-fd"},
      {"f", "abs-pow:0.5", "builtin function or csv:path"},
      {"alpha", "", "smoothness index alpha"},
      {"beta", "", "operator order beta"},
      {"k", "", "derivative order override for semigroup dumps"},
      {"y-min", "", "first heat-time sample of the fit window (default 10 h^2)"},
      {"y-max", "", "last heat-time sample of the fit window"},
      {"y", "", "semigroup time (heat) or Poisson parameter"},
      {"semigroup", "heat", "heat | poisson (semigroup command)"},
      {"a", "const:1", "multiplier symbol: const:c | indicator:T | table:path"},
      {"i", "1", "Riesz coordinate index (1-based)"},
      {"variant", "adjoint", "Riesz variant: calderon (d_i L^-1/2) | adjoint (L^-1/2 d_i)"},
      {"op", "bessel", "operator for verify schau: bessel | fracint"},
      {"t", "", "comparison time t (default: top of the reliable window)"},
      {"tol-heat", "0.05", "heat slope tolerance"},
      {"tol-poisson", "0.1", "Poisson slope tolerance"},
      {"compare", "false", "rho: also run the comparison check"},
      {"check", "false", "op: also run the regularity shift check"},
      {"output", "json", "json | csv"},
  };
  return keys;
}

inline bool known_key(const std::string& k) {
  for (const auto& c : config_keys())
    if (c.name == k) return true;
  return false;
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

// Flat key = value text with [sections]; a key K in section S names S-K when
// that is a known key, otherwise K. '#' starts a comment.
class RunConfiguration {
 public:
  RunConfiguration() = default;

  static RunConfiguration parse(std::istream& is, const std::string& source) {
    RunConfiguration c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      auto where = source + ":" + std::to_string(lineno) + ": ";
      if (line.front() == '[') {
        if (line.back() != ']') throw std::invalid_argument(where + "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos) throw std::invalid_argument(where + "expected key = value");
      std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      std::string name = key;
      if (!section.empty() && known_key(section + "-" + key)) name = section + "-" + key;
      if (!known_key(name)) throw std::invalid_argument(where + "unknown key '" + key + "'");
      if (value.empty()) throw std::invalid_argument(where + "empty value for '" + key + "'");
      c.values_[name] = value;
      c.lines_[name] = where;
    }
    return c;
  }

  static RunConfiguration load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  void set(const std::string& key, const std::string& value) {
    if (!known_key(key)) throw std::invalid_argument("unknown configuration key '" + key + "'");
    values_[key] = value;
    lines_[key] = "--" + key + ": ";
  }

  bool has(const std::string& key) const { return values_.count(key) > 0 || !fallback(key).empty(); }

  std::string str(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    auto f = fallback(key);
    if (f.empty()) throw std::invalid_argument("missing required setting '" + key + "'");
    return f;
  }

  double real(const std::string& key) const {
    std::string s = str(key);
    try {
      size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw std::invalid_argument(origin(key) + "'" + key + "' must be a number, got '" + s + "'");
    }
  }

  double positive(const std::string& key) const {
    double v = real(key);
    if (!(v > 0.0)) throw std::invalid_argument(origin(key) + "'" + key + "' must be positive");
    return v;
  }

  int integer(const std::string& key) const {
    double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw std::invalid_argument(origin(key) + "'" + key + "' must be an integer");
    return int(v);
  }

  bool flag(const std::string& key) const {
    std::string s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::invalid_argument(origin(key) + "'" + key + "' must be true or false");
  }

  std::optional<double> maybe_real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return real(key);
  }

  // Every key with its effective value, in declaration order.
  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : config_keys())
      if (has(k.name)) out.push_back({k.name, str(k.name)});
    return out;
  }

  std::string canonical_text() const {
    std::string s;
    for (const auto& [k, v] : resolved()) s += k + " = " + v + "\n";
    return s;
  }

 private:
  std::map<std::string, std::string> values_, lines_;

  static std::string fallback(const std::string& key) {
    for (const auto& c : config_keys())
      if (c.name == key) return c.fallback;
    return "";
  }

  std::string origin(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? "" : it->second;
  }
};

}  // namespace schrolip

#endif  // SCHROLIP_CONFIG_HPP
