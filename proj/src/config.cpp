#include "pideq/config.hpp"

#include <array>
#include <algorithm>
#include <fstream>
#include <sstream>

namespace pideq {

namespace {

const std::array<const char*, 11> kKeys = {"alpha", "grid_n", "grid_L", "contour_eps", "contour_nodes", "gamma",
                                           "ax",    "ay",     "dt",     "T",           "tol"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  if (std::find_if(kKeys.begin(), kKeys.end(), [&](const char* k) { return key == k; }) == kKeys.end())
    throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    c.set(key, val);
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

std::optional<double> Config::number(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number");
  }
  if (used != it->second.size()) throw ConfigError("config key '" + key + "' is not a number");
  return v;
}

std::optional<int> Config::integer(const std::string& key) const {
  auto v = number(key);
  if (!v) return std::nullopt;
  if (*v != double(int(*v))) throw ConfigError("config key '" + key + "' must be an integer");
  return int(*v);
}

}  // namespace pideq
