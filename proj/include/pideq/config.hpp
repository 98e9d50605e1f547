#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace pideq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Line-oriented `key = value` file; '#' starts a comment.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<double> number(const std::string& key) const;
  std::optional<int> integer(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace pideq
