#pragma once

// Flat key = value configuration text. '#' starts a comment, blank lines are
// ignored, keys may repeat (the last value wins for scalar lookups).

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tac {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

class KvConfig {
 public:
  static KvConfig parse(std::istream& in);
  static KvConfig parse_string(const std::string& text);
  static KvConfig load(const std::string& path);

  const std::vector<KvEntry>& entries() const { return entries_; }
  bool contains(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

 private:
  std::vector<KvEntry> entries_;
};

// Strict conversions; throw ConfigError naming the key.
long parse_int(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);

}  // namespace tac
