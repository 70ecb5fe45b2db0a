#pragma once

#include <map>
#include <string>

namespace goalex {

// Flat key=value configuration. '#' starts a comment, whitespace is trimmed,
// later assignments (e.g. command-line overrides) win.
class Config {
 public:
  Config() = default;

  static Config load_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string str(const std::string& key, const std::string& def) const;
  int64_t integer(const std::string& key, int64_t def) const;
  double number(const std::string& key, double def) const;
  bool boolean(const std::string& key, bool def) const;

  // Sorted key=value lines, one per entry.
  std::string serialize() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace goalex
