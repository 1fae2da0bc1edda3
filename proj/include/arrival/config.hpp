#pragma once

// Flat "key = value" run configuration; '#' starts a comment. Keys use
// dotted namespaces (model.*, chain.*, sim.*, ...). One file of record
// per run.

#include <map>
#include <string>
#include <vector>

namespace arrival {

class Config {
 public:
  Config() = default;
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_number(const std::string& key, double fallback) const;
  long long get_integer(const std::string& key, long long fallback) const;
  bool get_flag(const std::string& key, bool fallback) const;
  // Comma- or colon-separated integer list; "2001:2006" expands the range.
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<double> get_number_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace arrival
