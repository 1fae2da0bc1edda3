#include "arrival/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "arrival/common.hpp"

namespace arrival {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& key, const std::string& v) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ValidationError(cat("config key '", key, "': expected a number, got '", v, "'"));
  return x;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(cat("config line ", lineno, ": expected 'key = value', got '", t, "'"));
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ValidationError(cat("config line ", lineno, ": empty key"));
    cfg.kv_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(cat(path, ": cannot open config file"));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_string(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(cat(path, ": ", e.what()));
  }
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_number(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  return parse_number(key, it->second);
}

long long Config::get_integer(const std::string& key, long long fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  double x = parse_number(key, it->second);
  long long n = static_cast<long long>(x);
  if (static_cast<double>(n) != x)
    throw ValidationError(cat("config key '", key, "': expected an integer, got '", it->second, "'"));
  return n;
}

bool Config::get_flag(const std::string& key, bool fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError(cat("config key '", key, "': expected a boolean, got '", v, "'"));
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  auto it = kv_.find(key);
  if (it == kv_.end()) return out;
  const std::string& v = it->second;
  size_t colon = v.find(':');
  if (colon != std::string::npos) {
    int a = static_cast<int>(parse_number(key, trim(v.substr(0, colon))));
    int b = static_cast<int>(parse_number(key, trim(v.substr(colon + 1))));
    if (b < a) throw ValidationError(cat("config key '", key, "': descending range '", v, "'"));
    for (int y = a; y <= b; ++y) out.push_back(y);
    return out;
  }
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<int>(parse_number(key, item)));
  }
  return out;
}

std::vector<double> Config::get_number_list(const std::string& key) const {
  std::vector<double> out;
  auto it = kv_.find(key);
  if (it == kv_.end()) return out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  return out;
}

}  // namespace arrival
