// SPDX-License-Identifier: Apache-2.0
#include "mdagg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mdagg/errors.hpp"

namespace mdagg {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  KeyValueConfig cfg;
  try {
    cfg = from_string(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  cfg.base_dir_ = std::filesystem::path(path).parent_path().string();
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string raw = get_string(key);
  try {
    std::size_t pos = 0;
    double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: '" + raw + "'");
  }
}

long KeyValueConfig::get_int(const std::string& key) const {
  const std::string raw = get_string(key);
  try {
    std::size_t pos = 0;
    long v = std::stol(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: '" + raw + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key) const {
  const std::string raw = lower(get_string(key));
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
  throw ConfigError("config key " + key + ": not a boolean: '" + raw + "'");
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& dflt) const {
  return has(key) ? get_string(key) : dflt;
}
double KeyValueConfig::get_double(const std::string& key, double dflt) const {
  return has(key) ? get_double(key) : dflt;
}
long KeyValueConfig::get_int(const std::string& key, long dflt) const {
  return has(key) ? get_int(key) : dflt;
}
bool KeyValueConfig::get_bool(const std::string& key, bool dflt) const {
  return has(key) ? get_bool(key) : dflt;
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key) const {
  const std::string raw = get_string(key);
  std::vector<double> out;
  std::istringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": bad list element '" + item +
                        "'");
    }
  }
  if (out.empty())
    throw ConfigError("config key " + key + ": empty list");
  return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (auto it = values_.lower_bound(prefix); it != values_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    out.push_back(it->first);
  }
  return out;
}

std::string KeyValueConfig::resolve_path(const std::string& relative) const {
  std::filesystem::path p(relative);
  if (p.is_absolute() || base_dir_.empty()) return relative;
  return (std::filesystem::path(base_dir_) / p).string();
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

}  // namespace mdagg
