// SPDX-License-Identifier: Apache-2.0
//
// Flat key-value config files: one `key = value` per line, '#' comments,
// dotted prefixes group related keys (mac., scenario., sim., ...).
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mdagg {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  // Parses a file; throws ConfigError on unreadable file or malformed line.
  static KeyValueConfig from_file(const std::string& path);
  // Parses in-memory text (used by tests).
  static KeyValueConfig from_string(const std::string& text);

  bool has(const std::string& key) const;

  // Typed getters; the non-optional forms throw ConfigError when the key is
  // missing or the value does not parse.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;  // true/false/1/0/yes/no/on/off

  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  long get_int(const std::string& key, long dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;

  // Comma-separated list of numbers, e.g. "8000,65536".
  std::vector<double> get_double_list(const std::string& key) const;

  // All keys with the given prefix, in lexicographic order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  // Directory of the file this config was loaded from ("" for from_string);
  // relative paths inside the config resolve against it.
  const std::string& base_dir() const noexcept { return base_dir_; }
  std::string resolve_path(const std::string& relative) const;

  void set(const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::string> values_;
  std::string base_dir_;
};

}  // namespace mdagg
