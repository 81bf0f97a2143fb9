// SPDX-License-Identifier: Apache-2.0
#include "mdagg/manifest.hpp"

#include <cstdlib>
#include <ctime>
#include <sstream>

#include "mdagg/version.hpp"

namespace mdagg {
namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string deterministic_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  long long epoch = 0;
  if (env != nullptr) {
    char* end = nullptr;
    const long long parsed = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 0) epoch = parsed;
  }
  const std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm_utc{};
#if defined(_WIN32)
  gmtime_s(&tm_utc, &t);
#else
  gmtime_r(&t, &tm_utc);
#endif
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

RunManifest RunManifest::make(const std::string& command,
                              const std::string& config_path,
                              std::uint64_t seed,
                              const std::string& output_path) {
  RunManifest m;
  m.command = command;
  m.config_path = config_path;
  m.seed = seed;
  m.output_path = output_path;
  m.toolkit_version = kVersion;
  m.timestamp = deterministic_timestamp();
  return m;
}

std::string RunManifest::to_csv_comments() const {
  std::ostringstream out;
  out << "# command: " << command << '\n';
  out << "# config: " << config_path << '\n';
  out << "# seed: " << seed << '\n';
  out << "# output: " << output_path << '\n';
  out << "# toolkit_version: " << toolkit_version << '\n';
  out << "# timestamp: " << timestamp << '\n';
  return out.str();
}

std::string RunManifest::to_json_object(int indent, int base_indent) const {
  const std::string pad(static_cast<std::size_t>(base_indent), ' ');
  const std::string inner(static_cast<std::size_t>(base_indent + indent), ' ');
  std::ostringstream out;
  out << "{\n";
  out << inner << "\"command\": \"" << json_escape(command) << "\",\n";
  out << inner << "\"config\": \"" << json_escape(config_path) << "\",\n";
  out << inner << "\"seed\": " << seed << ",\n";
  out << inner << "\"output\": \"" << json_escape(output_path) << "\",\n";
  out << inner << "\"toolkit_version\": \"" << json_escape(toolkit_version)
      << "\",\n";
  out << inner << "\"timestamp\": \"" << json_escape(timestamp) << "\"\n";
  out << pad << "}";
  return out.str();
}

}  // namespace mdagg
