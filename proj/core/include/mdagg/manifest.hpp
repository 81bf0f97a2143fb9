// SPDX-License-Identifier: Apache-2.0
//
// Run manifest embedded in every output file for reproducibility.  The
// timestamp honours SOURCE_DATE_EPOCH (falling back to the fixed epoch) so
// that identical (config, seed) re-runs produce byte-identical outputs.
#pragma once

#include <cstdint>
#include <string>

namespace mdagg {

struct RunManifest {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string output_path;
  std::string toolkit_version;
  std::string timestamp;  // ISO-8601 UTC

  static RunManifest make(const std::string& command,
                          const std::string& config_path, std::uint64_t seed,
                          const std::string& output_path);

  // '# key: value' comment lines for CSV outputs.
  std::string to_csv_comments() const;
  std::string to_json_object(int indent = 2, int base_indent = 0) const;
};

// SOURCE_DATE_EPOCH as ISO-8601 UTC, else "1970-01-01T00:00:00Z".
std::string deterministic_timestamp();

}  // namespace mdagg
