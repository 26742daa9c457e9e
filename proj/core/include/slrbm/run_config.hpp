#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slrbm/matrix.hpp"

namespace slrbm {

struct FileDigest {
  std::uint32_t crc32 = 0;
  std::uint64_t bytes = 0;
};

FileDigest digest_file(const std::string& path);

std::string format_crc32(std::uint32_t crc);

// One resolved key for the manifest. Quoted entries are written as TOML
// strings, the rest verbatim.
struct ManifestEntry {
  std::string key;
  std::string value;
  bool quoted = false;
};

// Writes a TOML file: a comment block with provenance (version, input
// digests, artifact names), then the resolved configuration keys under the
// given section header ("" for none). The key names match the CLI flags, so
// the file can be fed back through --config to reproduce the run.
void write_manifest(const std::string& path,
                    const std::vector<std::string>& comment_lines,
                    const std::string& section,
                    const std::vector<ManifestEntry>& entries);

}  // namespace slrbm
