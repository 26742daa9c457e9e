#include "slrbm/run_config.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace slrbm {

FileDigest digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  FileDigest digest;
  digest.crc32 = static_cast<std::uint32_t>(crc32(0L, Z_NULL, 0));
  char chunk[1 << 16];
  while (in) {
    in.read(chunk, sizeof(chunk));
    const std::streamsize got = in.gcount();
    if (got <= 0) break;
    digest.crc32 = static_cast<std::uint32_t>(
        crc32(digest.crc32, reinterpret_cast<const Bytef*>(chunk),
              static_cast<uInt>(got)));
    digest.bytes += static_cast<std::uint64_t>(got);
  }
  return digest;
}

std::string format_crc32(std::uint32_t crc) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "0x%08x", crc);
  return buffer;
}

namespace {

std::string quote(const std::string& value) {
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace

void write_manifest(const std::string& path,
                    const std::vector<std::string>& comment_lines,
                    const std::string& section,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file: " + path);
  for (const std::string& line : comment_lines) out << "# " << line << '\n';
  if (!section.empty()) out << '[' << section << "]\n";
  for (const ManifestEntry& entry : entries)
    out << entry.key << " = " << (entry.quoted ? quote(entry.value) : entry.value)
        << '\n';
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

}  // namespace slrbm
