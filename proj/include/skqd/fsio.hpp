#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "skqd/errors.hpp"

namespace skqd {

// Writes content to path via a temp file in the same directory plus rename,
// so readers never observe a partially written file.
inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& content) {
  const auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw ConfigError("short write to '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace skqd
