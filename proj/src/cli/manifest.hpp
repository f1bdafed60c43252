#pragma once

#include "foley/formats.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace foley::cli {

namespace fs = std::filesystem;
using io::Json;

/// Bad flags or configuration documents (exit status 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string sha256_file(const fs::path& path);

struct SeedRecord {
  std::uint64_t value = 0;
  std::string source;  // "default", "config", "flag" or "env"
};

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  std::optional<SeedRecord> seed;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  Json metrics = Json::object();
  Json summary = Json::object();
};

/// `<output>.manifest.json`
fs::path manifest_path(const fs::path& output);

/// Digests every input and output and writes the manifest next to
/// `outputs.front()`.
void write_manifest(const Manifest& m);

Json read_manifest(const fs::path& path);

}  // namespace foley::cli
