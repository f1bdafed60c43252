#include "manifest.hpp"

#include <openssl/evp.h>

namespace foley::cli {

std::string sha256_file(const fs::path& path) {
  const std::string bytes = io::read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed for " + path.string());
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

fs::path manifest_path(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

namespace {

Json file_list(const std::vector<fs::path>& paths) {
  Json list = Json::array();
  for (const fs::path& p : paths) list.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
  return list;
}

}  // namespace

void write_manifest(const Manifest& m) {
  if (m.outputs.empty()) throw Error("manifest without outputs");
  Json j;
  j["tool"] = "foley_rms";
  j["manifest_version"] = 1;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  if (m.seed) j["seed"] = {{"value", m.seed->value}, {"source", m.seed->source}};
  j["inputs"] = file_list(m.inputs);
  j["outputs"] = file_list(m.outputs);
  j["metrics"] = m.metrics;
  j["summary"] = m.summary;
  io::write_text(manifest_path(m.outputs.front()), j.dump(2) + "\n");
}

Json read_manifest(const fs::path& path) {
  try {
    return Json::parse(io::read_text(path));
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace foley::cli
