#pragma once

#include <foley/diagnostics.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace test_support {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("foley_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Collects warnings for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture()
      : previous_(foley::set_warning_sink([this](std::string_view m) { messages.emplace_back(m); })) {}
  ~WarningCapture() { foley::set_warning_sink(previous_); }

  std::vector<std::string> messages;

 private:
  foley::WarningSink previous_;
};

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Hand-assembled RIFF/WAVE bytes, independent of the library writer.
inline std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                             std::uint16_t bits, const std::string& payload) {
  std::string fmt;
  put_u16(fmt, format);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  put_u32(fmt, rate * block);
  put_u16(fmt, block);
  put_u16(fmt, bits);

  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(4 + 8 + fmt.size() + 8 + payload.size()));
  out += "WAVE";
  out += "fmt ";
  put_u32(out, static_cast<std::uint32_t>(fmt.size()));
  out += fmt;
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out += payload;
  return out;
}

inline std::string pcm16_payload(const std::vector<std::int16_t>& samples) {
  std::string out;
  for (std::int16_t s : samples) put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

inline std::string f32_payload(const std::vector<float>& samples) {
  std::string out;
  for (float f : samples) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof bits);
    put_u32(out, bits);
  }
  return out;
}

inline void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_bytes(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace test_support
