#include "foley/signal_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace foley {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t load_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void store_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void store_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(const std::uint8_t* p, const char* tag) { return std::memcmp(p, tag, 4) == 0; }

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavErrorKind::MissingFile, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                        std::istreambuf_iterator<char>()};

  if (bytes.size() < 12) throw WavError(WavErrorKind::Truncated, "file shorter than RIFF header");
  if (!tag_is(bytes.data(), "RIFF") || !tag_is(bytes.data() + 8, "WAVE"))
    throw WavError(WavErrorKind::Malformed, "not a RIFF/WAVE container");

  FormatChunk fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = load_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size())
      throw WavError(WavErrorKind::Truncated, "chunk extends past end of file");

    if (tag_is(chunk, "fmt ")) {
      if (size < 16) throw WavError(WavErrorKind::Malformed, "fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      fmt.format = load_u16(f);
      fmt.channels = load_u16(f + 2);
      fmt.sample_rate = load_u32(f + 4);
      fmt.bits = load_u16(f + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) throw WavError(WavErrorKind::Malformed, "extensible fmt chunk too short");
        fmt.format = load_u16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag_is(chunk, "data")) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw WavError(WavErrorKind::Malformed, "missing fmt chunk");
  if (data == nullptr) throw WavError(WavErrorKind::Truncated, "missing data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0)
    throw WavError(WavErrorKind::Malformed, "zero channels or sample rate");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool f32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !f32)
    throw WavError(WavErrorKind::UnsupportedFormat,
                   "unsupported encoding (format " + std::to_string(fmt.format) + ", " +
                       std::to_string(fmt.bits) + " bits)");

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (data_size % frame_bytes != 0)
    throw WavError(WavErrorKind::Truncated, "data chunk ends mid-frame");
  const auto frames = static_cast<Eigen::Index>(data_size / frame_bytes);

  Waveform w;
  w.sample_rate = static_cast<int>(fmt.sample_rate);
  w.samples.setZero(frames);
  for (Eigen::Index i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const std::uint8_t* p = data + static_cast<std::size_t>(i) * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        acc += static_cast<std::int16_t>(load_u16(p)) / 32768.0;
      } else {
        acc += std::bit_cast<float>(load_u32(p));
      }
    }
    w.samples[i] = acc / fmt.channels;
  }

  if (!w.samples.allFinite())
    throw WavError(WavErrorKind::Malformed, "non-finite sample values");
  w.samples = w.samples.cwiseMax(-1.0).cwiseMin(1.0);
  return w;
}

void write_wav(const Waveform& w, const std::filesystem::path& path, WavBitDepth depth) {
  if (w.sample_rate <= 0) throw PreconditionError("write_wav: sample_rate must be positive");
  if (w.size() > 0 && (w.samples.maxCoeff() > 1.0 || w.samples.minCoeff() < -1.0 || !w.samples.allFinite()))
    throw PreconditionError("write_wav: samples must lie in [-1, 1]");

  const std::uint16_t bits = depth == WavBitDepth::Pcm16 ? 16 : 32;
  const std::uint16_t format = depth == WavBitDepth::Pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t data_size = static_cast<std::uint32_t>(w.size()) * (bits / 8);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  store_tag(out, "RIFF");
  store_u32(out, 36 + data_size);
  store_tag(out, "WAVE");
  store_tag(out, "fmt ");
  store_u32(out, 16);
  store_u16(out, format);
  store_u16(out, 1);
  store_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  store_u32(out, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  store_u16(out, bits / 8);
  store_u16(out, bits);
  store_tag(out, "data");
  store_u32(out, data_size);

  for (double s : w.samples) {
    if (depth == WavBitDepth::Pcm16) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      store_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      store_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw WavError(WavErrorKind::Unwritable, "cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw WavError(WavErrorKind::Unwritable, "short write to " + path.string());
}

Waveform resample_linear(const Waveform& w, int target_rate) {
  if (target_rate <= 0) throw PreconditionError("resample_linear: target_rate must be positive");
  if (target_rate == w.sample_rate) return w;

  const Eigen::Index n = w.size();
  const auto out_len = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n) * target_rate / w.sample_rate));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.setZero(out_len);
  if (n == 0) return out;

  const double step = static_cast<double>(w.sample_rate) / target_rate;
  for (Eigen::Index j = 0; j < out_len; ++j) {
    const double pos = j * step;
    const auto i0 = static_cast<Eigen::Index>(std::floor(pos));
    if (i0 >= n - 1) {
      out.samples[j] = w.samples[n - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(i0);
    out.samples[j] = w.samples[i0] + frac * (w.samples[i0 + 1] - w.samples[i0]);
  }
  return out;
}

}  // namespace foley
