#pragma once

#include "foley/types.hpp"

#include <filesystem>

namespace foley {

enum class WavErrorKind {
  MissingFile,
  UnsupportedFormat,
  Truncated,
  Malformed,
  Unwritable,
};

class WavError : public Error {
 public:
  WavError(WavErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  WavErrorKind kind() const { return kind_; }

 private:
  WavErrorKind kind_;
};

enum class WavBitDepth { Pcm16, Float32 };

/// Loads a RIFF/WAVE file (16-bit PCM or 32-bit float) as a mono waveform.
/// Channels are averaged; 16-bit samples are divided by 32768 and every
/// sample is clipped to [-1, 1].
Waveform read_wav(const std::filesystem::path& path);

/// Writes a mono RIFF/WAVE file. Samples must lie in [-1, 1].
void write_wav(const Waveform& w, const std::filesystem::path& path, WavBitDepth depth);

/// Linear-interpolation resampler with edge hold past the last input sample.
Waveform resample_linear(const Waveform& w, int target_rate);

}  // namespace foley
