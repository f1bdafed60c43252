#pragma once

#include "foley/types.hpp"

#include <vector>

namespace foley {

enum class EnvelopeShape { AShape, VShape, Increase, Decrease, FromOnsets };

struct OnsetEvent {
  Eigen::Index frame = 0;
  double peak = 1.0;
  double decay_frames = 10.0;
};

struct EnvelopeSpec {
  EnvelopeShape shape = EnvelopeShape::AShape;
  Eigen::Index length = 2;
  double peak = 1.0;
  double floor = 0.0;
  std::vector<OnsetEvent> onsets;  // FromOnsets only
  int window = 512;
  int hop = 128;
  int sample_rate = 16000;
};

/// Canonical envelopes: linear ramps for Increase/Decrease, a triangle
/// peaking at the midpoint for AShape and its mirror for VShape.
RmsCurve synth_envelope(const EnvelopeSpec& spec);

/// Sum of hit transients peak * exp(-3 * dt / decay_frames), combined by
/// pointwise maximum. Framing metadata is copied from `framing`.
RmsCurve envelope_from_onsets(const std::vector<OnsetEvent>& onsets, Eigen::Index length,
                              const RmsCurve& framing = {});

struct TransferOptions {
  double eps = 1e-4;
  double max_gain = 100.0;
  int refine_passes = 2;  // multiplicative corrections from the output's own RMS
};

/// Imposes `target` on `w` with frame-wise gains target_i / max(R_i(w), eps)
/// (capped at max_gain), interpolated linearly between frame centres.
/// The target is length-matched with interp_nearest when needed. Each refine
/// pass rescales the gains by target_i / R_i(output).
Waveform transfer_envelope(const Waveform& w, const RmsCurve& target, TransferOptions opts = {});

}  // namespace foley
