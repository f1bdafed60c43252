#include "foley/envelope.hpp"

#include "foley/diagnostics.hpp"
#include "foley/rms.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace foley {

RmsCurve synth_envelope(const EnvelopeSpec& spec) {
  if (spec.shape == EnvelopeShape::FromOnsets) {
    RmsCurve framing;
    framing.window = spec.window;
    framing.hop = spec.hop;
    framing.sample_rate = spec.sample_rate;
    return envelope_from_onsets(spec.onsets, spec.length, framing);
  }
  if (spec.length < 2) throw PreconditionError("synth_envelope: length must be >= 2");
  if (!(spec.floor >= 0.0 && spec.floor <= spec.peak && spec.peak <= 1.0))
    throw PreconditionError("synth_envelope: need 0 <= floor <= peak <= 1");

  RmsCurve out;
  out.window = spec.window;
  out.hop = spec.hop;
  out.sample_rate = spec.sample_rate;
  out.values.resize(spec.length);

  const double span = spec.peak - spec.floor;
  const double last = static_cast<double>(spec.length - 1);
  for (Eigen::Index i = 0; i < spec.length; ++i) {
    const double t = static_cast<double>(i) / last;
    const double tri = 1.0 - std::abs(2.0 * t - 1.0);
    double v = 0.0;
    switch (spec.shape) {
      case EnvelopeShape::Increase: v = spec.floor + span * t; break;
      case EnvelopeShape::Decrease: v = spec.peak - span * t; break;
      case EnvelopeShape::AShape: v = spec.floor + span * tri; break;
      case EnvelopeShape::VShape: v = spec.peak - span * tri; break;
      case EnvelopeShape::FromOnsets: break;
    }
    out.values[i] = std::clamp(v, spec.floor, spec.peak);
  }
  return out;
}

RmsCurve envelope_from_onsets(const std::vector<OnsetEvent>& onsets, Eigen::Index length,
                              const RmsCurve& framing) {
  if (length < 1) throw PreconditionError("envelope_from_onsets: length must be >= 1");
  RmsCurve out;
  out.window = framing.window;
  out.hop = framing.hop;
  out.sample_rate = framing.sample_rate;
  out.values.setZero(length);

  for (const OnsetEvent& e : onsets) {
    if (e.frame < 0 || e.frame >= length)
      throw PreconditionError("envelope_from_onsets: onset frame " + std::to_string(e.frame) +
                              " outside [0, " + std::to_string(length) + ")");
    if (!(e.peak > 0.0 && e.peak <= 1.0))
      throw PreconditionError("envelope_from_onsets: peak must lie in (0, 1]");
    if (!(e.decay_frames > 0.0))
      throw PreconditionError("envelope_from_onsets: decay_frames must be positive");
    for (Eigen::Index i = e.frame; i < length; ++i) {
      const double dt = static_cast<double>(i - e.frame);
      out.values[i] = std::max(out.values[i], e.peak * std::exp(-3.0 * dt / e.decay_frames));
    }
  }
  return out;
}

namespace {

Waveform apply_gains(const Waveform& w, const Eigen::VectorXd& gains, int hop) {
  // Frame i is centred on sample i * hop + hop / 2 of the unpadded signal.
  const Eigen::Index frames = gains.size();
  const double first_centre = hop / 2.0;
  Waveform out = w;
  for (Eigen::Index n = 0; n < w.size(); ++n) {
    const double pos = (static_cast<double>(n) - first_centre) / hop;
    double g;
    if (pos <= 0.0) {
      g = gains[0];
    } else if (pos >= static_cast<double>(frames - 1)) {
      g = gains[frames - 1];
    } else {
      const auto i0 = static_cast<Eigen::Index>(std::floor(pos));
      const double frac = pos - static_cast<double>(i0);
      g = gains[i0] + frac * (gains[i0 + 1] - gains[i0]);
    }
    out.samples[n] = std::clamp(w.samples[n] * g, -1.0, 1.0);
  }
  return out;
}

}  // namespace

Waveform transfer_envelope(const Waveform& w, const RmsCurve& target, TransferOptions opts) {
  if (target.sample_rate != w.sample_rate)
    throw PreconditionError("transfer_envelope: sample rates differ");
  if (!(opts.eps > 0.0)) throw PreconditionError("transfer_envelope: eps must be positive");
  if (opts.refine_passes < 0) throw PreconditionError("transfer_envelope: refine_passes must be >= 0");

  const RmsCurve source = compute_rms(w, target.window, target.hop);
  const RmsCurve matched = interp_nearest(target, source.size());

  const Eigen::Index frames = source.size();
  Eigen::VectorXd gains(frames);
  Eigen::Index capped = 0;
  for (Eigen::Index i = 0; i < frames; ++i) {
    double g = matched.values[i] / std::max(source.values[i], opts.eps);
    if (g > opts.max_gain) {
      g = opts.max_gain;
      ++capped;
    }
    gains[i] = g;
  }
  if (capped > 0)
    warn("transfer_envelope: gain capped at " + std::to_string(opts.max_gain) + " on " +
         std::to_string(capped) + " frame(s)");

  Waveform out = apply_gains(w, gains, target.hop);
  for (int pass = 0; pass < opts.refine_passes; ++pass) {
    const RmsCurve now = compute_rms(out, target.window, target.hop);
    for (Eigen::Index i = 0; i < frames; ++i) {
      if (source.values[i] < opts.eps) continue;
      gains[i] = std::min(gains[i] * matched.values[i] / std::max(now.values[i], opts.eps),
                          opts.max_gain);
    }
    out = apply_gains(w, gains, target.hop);
  }
  return out;
}

}  // namespace foley
