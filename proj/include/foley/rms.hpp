#pragma once

#include "foley/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace foley {

/// Frame-level RMS envelope. The waveform is reflect-padded by
/// (window - hop) / 2 samples on each side (the edge sample is the mirror
/// axis and is not repeated); frame i covers padded samples
/// [i * hop, i * hop + window).
///
/// Requires window > hop > 0, (window - hop) even and at least `window`
/// samples of input.
RmsCurve compute_rms(const Waveform& w, int window, int hop);

/// Number of frames compute_rms produces for `n_samples` of input.
Eigen::Index rms_frame_count(Eigen::Index n_samples, int window, int hop);

namespace detail {
void warn_mu_law_clip(double r);
}

/// Mu-law compander f(r) = ln(1 + mu r) / ln(1 + mu) on [0, 1]. Inputs
/// outside the unit interval are clipped with a warning.
template <typename Scalar>
Scalar mu_law_encode(Scalar r, int mu) {
  if (!(r >= Scalar(0) && r <= Scalar(1))) {
    detail::warn_mu_law_clip(static_cast<double>(r));
    r = std::isnan(r) ? Scalar(0) : std::clamp(r, Scalar(0), Scalar(1));
  }
  return std::log1p(Scalar(mu) * r) / std::log1p(Scalar(mu));
}

/// Inverse compander ((1 + mu)^v - 1) / mu.
template <typename Scalar>
Scalar mu_law_decode(Scalar v, int mu) {
  return std::expm1(v * std::log1p(Scalar(mu))) / Scalar(mu);
}

/// Discretizes a curve into `n_bins` equidistant classes of the mu-law
/// domain with mu = n_bins - 1: bin = round_half_up(f(r) * (n_bins - 1)).
QuantCurve quantize_rms(const RmsCurve& c, int n_bins);

/// Codebook reconstruction decode(k / (n_bins - 1)).
RmsCurve dequantize_rms(const QuantCurve& q);

/// Continuous value of codebook entry `bin` for an n_bins codebook.
double codebook_value(int bin, int n_bins);

/// Nearest-neighbour length matching: output frame j copies source frame
/// round(j * (L - 1) / (target_len - 1)).
RmsCurve interp_nearest(const RmsCurve& c, Eigen::Index target_len);

/// Quantize/dequantize round-trip E-L1 for each codebook size in
/// `bin_counts`, pooled over every frame of `curves`.
std::vector<double> quantization_ablation(std::span<const RmsCurve> curves,
                                          std::span<const int> bin_counts);

}  // namespace foley
