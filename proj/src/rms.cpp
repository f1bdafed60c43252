#include "foley/rms.hpp"

#include "foley/diagnostics.hpp"

#include <string>

namespace foley {

namespace detail {
void warn_mu_law_clip(double r) {
  warn("mu-law input " + std::to_string(r) + " outside [0, 1]; clipped");
}
}  // namespace detail

Eigen::Index rms_frame_count(Eigen::Index n_samples, int window, int hop) {
  const Eigen::Index pad = (window - hop) / 2;
  return (n_samples + 2 * pad - window) / hop + 1;
}

RmsCurve compute_rms(const Waveform& w, int window, int hop) {
  if (hop <= 0 || window <= hop)
    throw PreconditionError("compute_rms: need window > hop > 0");
  if ((window - hop) % 2 != 0)
    throw PreconditionError("compute_rms: window - hop must be even");
  const Eigen::Index n = w.size();
  if (n < window) throw PreconditionError("compute_rms: input shorter than one window");

  const Eigen::Index pad = (window - hop) / 2;
  Eigen::VectorXd padded(n + 2 * pad);
  padded.segment(pad, n) = w.samples;
  for (Eigen::Index k = 0; k < pad; ++k) {
    padded[pad - 1 - k] = w.samples[k + 1];
    padded[pad + n + k] = w.samples[n - 2 - k];
  }

  RmsCurve out;
  out.window = window;
  out.hop = hop;
  out.sample_rate = w.sample_rate;
  const Eigen::Index frames = rms_frame_count(n, window, hop);
  out.values.resize(frames);
  bool clipped = false;
  for (Eigen::Index i = 0; i < frames; ++i) {
    double v = std::sqrt(padded.segment(i * hop, window).squaredNorm() / window);
    if (v > 1.0) {
      v = 1.0;
      clipped = true;
    }
    out.values[i] = v;
  }
  if (clipped) warn("compute_rms: frame RMS above 1 clipped (input outside [-1, 1]?)");
  return out;
}

double codebook_value(int bin, int n_bins) {
  return mu_law_decode(static_cast<double>(bin) / (n_bins - 1), n_bins - 1);
}

QuantCurve quantize_rms(const RmsCurve& c, int n_bins) {
  if (n_bins < 2) throw PreconditionError("quantize_rms: need at least 2 bins");
  QuantCurve q;
  q.n_bins = n_bins;
  q.window = c.window;
  q.hop = c.hop;
  q.sample_rate = c.sample_rate;
  q.bins.resize(c.size());
  const int mu = n_bins - 1;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double level = mu_law_encode(c.values[i], mu) * mu;
    q.bins[i] = std::min(static_cast<int>(std::floor(level + 0.5)), mu);
  }
  return q;
}

RmsCurve dequantize_rms(const QuantCurve& q) {
  if (q.n_bins < 2) throw PreconditionError("dequantize_rms: need at least 2 bins");
  RmsCurve c;
  c.window = q.window;
  c.hop = q.hop;
  c.sample_rate = q.sample_rate;
  c.values.resize(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const int bin = q.bins[i];
    if (bin < 0 || bin >= q.n_bins) throw PreconditionError("dequantize_rms: bin index out of range");
    c.values[i] = codebook_value(bin, q.n_bins);
  }
  return c;
}

RmsCurve interp_nearest(const RmsCurve& c, Eigen::Index target_len) {
  if (target_len < 1) throw PreconditionError("interp_nearest: target_len must be >= 1");
  if (c.size() < 1) throw PreconditionError("interp_nearest: empty source curve");
  const Eigen::Index src_len = c.size();
  if (src_len == target_len) return c;

  RmsCurve out = c;
  out.values.resize(target_len);
  for (Eigen::Index j = 0; j < target_len; ++j) {
    Eigen::Index src = 0;
    if (target_len > 1) {
      // round-half-up of j * (L - 1) / (target_len - 1) in integer arithmetic
      src = (2 * j * (src_len - 1) + (target_len - 1)) / (2 * (target_len - 1));
    }
    out.values[j] = c.values[src];
  }
  return out;
}

std::vector<double> quantization_ablation(std::span<const RmsCurve> curves,
                                          std::span<const int> bin_counts) {
  std::vector<double> errors;
  errors.reserve(bin_counts.size());
  for (int k : bin_counts) {
    double total = 0.0;
    Eigen::Index frames = 0;
    for (const RmsCurve& c : curves) {
      const RmsCurve back = dequantize_rms(quantize_rms(c, k));
      total += (c.values - back.values).cwiseAbs().sum();
      frames += c.size();
    }
    errors.push_back(frames > 0 ? total / static_cast<double>(frames) : 0.0);
  }
  return errors;
}

}  // namespace foley
