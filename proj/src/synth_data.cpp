#include "foley/synth_data.hpp"

#include "foley/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace foley {
namespace {

constexpr double kHitDecayFrames = 4.0;  // e-folding time of a hit
constexpr int kScratchMinFrames = 8;
constexpr int kScratchMaxFrames = 24;
constexpr std::array<double, 5> kSmear{0.25, 0.5, 1.0, 0.5, 0.25};

void smear(Eigen::MatrixXd& features, int channel, Eigen::Index frame, double value) {
  const Eigen::Index frames = features.rows();
  for (int k = -2; k <= 2; ++k) {
    const Eigen::Index t = frame + k;
    if (t < 0 || t >= frames) continue;
    double& cell = features(t, channel);
    cell = std::max(cell, value * kSmear[static_cast<std::size_t>(k + 2)]);
  }
}

}  // namespace

std::vector<TrainingExample> synth_dataset(const SynthDatasetSpec& spec) {
  if (spec.n_sequences < 0 || spec.frames_per_sequence < 1 || spec.feature_dim < 2)
    throw PreconditionError("synth_dataset: need frames >= 1 and feature_dim >= 2");
  if (spec.event_rate < 0.0 || spec.noise_std < 0.0)
    throw PreconditionError("synth_dataset: event_rate and noise_std must be non-negative");

  Rng rng(spec.seed);
  const Eigen::Index frames = spec.frames_per_sequence;
  std::vector<TrainingExample> out;
  out.reserve(static_cast<std::size_t>(spec.n_sequences));

  for (int s = 0; s < spec.n_sequences; ++s) {
    TrainingExample ex;
    ex.features = Eigen::MatrixXd::Zero(frames, spec.feature_dim);
    ex.rms.window = spec.window;
    ex.rms.hop = spec.hop;
    ex.rms.sample_rate = spec.sample_rate;
    ex.rms.values = Eigen::VectorXd::Zero(frames);

    const int events = rng.poisson(spec.event_rate);
    for (int e = 0; e < events; ++e) {
      const auto onset = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(frames)));
      const bool hit = rng.uniform() < 0.5;
      const double strength = rng.uniform(0.2, 0.9);
      if (hit) {
        for (Eigen::Index t = onset; t < frames; ++t) {
          const double v = strength * std::exp(-static_cast<double>(t - onset) / kHitDecayFrames);
          if (v < 1e-4) break;
          ex.rms.values[t] += v;
        }
        smear(ex.features, 0, onset, strength);
      } else {
        const auto length = static_cast<Eigen::Index>(
            kScratchMinFrames + rng.below(kScratchMaxFrames - kScratchMinFrames + 1));
        const Eigen::Index stop = std::min(frames, onset + length);
        const double level = 0.6 * strength;
        for (Eigen::Index t = onset; t < stop; ++t) {
          ex.rms.values[t] += level * (0.8 + 0.4 * rng.uniform());
          ex.features(t, 1) = std::max(ex.features(t, 1), strength);
        }
        smear(ex.features, 1, onset, strength);
        smear(ex.features, 1, stop - 1, strength);
      }
    }
    ex.rms.values = ex.rms.values.cwiseMin(1.0);
    for (Eigen::Index t = 0; t < frames; ++t)
      for (int c = 0; c < spec.feature_dim; ++c) ex.features(t, c) += spec.noise_std * rng.normal();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace foley
