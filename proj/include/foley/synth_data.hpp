#pragma once

#include "foley/predictor.hpp"

#include <cstdint>
#include <vector>

namespace foley {

/// Sparse "hit" and "scratch" events over mostly silent sequences. Feature
/// channels 0 and 1 carry hit and scratch indicators (scaled by event
/// strength, smeared over +-2 frames); every channel receives Gaussian noise.
struct SynthDatasetSpec {
  int n_sequences = 64;
  int frames_per_sequence = 250;
  int feature_dim = 8;
  double event_rate = 5.0;  // mean events per sequence (Poisson)
  double noise_std = 0.1;
  std::uint64_t seed = 0;
  // Framing recorded on the generated curves.
  int window = 512;
  int hop = 128;
  int sample_rate = 16000;
};

std::vector<TrainingExample> synth_dataset(const SynthDatasetSpec& spec);

}  // namespace foley
