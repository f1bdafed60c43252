#pragma once

#include "foley/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace foley {

enum class HeadKind { Regression, Classification };
enum class LossKind { L2, CeGls };

struct ConvBlockSpec {
  int kernel = 5;  // odd; same-length zero padding
  int channels = 32;
};

/// Feature sequence -> per-frame RMS network: 1-D convolution blocks with
/// ReLU, an optional bidirectional tanh recurrent layer and a linear head.
struct PredictorConfig {
  int input_dim = 8;
  std::vector<ConvBlockSpec> conv_blocks{{5, 32}, {5, 32}};
  int recurrent_hidden = 32;  // 0 disables the recurrent layer
  HeadKind head = HeadKind::Classification;
  int n_bins = 64;            // classification head width

  int output_dim() const { return head == HeadKind::Classification ? n_bins : 1; }
  Eigen::Index parameter_count() const;
  void validate() const;
};

struct PredictorParams {
  PredictorConfig config;
  Eigen::VectorXd weights;  // flat, layer by layer
  std::uint64_t seed = 0;
  int epoch = 0;
};

/// Glorot-uniform weights, zero biases.
PredictorParams init_params(const PredictorConfig& config, std::uint64_t seed);

/// Frames x output_dim raw outputs (logits, or the unconstrained regression value).
Eigen::MatrixXd forward(const PredictorParams& params, const FeatureSequence& x);

struct LossConfig {
  LossKind kind = LossKind::CeGls;
  int smoothing_window = 2;
  double sigma = 1.0;
};

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // same layout as PredictorParams::weights
};

/// Loss of one sequence against its ground-truth RMS and the gradient with
/// respect to every weight. CE targets are built by quantizing the curve to
/// the head's bin count and applying Gaussian label smoothing.
LossAndGradient loss_and_gradient(const PredictorParams& params, const FeatureSequence& x,
                                  const RmsCurve& target, const LossConfig& loss);

struct TrainingExample {
  FeatureSequence features;
  RmsCurve rms;
};

struct TrainConfig {
  LossConfig loss;
  int epochs = 200;
  double lr = 1e-3;
  int lr_step = 100;  // learning rate halves every lr_step epochs
  int batch = 8;
  double momentum = 0.9;
  std::uint64_t seed = 0;  // shuffling
};

struct TrainResult {
  PredictorParams params;
  std::vector<double> loss_trace;  // mean training loss per epoch
};

/// Mini-batch gradient descent with momentum and step decay. Single-threaded
/// and bit-reproducible for a given (config, dataset, initial params).
TrainResult train(const PredictorParams& initial, std::span<const TrainingExample> data,
                  const TrainConfig& config);

/// Largest relative difference between the analytic gradient and fourth-order
/// central differences over every weight. Magnitudes below
/// 1e-6 * max(1, |grad|_inf) count as that floor.
double grad_check(const PredictorParams& params, const FeatureSequence& x, const RmsCurve& target,
                  const LossConfig& loss, double step = 1e-5);

/// Classification: per-frame argmax bin mapped back through the codebook.
/// Regression: outputs clamped to [0, 1]. Framing is copied from `framing`.
RmsCurve predict_rms(const PredictorParams& params, const FeatureSequence& x,
                     const RmsCurve& framing = {});

/// Decodes head outputs (as returned by forward) into an RMS curve.
RmsCurve decode_outputs(const Eigen::MatrixXd& outputs, HeadKind head, const RmsCurve& framing = {});

/// Classifier-free guidance blend omega * cond + (1 - omega) * uncond.
template <typename DerivedA, typename DerivedB>
typename DerivedA::PlainObject cfg_blend(const Eigen::MatrixBase<DerivedA>& cond,
                                         const Eigen::MatrixBase<DerivedB>& uncond,
                                         typename DerivedA::Scalar omega) {
  if (cond.rows() != uncond.rows() || cond.cols() != uncond.cols())
    throw PreconditionError("cfg_blend: shape mismatch");
  using Scalar = typename DerivedA::Scalar;
  return omega * cond + (Scalar(1) - omega) * uncond;
}

}  // namespace foley
