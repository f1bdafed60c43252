#pragma once

#include "foley/types.hpp"

namespace foley {

/// Gaussian label smoothing. Each row holds exp(-(k - c)^2 / (2 sigma^2))
/// for |k - c| <= window around the ground-truth bin c, zero elsewhere,
/// normalized to sum to one. Rows for the silence bin (c == 0) are one-hot.
LabelMatrix make_gls_targets(const QuantCurve& q, int window, double sigma);

struct LossResult {
  double loss = 0.0;
  Eigen::MatrixXd gradient;  // same shape as the prediction
};

/// Frame-averaged cross entropy between softmax(logits) and the target rows.
/// The gradient with respect to the logits is (softmax - target) / frames.
LossResult cross_entropy_loss(const Eigen::MatrixXd& logits, const LabelMatrix& targets);

/// Mean squared error; gradient 2 (pred - target) / n as a column.
LossResult l2_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);
LossResult l2_loss(const RmsCurve& pred, const RmsCurve& target);

/// Row-wise log-softmax, numerically stable.
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace foley
