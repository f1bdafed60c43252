#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace foley {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violated an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine hit a state outside its tolerance (e.g. an
/// indefinite covariance).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A structured-text or CSV document could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Mono audio in [-1, 1].
struct Waveform {
  Eigen::VectorXd samples;
  int sample_rate = 16000;

  Eigen::Index size() const { return samples.size(); }
  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Frame-level RMS envelope together with the framing that produced it.
struct RmsCurve {
  Eigen::VectorXd values;
  int window = 512;
  int hop = 128;
  int sample_rate = 16000;

  Eigen::Index size() const { return values.size(); }
  double frame_rate() const { return static_cast<double>(sample_rate) / hop; }
};

/// RMS curve discretized into `n_bins` mu-law companded classes.
/// Bin 0 is the silence bin.
struct QuantCurve {
  Eigen::VectorXi bins;
  int n_bins = 64;
  int window = 512;
  int hop = 128;
  int sample_rate = 16000;

  Eigen::Index size() const { return bins.size(); }
  int mu() const { return n_bins - 1; }
};

/// Per-frame class distributions (frames x n_bins).
struct LabelMatrix {
  Eigen::MatrixXd rows;
  int smoothing_window = 0;
  double sigma = 1.0;

  Eigen::Index frames() const { return rows.rows(); }
  Eigen::Index n_bins() const { return rows.cols(); }
};

/// Per-frame feature vectors, frames along rows.
using FeatureSequence = Eigen::MatrixXd;

/// N embedding vectors of dimension D, one per row.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;
  std::string label;
};

}  // namespace foley
