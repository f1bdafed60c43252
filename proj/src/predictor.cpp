#include "foley/predictor.hpp"

#include "foley/labels.hpp"
#include "foley/random.hpp"
#include "foley/rms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace foley {
namespace {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;
using ConstMap = Map<const MatrixXd>;
using MutMap = Map<MatrixXd>;

struct ConvLayout {
  int kernel, in, out;
  Index weights, bias;  // offsets into the flat vector
};

struct RecurrentLayout {
  Index wx, wh, bias;
};

// Offsets of every tensor inside the flat weight vector.
struct Layout {
  std::vector<ConvLayout> conv;
  int rnn_in = 0;
  int hidden = 0;
  RecurrentLayout fwd{}, bwd{};
  int head_in = 0;
  int head_out = 0;
  Index head_w = 0, head_b = 0;
  Index total = 0;

  explicit Layout(const PredictorConfig& c) {
    int width = c.input_dim;
    for (const ConvBlockSpec& b : c.conv_blocks) {
      ConvLayout l{b.kernel, width, b.channels, total, 0};
      total += static_cast<Index>(b.kernel) * width * b.channels;
      l.bias = total;
      total += b.channels;
      conv.push_back(l);
      width = b.channels;
    }
    hidden = c.recurrent_hidden;
    if (hidden > 0) {
      rnn_in = width;
      for (RecurrentLayout* dir : {&fwd, &bwd}) {
        dir->wx = total;
        total += static_cast<Index>(width) * hidden;
        dir->wh = total;
        total += static_cast<Index>(hidden) * hidden;
        dir->bias = total;
        total += hidden;
      }
      width = 2 * hidden;
    }
    head_in = width;
    head_out = c.output_dim();
    head_w = total;
    total += static_cast<Index>(head_in) * head_out;
    head_b = total;
    total += head_out;
  }
};

// Activations kept for the backward pass.
struct Cache {
  std::vector<MatrixXd> conv_in;
  std::vector<MatrixXd> conv_pre;
  MatrixXd rnn_in;
  MatrixXd h_fwd, h_bwd;
  MatrixXd head_in;
  MatrixXd out;
};

// Z += shift(A, s) * W, where row t of shift(A, s) is row t + s of A (zero
// outside the sequence).
void add_shifted_product(const MatrixXd& a, const ConstMap& w, Index s, MatrixXd& z) {
  const Index rows = a.rows();
  const Index t0 = std::max<Index>(0, -s);
  const Index t1 = std::min<Index>(rows, rows - s);
  if (t1 > t0) z.middleRows(t0, t1 - t0).noalias() += a.middleRows(t0 + s, t1 - t0) * w;
}

MatrixXd run_recurrent(const MatrixXd& input, const VectorXd& weights, const RecurrentLayout& dir,
                       int in, int hidden, bool reverse) {
  const ConstMap wx(weights.data() + dir.wx, in, hidden);
  const ConstMap wh(weights.data() + dir.wh, hidden, hidden);
  const Map<const RowVectorXd> b(weights.data() + dir.bias, hidden);

  const Index steps = input.rows();
  MatrixXd pre = input * wx;
  pre.rowwise() += b;
  MatrixXd h(steps, hidden);
  RowVectorXd prev = RowVectorXd::Zero(hidden);
  for (Index k = 0; k < steps; ++k) {
    const Index t = reverse ? steps - 1 - k : k;
    prev = (pre.row(t) + prev * wh).array().tanh();
    h.row(t) = prev;
  }
  return h;
}

// Backpropagation through time for one direction. Accumulates weight
// gradients into `grad` and input gradients into `d_input`.
void backprop_recurrent(const MatrixXd& input, const MatrixXd& h, const MatrixXd& d_h,
                        const VectorXd& weights, const RecurrentLayout& dir, int in, int hidden,
                        bool reverse, VectorXd& grad, MatrixXd& d_input) {
  const ConstMap wx(weights.data() + dir.wx, in, hidden);
  const ConstMap wh(weights.data() + dir.wh, hidden, hidden);
  MutMap g_wx(grad.data() + dir.wx, in, hidden);
  MutMap g_wh(grad.data() + dir.wh, hidden, hidden);
  Map<RowVectorXd> g_b(grad.data() + dir.bias, hidden);

  const Index steps = input.rows();
  MatrixXd d_pre(steps, hidden);
  RowVectorXd carry = RowVectorXd::Zero(hidden);
  for (Index k = steps - 1; k >= 0; --k) {
    const Index t = reverse ? steps - 1 - k : k;
    const RowVectorXd dh = d_h.row(t) + carry;
    const RowVectorXd da = dh.array() * (1.0 - h.row(t).array().square());
    d_pre.row(t) = da;
    if (k > 0) {
      const Index prev_t = reverse ? t + 1 : t - 1;
      g_wh.noalias() += h.row(prev_t).transpose() * da;
    }
    carry.noalias() = da * wh.transpose();
  }
  g_wx.noalias() += input.transpose() * d_pre;
  g_b += d_pre.colwise().sum();
  d_input.noalias() += d_pre * wx.transpose();
}

MatrixXd forward_cached(const PredictorParams& params, const Layout& layout, const FeatureSequence& x,
                        Cache* cache) {
  const PredictorConfig& cfg = params.config;
  if (x.cols() != cfg.input_dim)
    throw PreconditionError("forward: feature dimension " + std::to_string(x.cols()) +
                            " does not match model input " + std::to_string(cfg.input_dim));
  if (x.rows() < 1) throw PreconditionError("forward: empty feature sequence");
  if (params.weights.size() != layout.total)
    throw PreconditionError("forward: weight vector does not match architecture");

  const VectorXd& w = params.weights;
  MatrixXd act = x;
  for (const ConvLayout& l : layout.conv) {
    MatrixXd z(act.rows(), l.out);
    z.rowwise() = Map<const RowVectorXd>(w.data() + l.bias, l.out);
    const int centre = (l.kernel - 1) / 2;
    for (int o = 0; o < l.kernel; ++o) {
      const ConstMap wo(w.data() + l.weights + static_cast<Index>(o) * l.in * l.out, l.in, l.out);
      add_shifted_product(act, wo, o - centre, z);
    }
    if (cache) {
      cache->conv_in.push_back(act);
      cache->conv_pre.push_back(z);
    }
    act = z.cwiseMax(0.0);
  }

  if (layout.hidden > 0) {
    MatrixXd hf = run_recurrent(act, w, layout.fwd, layout.rnn_in, layout.hidden, false);
    MatrixXd hb = run_recurrent(act, w, layout.bwd, layout.rnn_in, layout.hidden, true);
    MatrixXd joined(act.rows(), 2 * layout.hidden);
    joined << hf, hb;
    if (cache) {
      cache->rnn_in = act;
      cache->h_fwd = std::move(hf);
      cache->h_bwd = std::move(hb);
    }
    act = std::move(joined);
  }

  const ConstMap head_w(w.data() + layout.head_w, layout.head_in, layout.head_out);
  MatrixXd out = act * head_w;
  out.rowwise() += Map<const RowVectorXd>(w.data() + layout.head_b, layout.head_out);
  if (cache) cache->head_in = std::move(act);
  return out;
}

VectorXd backward(const PredictorParams& params, const Layout& layout, const Cache& cache,
                  const MatrixXd& d_out) {
  const VectorXd& w = params.weights;
  VectorXd grad = VectorXd::Zero(layout.total);

  MutMap(grad.data() + layout.head_w, layout.head_in, layout.head_out).noalias() =
      cache.head_in.transpose() * d_out;
  Map<RowVectorXd>(grad.data() + layout.head_b, layout.head_out) = d_out.colwise().sum();
  const ConstMap head_w(w.data() + layout.head_w, layout.head_in, layout.head_out);
  MatrixXd d_act = d_out * head_w.transpose();

  if (layout.hidden > 0) {
    const int h = layout.hidden;
    MatrixXd d_in = MatrixXd::Zero(cache.rnn_in.rows(), layout.rnn_in);
    const MatrixXd d_hf = d_act.leftCols(h);
    const MatrixXd d_hb = d_act.rightCols(h);
    backprop_recurrent(cache.rnn_in, cache.h_fwd, d_hf, w, layout.fwd, layout.rnn_in, h, false, grad,
                       d_in);
    backprop_recurrent(cache.rnn_in, cache.h_bwd, d_hb, w, layout.bwd, layout.rnn_in, h, true, grad,
                       d_in);
    d_act = std::move(d_in);
  }

  for (auto idx = static_cast<Index>(layout.conv.size()) - 1; idx >= 0; --idx) {
    const ConvLayout& l = layout.conv[static_cast<std::size_t>(idx)];
    const MatrixXd& a = cache.conv_in[static_cast<std::size_t>(idx)];
    const MatrixXd& z = cache.conv_pre[static_cast<std::size_t>(idx)];
    const MatrixXd d_z = (z.array() > 0.0).select(d_act, 0.0);
    Map<RowVectorXd>(grad.data() + l.bias, l.out) = d_z.colwise().sum();

    MatrixXd d_a = MatrixXd::Zero(a.rows(), l.in);
    const Index rows = a.rows();
    const int centre = (l.kernel - 1) / 2;
    for (int o = 0; o < l.kernel; ++o) {
      const Index offset = l.weights + static_cast<Index>(o) * l.in * l.out;
      const ConstMap wo(w.data() + offset, l.in, l.out);
      MutMap g_wo(grad.data() + offset, l.in, l.out);
      const Index s = o - centre;
      const Index t0 = std::max<Index>(0, -s);
      const Index t1 = std::min<Index>(rows, rows - s);
      if (t1 <= t0) continue;
      const Index len = t1 - t0;
      g_wo.noalias() += a.middleRows(t0 + s, len).transpose() * d_z.middleRows(t0, len);
      d_a.middleRows(t0 + s, len).noalias() += d_z.middleRows(t0, len) * wo.transpose();
    }
    d_act = std::move(d_a);
  }
  return grad;
}

void check_loss_matches_head(const PredictorConfig& cfg, const LossConfig& loss) {
  const bool ok = (loss.kind == LossKind::L2 && cfg.head == HeadKind::Regression) ||
                  (loss.kind == LossKind::CeGls && cfg.head == HeadKind::Classification);
  if (!ok) throw PreconditionError("loss kind does not match the model head");
}

// Per-sequence training target, prepared once.
struct PreparedTarget {
  VectorXd values;
  LabelMatrix labels;
};

PreparedTarget prepare_target(const PredictorConfig& cfg, const RmsCurve& rms, const LossConfig& loss) {
  PreparedTarget t;
  if (loss.kind == LossKind::L2) {
    t.values = rms.values;
  } else {
    t.labels = make_gls_targets(quantize_rms(rms, cfg.n_bins), loss.smoothing_window, loss.sigma);
  }
  return t;
}

LossAndGradient evaluate(const PredictorParams& params, const Layout& layout, const FeatureSequence& x,
                         const PreparedTarget& target, LossKind kind) {
  Cache cache;
  const MatrixXd out = forward_cached(params, layout, x, &cache);
  LossResult lr;
  if (kind == LossKind::L2) {
    lr = l2_loss(VectorXd(out.col(0)), target.values);
  } else {
    lr = cross_entropy_loss(out, target.labels);
  }
  return {lr.loss, backward(params, layout, cache, lr.gradient)};
}

double loss_only(const PredictorParams& params, const Layout& layout, const FeatureSequence& x,
                 const PreparedTarget& target, LossKind kind) {
  const MatrixXd out = forward_cached(params, layout, x, nullptr);
  if (kind == LossKind::L2) return l2_loss(VectorXd(out.col(0)), target.values).loss;
  return cross_entropy_loss(out, target.labels).loss;
}

}  // namespace

void PredictorConfig::validate() const {
  if (input_dim < 1) throw PreconditionError("predictor: input_dim must be >= 1");
  for (const ConvBlockSpec& b : conv_blocks) {
    if (b.kernel < 1 || b.kernel % 2 == 0)
      throw PreconditionError("predictor: convolution kernels must be odd and positive");
    if (b.channels < 1) throw PreconditionError("predictor: convolution channels must be >= 1");
  }
  if (recurrent_hidden < 0) throw PreconditionError("predictor: recurrent_hidden must be >= 0");
  if (head == HeadKind::Classification && n_bins < 2)
    throw PreconditionError("predictor: classification head needs at least 2 bins");
}

Eigen::Index PredictorConfig::parameter_count() const { return Layout(*this).total; }

PredictorParams init_params(const PredictorConfig& config, std::uint64_t seed) {
  config.validate();
  const Layout layout(config);
  PredictorParams p;
  p.config = config;
  p.seed = seed;
  p.weights = VectorXd::Zero(layout.total);

  Rng rng(seed);
  auto fill = [&](Index offset, Index count, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Index i = 0; i < count; ++i) p.weights[offset + i] = rng.uniform(-limit, limit);
  };
  for (const ConvLayout& l : layout.conv) {
    fill(l.weights, static_cast<Index>(l.kernel) * l.in * l.out, static_cast<double>(l.kernel) * l.in,
         static_cast<double>(l.kernel) * l.out);
  }
  if (layout.hidden > 0) {
    for (const RecurrentLayout* dir : {&layout.fwd, &layout.bwd}) {
      fill(dir->wx, static_cast<Index>(layout.rnn_in) * layout.hidden, layout.rnn_in, layout.hidden);
      fill(dir->wh, static_cast<Index>(layout.hidden) * layout.hidden, layout.hidden, layout.hidden);
    }
  }
  fill(layout.head_w, static_cast<Index>(layout.head_in) * layout.head_out, layout.head_in,
       layout.head_out);
  return p;
}

Eigen::MatrixXd forward(const PredictorParams& params, const FeatureSequence& x) {
  return forward_cached(params, Layout(params.config), x, nullptr);
}

LossAndGradient loss_and_gradient(const PredictorParams& params, const FeatureSequence& x,
                                  const RmsCurve& target, const LossConfig& loss) {
  check_loss_matches_head(params.config, loss);
  if (target.size() != x.rows()) throw PreconditionError("loss: target length differs from input");
  const Layout layout(params.config);
  return evaluate(params, layout, x, prepare_target(params.config, target, loss), loss.kind);
}

TrainResult train(const PredictorParams& initial, std::span<const TrainingExample> data,
                  const TrainConfig& config) {
  if (data.empty()) throw PreconditionError("train: empty dataset");
  if (config.epochs < 0 || config.batch < 1 || config.lr_step < 1)
    throw PreconditionError("train: epochs >= 0, batch >= 1 and lr_step >= 1 required");
  check_loss_matches_head(initial.config, config.loss);

  const Layout layout(initial.config);
  std::vector<PreparedTarget> targets;
  targets.reserve(data.size());
  for (const TrainingExample& ex : data) {
    if (ex.rms.size() != ex.features.rows())
      throw PreconditionError("train: feature and RMS lengths differ");
    targets.push_back(prepare_target(initial.config, ex.rms, config.loss));
  }

  TrainResult result;
  result.params = initial;
  VectorXd velocity = VectorXd::Zero(layout.total);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr * std::pow(0.5, epoch / config.lr_step);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      VectorXd grad = VectorXd::Zero(layout.total);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        const LossAndGradient lg =
            evaluate(result.params, layout, data[idx].features, targets[idx], config.loss.kind);
        epoch_loss += lg.loss;
        grad += lg.gradient;
      }
      grad /= static_cast<double>(stop - start);
      velocity = config.momentum * velocity - lr * grad;
      result.params.weights += velocity;
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(data.size()));
    ++result.params.epoch;
  }
  return result;
}

double grad_check(const PredictorParams& params, const FeatureSequence& x, const RmsCurve& target,
                  const LossConfig& loss, double step) {
  check_loss_matches_head(params.config, loss);
  const Layout layout(params.config);
  const PreparedTarget prepared = prepare_target(params.config, target, loss);
  const VectorXd analytic = evaluate(params, layout, x, prepared, loss.kind).gradient;

  PredictorParams probe = params;
  auto loss_at = [&](Index i, double offset) {
    probe.weights[i] = params.weights[i] + offset;
    return loss_only(probe, layout, x, prepared, loss.kind);
  };
  // Entries far below the largest gradient are compared on that scale.
  const double floor = 1e-6 * std::max(1.0, analytic.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (Index i = 0; i < analytic.size(); ++i) {
    const double numeric = (loss_at(i, -2.0 * step) - 8.0 * loss_at(i, -step) +
                            8.0 * loss_at(i, step) - loss_at(i, 2.0 * step)) /
                           (12.0 * step);
    probe.weights[i] = params.weights[i];
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

RmsCurve decode_outputs(const Eigen::MatrixXd& outputs, HeadKind head, const RmsCurve& framing) {
  RmsCurve c;
  c.window = framing.window;
  c.hop = framing.hop;
  c.sample_rate = framing.sample_rate;
  c.values.resize(outputs.rows());
  if (head == HeadKind::Regression) {
    c.values = outputs.col(0).cwiseMax(0.0).cwiseMin(1.0);
    return c;
  }
  const int n_bins = static_cast<int>(outputs.cols());
  for (Index t = 0; t < outputs.rows(); ++t) {
    Index best = 0;
    outputs.row(t).maxCoeff(&best);
    c.values[t] = codebook_value(static_cast<int>(best), n_bins);
  }
  return c;
}

RmsCurve predict_rms(const PredictorParams& params, const FeatureSequence& x, const RmsCurve& framing) {
  return decode_outputs(forward(params, x), params.config.head, framing);
}

}  // namespace foley
