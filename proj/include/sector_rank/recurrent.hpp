#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sector_rank/rng.hpp"

// Gated recurrent layers trained by backpropagation through time.
//
// All sequence code works on batches: a time step is a matrix whose columns
// are independent sequences, so a single column is the unbatched case.

namespace sector_rank {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Derived>
MatrixX<typename Derived::Scalar> sigmoid(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  return ((-a.array()).exp() + S(1)).inverse().matrix();
}

template <typename Derived>
MatrixX<typename Derived::Scalar> tanh_activation(const Eigen::MatrixBase<Derived>& a) {
  return a.array().tanh().matrix();
}

/// Weights of one gate: act(recurrent * h_prev + input * x + bias).
template <typename Scalar>
struct GateParams {
  using Matrix = MatrixX<Scalar>;

  Matrix recurrent;  // hidden x hidden
  Matrix input;      // hidden x inputs
  Matrix bias;       // hidden x 1

  static GateParams zeros(Eigen::Index inputs, Eigen::Index hidden) {
    return {Matrix::Zero(hidden, hidden), Matrix::Zero(hidden, inputs), Matrix::Zero(hidden, 1)};
  }

  static GateParams uniform(Eigen::Index inputs, Eigen::Index hidden, Scalar bound, Rng& rng) {
    GateParams g = zeros(inputs, hidden);
    auto fill = [&](Matrix& m) {
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          m(i, j) = static_cast<Scalar>(sector_rank::uniform(rng, -double(bound), double(bound)));
    };
    fill(g.recurrent);
    fill(g.input);
    return g;
  }

  Matrix preactivation(const Matrix& h_prev, const Matrix& x) const {
    Matrix a = recurrent * h_prev;
    a.noalias() += input * x;
    a.colwise() += bias.col(0);
    return a;
  }

  /// Adds the parameter gradient for pre-activation gradient `da`.
  void accumulate(const Matrix& da, const Matrix& h_prev, const Matrix& x) {
    recurrent.noalias() += da * h_prev.transpose();
    input.noalias() += da * x.transpose();
    bias.col(0) += da.rowwise().sum();
  }

  template <class F>
  void visit(F&& f) {
    f(recurrent);
    f(input);
    f(bias);
  }
  template <class F>
  void visit(F&& f) const {
    f(recurrent);
    f(input);
    f(bias);
  }
};

namespace detail {

inline void check_step_shapes(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index x_rows, Eigen::Index x_cols,
                              Eigen::Index h_rows, Eigen::Index h_cols) {
  if (x_rows != inputs || h_rows != hidden || x_cols != h_cols)
    throw std::invalid_argument("recurrent cell: shape mismatch (input " + std::to_string(x_rows) + "x" +
                                std::to_string(x_cols) + ", state " + std::to_string(h_rows) + "x" +
                                std::to_string(h_cols) + ", layer " + std::to_string(inputs) + "->" +
                                std::to_string(hidden) + ")");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LSTM

template <typename Scalar_>
struct LstmLayer {
  using Scalar = Scalar_;
  using Matrix = MatrixX<Scalar>;

  GateParams<Scalar> forget, input, candidate, output;

  Eigen::Index input_size() const { return forget.input.cols(); }
  Eigen::Index hidden_size() const { return forget.recurrent.rows(); }

  static LstmLayer zeros(Eigen::Index inputs, Eigen::Index hidden) {
    using G = GateParams<Scalar>;
    return {G::zeros(inputs, hidden), G::zeros(inputs, hidden), G::zeros(inputs, hidden), G::zeros(inputs, hidden)};
  }

  /// Uniform in +-1/sqrt(inputs + hidden); forget bias starts at 1.
  static LstmLayer initialized(Eigen::Index inputs, Eigen::Index hidden, Rng& rng) {
    using G = GateParams<Scalar>;
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(inputs + hidden));
    LstmLayer l{G::uniform(inputs, hidden, bound, rng), G::uniform(inputs, hidden, bound, rng),
                G::uniform(inputs, hidden, bound, rng), G::uniform(inputs, hidden, bound, rng)};
    l.forget.bias.setOnes();
    return l;
  }

  template <class F>
  void visit(F&& f) {
    forget.visit(f);
    input.visit(f);
    candidate.visit(f);
    output.visit(f);
  }
  template <class F>
  void visit(F&& f) const {
    forget.visit(f);
    input.visit(f);
    candidate.visit(f);
    output.visit(f);
  }
};

/// Activations of one LSTM step; kept for backpropagation.
template <typename Scalar>
struct LstmStep {
  MatrixX<Scalar> forget, input, candidate, output, cell, hidden;
};

/// f = s(Wf h + Uf x + bf), i = s(Wi h + Ui x + bi), g = tanh(Wc h + Uc x + bc),
/// c = f.c_prev + i.g, o = s(Wo h + Uo x + bo), h = o.tanh(c).
template <typename Scalar>
LstmStep<Scalar> lstm_cell(const MatrixX<Scalar>& x, const MatrixX<Scalar>& h_prev, const MatrixX<Scalar>& c_prev,
                           const LstmLayer<Scalar>& layer) {
  detail::check_step_shapes(layer.input_size(), layer.hidden_size(), x.rows(), x.cols(), h_prev.rows(),
                            h_prev.cols());
  if (c_prev.rows() != h_prev.rows() || c_prev.cols() != h_prev.cols())
    throw std::invalid_argument("lstm_cell: cell state shape mismatch");
  LstmStep<Scalar> s;
  s.forget = sigmoid(layer.forget.preactivation(h_prev, x));
  s.input = sigmoid(layer.input.preactivation(h_prev, x));
  s.candidate = tanh_activation(layer.candidate.preactivation(h_prev, x));
  s.cell = s.forget.cwiseProduct(c_prev) + s.input.cwiseProduct(s.candidate);
  s.output = sigmoid(layer.output.preactivation(h_prev, x));
  s.hidden = s.output.cwiseProduct(tanh_activation(s.cell));
  return s;
}

template <typename Scalar>
struct LstmTrace {
  std::vector<LstmStep<Scalar>> steps;
  const MatrixX<Scalar>& hidden(std::size_t t) const { return steps[t].hidden; }
};

/// Runs the layer over `xs` from a zero state.
template <typename Scalar>
LstmTrace<Scalar> forward_sequence(const LstmLayer<Scalar>& layer, const std::vector<MatrixX<Scalar>>& xs) {
  LstmTrace<Scalar> trace;
  if (xs.empty()) return trace;
  const MatrixX<Scalar> zero = MatrixX<Scalar>::Zero(layer.hidden_size(), xs.front().cols());
  trace.steps.reserve(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const MatrixX<Scalar>& h = t ? trace.steps[t - 1].hidden : zero;
    const MatrixX<Scalar>& c = t ? trace.steps[t - 1].cell : zero;
    trace.steps.push_back(lstm_cell(xs[t], h, c, layer));
  }
  return trace;
}

/// Backpropagation through time. `dh[t]` is the loss gradient arriving at the
/// hidden output of step t from outside the layer. Parameter gradients are
/// added into `grad`; the input gradients are returned.
template <typename Scalar>
std::vector<MatrixX<Scalar>> backward_sequence(const LstmLayer<Scalar>& layer, const std::vector<MatrixX<Scalar>>& xs,
                                               const LstmTrace<Scalar>& trace, const std::vector<MatrixX<Scalar>>& dh,
                                               LstmLayer<Scalar>& grad) {
  using Matrix = MatrixX<Scalar>;
  const std::size_t T = xs.size();
  std::vector<Matrix> dx(T);
  if (T == 0) return dx;
  const Matrix zero = Matrix::Zero(layer.hidden_size(), xs.front().cols());
  Matrix dh_next = zero, dc_next = zero;
  for (std::size_t t = T; t-- > 0;) {
    const LstmStep<Scalar>& s = trace.steps[t];
    const Matrix& h_prev = t ? trace.steps[t - 1].hidden : zero;
    const Matrix& c_prev = t ? trace.steps[t - 1].cell : zero;

    const Matrix dht = dh[t] + dh_next;
    const auto tanh_c = s.cell.array().tanh();
    const Matrix dc = (dc_next.array() + dht.array() * s.output.array() * (Scalar(1) - tanh_c.square())).matrix();

    const Matrix da_f = (dc.array() * c_prev.array() * s.forget.array() * (Scalar(1) - s.forget.array())).matrix();
    const Matrix da_i = (dc.array() * s.candidate.array() * s.input.array() * (Scalar(1) - s.input.array())).matrix();
    const Matrix da_g = (dc.array() * s.input.array() * (Scalar(1) - s.candidate.array().square())).matrix();
    const Matrix da_o = (dht.array() * tanh_c * s.output.array() * (Scalar(1) - s.output.array())).matrix();
    dc_next = dc.cwiseProduct(s.forget);

    grad.forget.accumulate(da_f, h_prev, xs[t]);
    grad.input.accumulate(da_i, h_prev, xs[t]);
    grad.candidate.accumulate(da_g, h_prev, xs[t]);
    grad.output.accumulate(da_o, h_prev, xs[t]);

    dh_next.noalias() = layer.forget.recurrent.transpose() * da_f;
    dh_next.noalias() += layer.input.recurrent.transpose() * da_i;
    dh_next.noalias() += layer.candidate.recurrent.transpose() * da_g;
    dh_next.noalias() += layer.output.recurrent.transpose() * da_o;

    Matrix& d = dx[t];
    d.noalias() = layer.forget.input.transpose() * da_f;
    d.noalias() += layer.input.input.transpose() * da_i;
    d.noalias() += layer.candidate.input.transpose() * da_g;
    d.noalias() += layer.output.input.transpose() * da_o;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GRU

template <typename Scalar_>
struct GruLayer {
  using Scalar = Scalar_;
  using Matrix = MatrixX<Scalar>;

  GateParams<Scalar> update, reset, candidate;

  Eigen::Index input_size() const { return update.input.cols(); }
  Eigen::Index hidden_size() const { return update.recurrent.rows(); }

  static GruLayer zeros(Eigen::Index inputs, Eigen::Index hidden) {
    using G = GateParams<Scalar>;
    return {G::zeros(inputs, hidden), G::zeros(inputs, hidden), G::zeros(inputs, hidden)};
  }

  static GruLayer initialized(Eigen::Index inputs, Eigen::Index hidden, Rng& rng) {
    using G = GateParams<Scalar>;
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(inputs + hidden));
    return {G::uniform(inputs, hidden, bound, rng), G::uniform(inputs, hidden, bound, rng),
            G::uniform(inputs, hidden, bound, rng)};
  }

  template <class F>
  void visit(F&& f) {
    update.visit(f);
    reset.visit(f);
    candidate.visit(f);
  }
  template <class F>
  void visit(F&& f) const {
    update.visit(f);
    reset.visit(f);
    candidate.visit(f);
  }
};

template <typename Scalar>
struct GruStep {
  MatrixX<Scalar> update, reset, candidate, hidden;
};

/// z = s(Wz h + Uz x + bz), r = s(Wr h + Ur x + br),
/// g = tanh(Wh (r.h) + Uh x + bh), h' = (1 - z).h + z.g.
template <typename Scalar>
GruStep<Scalar> gru_cell(const MatrixX<Scalar>& x, const MatrixX<Scalar>& h_prev, const GruLayer<Scalar>& layer) {
  detail::check_step_shapes(layer.input_size(), layer.hidden_size(), x.rows(), x.cols(), h_prev.rows(),
                            h_prev.cols());
  GruStep<Scalar> s;
  s.update = sigmoid(layer.update.preactivation(h_prev, x));
  s.reset = sigmoid(layer.reset.preactivation(h_prev, x));
  s.candidate = tanh_activation(layer.candidate.preactivation(s.reset.cwiseProduct(h_prev), x));
  s.hidden = (Scalar(1) - s.update.array()).matrix().cwiseProduct(h_prev) + s.update.cwiseProduct(s.candidate);
  return s;
}

template <typename Scalar>
struct GruTrace {
  std::vector<GruStep<Scalar>> steps;
  const MatrixX<Scalar>& hidden(std::size_t t) const { return steps[t].hidden; }
};

template <typename Scalar>
GruTrace<Scalar> forward_sequence(const GruLayer<Scalar>& layer, const std::vector<MatrixX<Scalar>>& xs) {
  GruTrace<Scalar> trace;
  if (xs.empty()) return trace;
  const MatrixX<Scalar> zero = MatrixX<Scalar>::Zero(layer.hidden_size(), xs.front().cols());
  trace.steps.reserve(xs.size());
  for (std::size_t t = 0; t < xs.size(); ++t)
    trace.steps.push_back(gru_cell(xs[t], t ? trace.steps[t - 1].hidden : zero, layer));
  return trace;
}

template <typename Scalar>
std::vector<MatrixX<Scalar>> backward_sequence(const GruLayer<Scalar>& layer, const std::vector<MatrixX<Scalar>>& xs,
                                               const GruTrace<Scalar>& trace, const std::vector<MatrixX<Scalar>>& dh,
                                               GruLayer<Scalar>& grad) {
  using Matrix = MatrixX<Scalar>;
  const std::size_t T = xs.size();
  std::vector<Matrix> dx(T);
  if (T == 0) return dx;
  const Matrix zero = Matrix::Zero(layer.hidden_size(), xs.front().cols());
  Matrix dh_next = zero;
  for (std::size_t t = T; t-- > 0;) {
    const GruStep<Scalar>& s = trace.steps[t];
    const Matrix& h_prev = t ? trace.steps[t - 1].hidden : zero;

    const Matrix dht = dh[t] + dh_next;
    const Matrix da_g = (dht.array() * s.update.array() * (Scalar(1) - s.candidate.array().square())).matrix();
    const Matrix da_z = (dht.array() * (s.candidate - h_prev).array() * s.update.array() *
                         (Scalar(1) - s.update.array()))
                            .matrix();
    const Matrix gated = s.reset.cwiseProduct(h_prev);
    const Matrix d_gated = layer.candidate.recurrent.transpose() * da_g;
    const Matrix da_r = (d_gated.array() * h_prev.array() * s.reset.array() * (Scalar(1) - s.reset.array())).matrix();

    grad.update.accumulate(da_z, h_prev, xs[t]);
    grad.reset.accumulate(da_r, h_prev, xs[t]);
    grad.candidate.accumulate(da_g, gated, xs[t]);

    dh_next = (dht.array() * (Scalar(1) - s.update.array()) + d_gated.array() * s.reset.array()).matrix();
    dh_next.noalias() += layer.update.recurrent.transpose() * da_z;
    dh_next.noalias() += layer.reset.recurrent.transpose() * da_r;

    Matrix& d = dx[t];
    d.noalias() = layer.update.input.transpose() * da_z;
    d.noalias() += layer.reset.input.transpose() * da_r;
    d.noalias() += layer.candidate.input.transpose() * da_g;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Stacked network with a linear readout on the last hidden state of the top layer.

template <typename Layer>
class RecurrentNetwork {
 public:
  using Scalar = typename Layer::Scalar;
  using Matrix = MatrixX<Scalar>;
  using Sequence = std::vector<Matrix>;
  using LayerType = Layer;

  std::vector<Layer> layers;
  Matrix readout_weights;  // 1 x top hidden
  Matrix readout_bias;     // 1 x 1
  /// Applies max(0, .) to each layer's hidden sequence before it feeds the next layer.
  bool relu_between_layers = true;

  static RecurrentNetwork create(Eigen::Index inputs, const std::vector<Eigen::Index>& hidden_sizes,
                                 bool relu_between_layers, Rng& rng) {
    if (hidden_sizes.empty()) throw std::invalid_argument("RecurrentNetwork: no layers");
    RecurrentNetwork net;
    net.relu_between_layers = relu_between_layers;
    Eigen::Index in = inputs;
    for (Eigen::Index h : hidden_sizes) {
      if (h < 1 || in < 1) throw std::invalid_argument("RecurrentNetwork: layer sizes must be positive");
      net.layers.push_back(Layer::initialized(in, h, rng));
      in = h;
    }
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(in));
    net.readout_weights.resize(1, in);
    for (Eigen::Index j = 0; j < in; ++j)
      net.readout_weights(0, j) = static_cast<Scalar>(uniform(rng, -double(bound), double(bound)));
    net.readout_bias = Matrix::Zero(1, 1);
    return net;
  }

  RecurrentNetwork zeros_like() const {
    RecurrentNetwork z;
    z.relu_between_layers = relu_between_layers;
    for (const Layer& l : layers) z.layers.push_back(Layer::zeros(l.input_size(), l.hidden_size()));
    z.readout_weights = Matrix::Zero(readout_weights.rows(), readout_weights.cols());
    z.readout_bias = Matrix::Zero(1, 1);
    return z;
  }

  Eigen::Index input_size() const { return layers.front().input_size(); }

  template <class F>
  void visit(F&& f) {
    for (Layer& l : layers) l.visit(f);
    f(readout_weights);
    f(readout_bias);
  }
  template <class F>
  void visit(F&& f) const {
    for (const Layer& l : layers) l.visit(f);
    f(readout_weights);
    f(readout_bias);
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&](const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

  bool all_finite() const {
    bool ok = true;
    visit([&](const Matrix& m) { ok = ok && m.allFinite(); });
    return ok;
  }

  /// Predictions (1 x batch) for sequences given step-major: xs[t] is inputs x batch.
  Matrix predict(const Sequence& xs) const { return forward(xs).output; }

  Scalar loss(const Sequence& xs, const Matrix& targets) const { return rmse(predict(xs), targets); }

  /// Root-mean-squared error over the batch; its gradient overwrites `grad`.
  Scalar loss_gradient(const Sequence& xs, const Matrix& targets, RecurrentNetwork& grad) const {
    Pass pass = forward(xs);
    const Scalar err = rmse(pass.output, targets);
    const auto batch = static_cast<Scalar>(targets.cols());

    grad = zeros_like();
    Matrix dy = Matrix::Zero(1, targets.cols());
    if (err > Scalar(0)) dy = (pass.output - targets) / (batch * err);

    const Matrix& top = pass.traces.back().hidden(xs.size() - 1);
    grad.readout_weights.noalias() = dy * top.transpose();
    grad.readout_bias(0, 0) = dy.sum();

    Sequence dh(xs.size(), Matrix::Zero(top.rows(), top.cols()));
    dh.back().noalias() = readout_weights.transpose() * dy;
    for (std::size_t k = layers.size(); k-- > 0;) {
      Sequence dx = backward_sequence(layers[k], pass.inputs[k], pass.traces[k], dh, grad.layers[k]);
      if (k == 0) break;
      for (std::size_t t = 0; t < dx.size(); ++t) {
        if (relu_between_layers)
          dx[t] = (pass.traces[k - 1].hidden(t).array() > Scalar(0)).select(dx[t], Scalar(0));
      }
      dh = std::move(dx);
    }
    return err;
  }

  using Trace = decltype(forward_sequence(std::declval<const Layer&>(), std::declval<const Sequence&>()));

  struct Pass {
    std::vector<Sequence> inputs;  // per layer, the sequence it consumed
    std::vector<Trace> traces;
    Matrix output;
  };

  Pass forward(const Sequence& xs) const {
    if (xs.empty()) throw std::invalid_argument("RecurrentNetwork: empty sequence");
    for (const Matrix& x : xs)
      if (x.rows() != input_size() || x.cols() != xs.front().cols())
        throw std::invalid_argument("RecurrentNetwork: input shape mismatch");
    Pass pass;
    pass.inputs.reserve(layers.size());
    pass.traces.reserve(layers.size());
    pass.inputs.push_back(xs);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      pass.traces.push_back(forward_sequence(layers[k], pass.inputs[k]));
      if (k + 1 == layers.size()) break;
      Sequence next(xs.size());
      for (std::size_t t = 0; t < xs.size(); ++t)
        next[t] = relu_between_layers ? pass.traces[k].hidden(t).cwiseMax(Scalar(0)) : pass.traces[k].hidden(t);
      pass.inputs.push_back(std::move(next));
    }
    pass.output = readout_weights * pass.traces.back().hidden(xs.size() - 1);
    pass.output.array() += readout_bias(0, 0);
    return pass;
  }

  static Scalar rmse(const Matrix& predicted, const Matrix& targets) {
    if (predicted.cols() != targets.cols() || targets.rows() != 1)
      throw std::invalid_argument("RecurrentNetwork: target shape mismatch");
    return std::sqrt((predicted - targets).squaredNorm() / static_cast<Scalar>(targets.cols()));
  }
};

using LstmNetwork = RecurrentNetwork<LstmLayer<double>>;
using GruNetwork = RecurrentNetwork<GruLayer<double>>;

// ---------------------------------------------------------------------------
// Training

struct AdamConfig {
  double learning_rate = 1e-4;
  double decay = 1e-7;  // lr_t = lr / (1 + decay * t)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t epochs = 1000;
  std::size_t patience = 25;
  double min_delta = 1e-6;
};

struct TrainHistory {
  std::vector<double> loss;  // RMSE at the start of each epoch
  bool stopped_early = false;
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(std::size_t epoch)
      : std::runtime_error("training diverged (non-finite loss) at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Full-batch Adam on the RMSE with early stopping on the training loss.
template <class Net>
TrainHistory train_network(Net& net, const typename Net::Sequence& xs, const typename Net::Matrix& targets,
                           const TrainConfig& cfg) {
  using Scalar = typename Net::Scalar;
  using Matrix = typename Net::Matrix;
  if (cfg.epochs < 1) throw std::invalid_argument("train_network: epochs must be at least 1");
  if (!(cfg.adam.learning_rate > 0.0)) throw std::invalid_argument("train_network: learning rate must be positive");

  Net grad = net.zeros_like(), m = net.zeros_like(), v = net.zeros_like();
  std::vector<Matrix*> p_ptr, g_ptr, m_ptr, v_ptr;
  net.visit([&](Matrix& x) { p_ptr.push_back(&x); });
  m.visit([&](Matrix& x) { m_ptr.push_back(&x); });
  v.visit([&](Matrix& x) { v_ptr.push_back(&x); });

  const auto& a = cfg.adam;
  TrainHistory history;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  double b1t = 1.0, b2t = 1.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = static_cast<double>(net.loss_gradient(xs, targets, grad));
    if (!std::isfinite(loss)) throw TrainingDiverged(epoch + 1);
    history.loss.push_back(loss);
    if (loss == 0.0) {
      history.stopped_early = true;
      break;
    }
    if (loss < best - cfg.min_delta) {
      best = loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      history.stopped_early = true;
      break;
    }

    g_ptr.clear();
    grad.visit([&](Matrix& x) { g_ptr.push_back(&x); });
    b1t *= a.beta1;
    b2t *= a.beta2;
    const auto lr = static_cast<Scalar>(a.learning_rate / (1.0 + a.decay * static_cast<double>(epoch)));
    const auto c1 = static_cast<Scalar>(1.0 - b1t), c2 = static_cast<Scalar>(1.0 - b2t);
    const auto beta1 = static_cast<Scalar>(a.beta1), beta2 = static_cast<Scalar>(a.beta2);
    const auto eps = static_cast<Scalar>(a.epsilon), wd = static_cast<Scalar>(a.weight_decay);
    for (std::size_t i = 0; i < p_ptr.size(); ++i) {
      Matrix& p = *p_ptr[i];
      Matrix& g = *g_ptr[i];
      if (wd != Scalar(0)) g += wd * p;
      m_ptr[i]->array() = beta1 * m_ptr[i]->array() + (Scalar(1) - beta1) * g.array();
      v_ptr[i]->array() = beta2 * v_ptr[i]->array() + (Scalar(1) - beta2) * g.array().square();
      p.array() -= lr * (m_ptr[i]->array() / c1) / ((v_ptr[i]->array() / c2).sqrt() + eps);
    }
  }
  if (!net.all_finite()) throw TrainingDiverged(history.loss.size());
  return history;
}

}  // namespace sector_rank
