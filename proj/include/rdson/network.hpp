#pragma once

// Recurrent cells (vanilla RNN and LSTM), the stacked LSTM with a dense
// read-out head, and its two forward modes:
//   * rollout: warm up on tau inputs, then feed each prediction back as the
//     next input for `horizon` steps (deployment path);
//   * teacher forced: consume tau+n-1 true inputs and read out the last n
//     steps (training path).
// Both record a ForwardTape that the BPTT routine walks backwards.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "rdson/errors.hpp"
#include "rdson/linalg.hpp"

namespace rdson {

/// Network hyper-parameters. Defaults follow the reference training table.
struct NetConfig {
  int k = 1;                        ///< input (and output) width
  int tau = 21;                     ///< input sequence length
  int n = 104;                      ///< output sequence length
  int hidden = 64;                  ///< hidden width of every LSTM layer
  int ell = 4;                      ///< number of stacked layers
  bool learn_initial_state = true;  ///< train c_0 alongside the weights

  void validate() const {
    if (k <= 0 || tau <= 0 || n <= 0 || hidden <= 0 || ell <= 0) {
      throw ConfigError("NetConfig: k, tau, n, hidden and ell must all be positive");
    }
  }

  int window() const { return tau + n; }

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// ---------------------------------------------------------------------------
// Vanilla RNN

enum class Activation { Tanh, Identity };

/// State activation of the vanilla RNN.
inline constexpr Activation kRnnStateActivation = Activation::Tanh;
/// Output activation of the vanilla RNN; identity keeps it a regressor.
inline constexpr Activation kRnnOutputActivation = Activation::Identity;

template <typename Scalar>
Vector<Scalar> apply_activation(Activation act, const Vector<Scalar>& v) {
  return act == Activation::Tanh ? tanh_elem(v) : v;
}

template <typename Scalar>
struct RnnCellParams {
  Matrix<Scalar> W_i;  // hidden x k
  Matrix<Scalar> W_c;  // hidden x hidden
  Matrix<Scalar> W_o;  // out x hidden
  Vector<Scalar> b_i;  // hidden
  Vector<Scalar> b_o;  // out
  Vector<Scalar> c_0;  // hidden

  static RnnCellParams zeros(int k, int hidden, int out) {
    return {Matrix<Scalar>::Zero(hidden, k),   Matrix<Scalar>::Zero(hidden, hidden),
            Matrix<Scalar>::Zero(out, hidden), Vector<Scalar>::Zero(hidden),
            Vector<Scalar>::Zero(out),         Vector<Scalar>::Zero(hidden)};
  }

  Eigen::Index hidden() const { return W_c.rows(); }

  void validate() const {
    const auto h = W_c.rows();
    if (W_c.cols() != h || W_i.rows() != h || W_o.cols() != h || b_i.size() != h ||
        b_o.size() != W_o.rows() || c_0.size() != h) {
      throw ShapeError("RnnCellParams: inconsistent shapes");
    }
  }
};

template <typename Scalar>
struct RnnStep {
  Vector<Scalar> z;
  Vector<Scalar> c;
};

template <typename Scalar>
RnnStep<Scalar> rnn_cell_step(const RnnCellParams<Scalar>& p, const std::type_identity_t<Vector<Scalar>>& x,
                              const std::type_identity_t<Vector<Scalar>>& c_prev) {
  p.validate();
  if (x.size() != p.W_i.cols() || c_prev.size() != p.hidden()) {
    throw ShapeError("rnn_cell_step: expected x of length " + std::to_string(p.W_i.cols()) +
                     " and state of length " + std::to_string(p.hidden()));
  }
  const Vector<Scalar> i = add(add(matvec(p.W_i, x), matvec(p.W_c, c_prev)), p.b_i);
  Vector<Scalar> c = apply_activation(kRnnStateActivation, i);
  const Vector<Scalar> o = add(matvec(p.W_o, c), p.b_o);
  return {apply_activation(kRnnOutputActivation, o), std::move(c)};
}

// ---------------------------------------------------------------------------
// LSTM

template <typename Scalar>
struct LstmCellParams {
  // Gate matrices act on v = [x, h_prev]; each is hidden x (input_width + hidden).
  Matrix<Scalar> W_i, W_o, W_f, W_c;
  Vector<Scalar> b_i, b_o, b_f, b_c;
  Vector<Scalar> c_0;

  using MatrixMember = Matrix<Scalar> LstmCellParams::*;
  using VectorMember = Vector<Scalar> LstmCellParams::*;

  static constexpr std::array<MatrixMember, 4> matrices() {
    return {&LstmCellParams::W_i, &LstmCellParams::W_o, &LstmCellParams::W_f, &LstmCellParams::W_c};
  }
  static constexpr std::array<VectorMember, 5> vectors() {
    return {&LstmCellParams::b_i, &LstmCellParams::b_o, &LstmCellParams::b_f, &LstmCellParams::b_c,
            &LstmCellParams::c_0};
  }

  static LstmCellParams zeros(int input_width, int hidden) {
    LstmCellParams p;
    for (auto m : matrices()) p.*m = Matrix<Scalar>::Zero(hidden, input_width + hidden);
    for (auto v : vectors()) p.*v = Vector<Scalar>::Zero(hidden);
    return p;
  }

  Eigen::Index hidden() const { return b_i.size(); }
  Eigen::Index input_width() const { return W_i.cols() - hidden(); }

  void validate() const {
    const auto h = b_i.size();
    for (auto m : matrices()) {
      if ((this->*m).rows() != h || (this->*m).cols() != W_i.cols() || W_i.cols() <= h) {
        throw ShapeError("LstmCellParams: gate matrices must share shape " +
                         detail::shape_str(h, W_i.cols()) + " with input width > 0");
      }
    }
    for (auto v : vectors()) {
      if ((this->*v).size() != h) throw ShapeError("LstmCellParams: bias/state length mismatch");
    }
  }
};

/// Every activation of one LSTM step, kept for the backward pass.
template <typename Scalar>
struct LstmStepCache {
  Vector<Scalar> v;  // [x, h_prev]
  Vector<Scalar> c_prev;
  Vector<Scalar> i, f, o;    // gates
  Vector<Scalar> candidate;  // c~
  Vector<Scalar> c;
  Vector<Scalar> tanh_c;
  Vector<Scalar> h;
};

template <typename Scalar>
LstmStepCache<Scalar> lstm_cell_forward(const LstmCellParams<Scalar>& p,
                                        const std::type_identity_t<Vector<Scalar>>& x,
                                        const std::type_identity_t<Vector<Scalar>>& h_prev,
                                        const std::type_identity_t<Vector<Scalar>>& c_prev) {
  if (x.size() != p.input_width() || h_prev.size() != p.hidden() || c_prev.size() != p.hidden()) {
    throw ShapeError("lstm_cell_step: expected x of length " + std::to_string(p.input_width()) +
                     " and states of length " + std::to_string(p.hidden()) + ", got " +
                     std::to_string(x.size()) + "/" + std::to_string(h_prev.size()) + "/" +
                     std::to_string(c_prev.size()));
  }
  LstmStepCache<Scalar> s;
  s.v = concat(x, h_prev);
  s.c_prev = c_prev;
  s.i = sigmoid(add(matvec(p.W_i, s.v), p.b_i));
  s.f = sigmoid(add(matvec(p.W_f, s.v), p.b_f));
  s.o = sigmoid(add(matvec(p.W_o, s.v), p.b_o));
  s.candidate = tanh_elem(add(matvec(p.W_c, s.v), p.b_c));
  s.c = add(hadamard(s.f, c_prev), hadamard(s.i, s.candidate));
  s.tanh_c = tanh_elem(s.c);
  s.h = hadamard(s.o, s.tanh_c);
  return s;
}

template <typename Scalar>
struct LstmStep {
  Vector<Scalar> h;
  Vector<Scalar> c;
};

template <typename Scalar>
LstmStep<Scalar> lstm_cell_step(const LstmCellParams<Scalar>& p,
                                const std::type_identity_t<Vector<Scalar>>& x,
                                const std::type_identity_t<Vector<Scalar>>& h_prev,
                                const std::type_identity_t<Vector<Scalar>>& c_prev) {
  auto s = lstm_cell_forward(p, x, h_prev, c_prev);
  return {std::move(s.h), std::move(s.c)};
}

// ---------------------------------------------------------------------------
// Stacked network

template <typename Scalar>
struct DenseParams {
  Matrix<Scalar> W_d;  // k x hidden
  Vector<Scalar> b_d;  // k
};

/// The trainable tensors of a stacked LSTM; also used for gradients and
/// optimizer moments, which share its shape.
template <typename Scalar>
struct NetParams {
  std::vector<LstmCellParams<Scalar>> layers;
  DenseParams<Scalar> dense;

  static NetParams zeros(const NetConfig& cfg) {
    NetParams p;
    p.layers.reserve(cfg.ell);
    for (int l = 0; l < cfg.ell; ++l) {
      p.layers.push_back(LstmCellParams<Scalar>::zeros(l == 0 ? cfg.k : cfg.hidden, cfg.hidden));
    }
    p.dense.W_d = Matrix<Scalar>::Zero(cfg.k, cfg.hidden);
    p.dense.b_d = Vector<Scalar>::Zero(cfg.k);
    return p;
  }

  static NetParams zeros_like(const NetParams& other) {
    NetParams p = other;
    for_each_tensor([](auto& t) { t.setZero(); }, p);
    return p;
  }

  std::size_t size() const {
    std::size_t total = 0;
    for_each_tensor([&](const auto& t) { total += static_cast<std::size_t>(t.size()); }, *this);
    return total;
  }

  /// Checks the tensors against `cfg`; throws ShapeError on any mismatch.
  void check_against(const NetConfig& cfg) const {
    if (static_cast<int>(layers.size()) != cfg.ell) {
      throw ShapeError("NetParams: expected " + std::to_string(cfg.ell) + " layers, got " +
                       std::to_string(layers.size()));
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      layers[l].validate();
      const int width = l == 0 ? cfg.k : cfg.hidden;
      if (layers[l].hidden() != cfg.hidden || layers[l].input_width() != width) {
        throw ShapeError("NetParams: layer " + std::to_string(l + 1) + " has shape " +
                         detail::shape_str(layers[l].hidden(), layers[l].input_width()) + ", expected " +
                         detail::shape_str(cfg.hidden, width));
      }
    }
    if (dense.W_d.rows() != cfg.k || dense.W_d.cols() != cfg.hidden || dense.b_d.size() != cfg.k) {
      throw ShapeError("NetParams: dense layer must map hidden -> k");
    }
  }

  /// Calls f on corresponding tensors of each argument, in a fixed order:
  /// layer by layer (W_i, W_o, W_f, W_c, b_i, b_o, b_f, b_c, c_0), then W_d, b_d.
  template <typename F, typename... Ps>
  static void for_each_tensor(F&& f, Ps&&... ps) {
    const auto& first = std::get<0>(std::forward_as_tuple(ps...));
    for (std::size_t l = 0; l < first.layers.size(); ++l) {
      for (auto m : LstmCellParams<Scalar>::matrices()) f((ps.layers[l].*m)...);
      for (auto v : LstmCellParams<Scalar>::vectors()) f((ps.layers[l].*v)...);
    }
    f(ps.dense.W_d...);
    f(ps.dense.b_d...);
  }
};

template <typename Scalar>
std::vector<Scalar> flatten(const NetParams<Scalar>& p) {
  std::vector<Scalar> out;
  out.reserve(p.size());
  NetParams<Scalar>::for_each_tensor(
      [&](const auto& t) {
        // Row-major matrices and vectors are both contiguous in storage order.
        out.insert(out.end(), t.data(), t.data() + t.size());
      },
      p);
  return out;
}

template <typename Scalar>
NetParams<Scalar> unflatten(const NetConfig& cfg, std::span<const Scalar> flat) {
  auto p = NetParams<Scalar>::zeros(cfg);
  if (flat.size() != p.size()) {
    throw ShapeError("unflatten: expected " + std::to_string(p.size()) + " values, got " +
                     std::to_string(flat.size()));
  }
  std::size_t pos = 0;
  NetParams<Scalar>::for_each_tensor(
      [&](auto& t) {
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), t.size(), t.data());
        pos += static_cast<std::size_t>(t.size());
      },
      p);
  return p;
}

/// A stacked LSTM with dense head. Shapes are checked once, on construction.
template <typename Scalar>
class StackedLstm {
 public:
  StackedLstm(NetConfig config, NetParams<Scalar> params) : config_(config), params_(std::move(params)) {
    config_.validate();
    params_.check_against(config_);
  }

  static StackedLstm zeros(const NetConfig& config) {
    config.validate();
    return StackedLstm(config, NetParams<Scalar>::zeros(config));
  }

  const NetConfig& config() const { return config_; }
  const NetParams<Scalar>& params() const { return params_; }

  /// Returns a copy carrying `params`, which must match the current shapes.
  StackedLstm with_params(NetParams<Scalar> params) const { return StackedLstm(config_, std::move(params)); }

  Vector<Scalar> dense(const Vector<Scalar>& h_top) const {
    return add(matvec(params_.dense.W_d, h_top), params_.dense.b_d);
  }

  friend bool operator==(const StackedLstm& a, const StackedLstm& b) {
    return a.config_ == b.config_ && flatten(a.params_) == flatten(b.params_);
  }

 private:
  NetConfig config_;
  NetParams<Scalar> params_;
};

enum class ForwardMode { Rollout, TeacherForced };

/// Activations of one sequence through the unrolled network.
template <typename Scalar>
struct ForwardTape {
  ForwardMode mode = ForwardMode::Rollout;
  std::vector<Vector<Scalar>> inputs;                     // x fed at each step
  std::vector<std::vector<LstmStepCache<Scalar>>> steps;  // [step][layer]
  int first_output_step = 0;                              // steps from here on emit a prediction
};

template <typename Scalar>
struct ForwardResult {
  std::vector<Vector<Scalar>> preds;
  ForwardTape<Scalar> tape;
};

namespace detail {

template <typename Scalar>
struct RecurrentState {
  std::vector<Vector<Scalar>> h, c;

  explicit RecurrentState(const StackedLstm<Scalar>& net) {
    const auto& cfg = net.config();
    for (int l = 0; l < cfg.ell; ++l) {
      h.push_back(Vector<Scalar>::Zero(cfg.hidden));
      c.push_back(net.params().layers[l].c_0);
    }
  }

  /// One step of every layer; returns the caches bottom to top.
  std::vector<LstmStepCache<Scalar>> step(const StackedLstm<Scalar>& net, const Vector<Scalar>& x) {
    std::vector<LstmStepCache<Scalar>> caches;
    caches.reserve(h.size());
    const Vector<Scalar>* input = &x;
    for (std::size_t l = 0; l < h.size(); ++l) {
      caches.push_back(lstm_cell_forward(net.params().layers[l], *input, h[l], c[l]));
      h[l] = caches.back().h;
      c[l] = caches.back().c;
      input = &h[l];
    }
    return caches;
  }
};

template <typename Scalar>
void check_inputs(const NetConfig& cfg, std::span<const Vector<Scalar>> inputs, std::size_t expected,
                  const char* what) {
  if (inputs.size() != expected) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(expected) + " input vectors, got " +
                     std::to_string(inputs.size()));
  }
  for (const auto& x : inputs) {
    if (x.size() != cfg.k) {
      throw ShapeError(std::string(what) + ": input width " + std::to_string(x.size()) +
                       " != k=" + std::to_string(cfg.k));
    }
  }
}

}  // namespace detail

/// Autoregressive rollout: warm up on exactly tau inputs, then emit `horizon`
/// predictions, feeding each one back as the next input.
template <typename Scalar>
ForwardResult<Scalar> forward_rollout(const StackedLstm<Scalar>& net, std::span<const Vector<Scalar>> inputs,
                                      std::size_t horizon) {
  const auto& cfg = net.config();
  detail::check_inputs(cfg, inputs, static_cast<std::size_t>(cfg.tau), "forward");
  ForwardResult<Scalar> out;
  out.tape.mode = ForwardMode::Rollout;
  out.tape.first_output_step = cfg.tau - 1;
  if (horizon == 0) return out;

  detail::RecurrentState<Scalar> state(net);
  const std::size_t total = static_cast<std::size_t>(cfg.tau) + horizon - 1;
  Vector<Scalar> x = inputs[0];
  for (std::size_t t = 0; t < total; ++t) {
    if (t < inputs.size()) x = inputs[t];
    out.tape.inputs.push_back(x);
    out.tape.steps.push_back(state.step(net, x));
    if (t + 1 >= static_cast<std::size_t>(cfg.tau)) {
      x = net.dense(state.h.back());
      out.preds.push_back(x);
    }
  }
  return out;
}

/// Rollout for the configured output length n.
template <typename Scalar>
ForwardResult<Scalar> forward(const StackedLstm<Scalar>& net, std::span<const Vector<Scalar>> inputs) {
  return forward_rollout(net, inputs, static_cast<std::size_t>(net.config().n));
}

/// Teacher-forced pass over tau+n-1 true inputs; the read-out at step t
/// predicts sample t+1, so the last n steps yield the n predictions.
template <typename Scalar>
ForwardResult<Scalar> forward_teacher_forced(const StackedLstm<Scalar>& net,
                                             std::span<const Vector<Scalar>> inputs) {
  const auto& cfg = net.config();
  detail::check_inputs(cfg, inputs, static_cast<std::size_t>(cfg.tau + cfg.n - 1), "forward_teacher_forced");
  ForwardResult<Scalar> out;
  out.tape.mode = ForwardMode::TeacherForced;
  out.tape.first_output_step = cfg.tau - 1;
  detail::RecurrentState<Scalar> state(net);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    out.tape.inputs.push_back(inputs[t]);
    out.tape.steps.push_back(state.step(net, inputs[t]));
    if (static_cast<int>(t) >= out.tape.first_output_step) out.preds.push_back(net.dense(state.h.back()));
  }
  return out;
}

/// Truncated normal: mean 0, sigma 0.1, samples beyond 2 sigma rejected.
template <typename Scalar>
NetParams<Scalar> truncated_normal_params(const NetConfig& cfg, std::uint64_t seed) {
  constexpr double kSigma = 0.1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, kSigma);
  auto draw = [&] {
    for (;;) {
      const double x = normal(rng);
      if (std::abs(x) <= 2.0 * kSigma) return static_cast<Scalar>(x);
    }
  };
  auto p = NetParams<Scalar>::zeros(cfg);
  NetParams<Scalar>::for_each_tensor(
      [&](auto& t) {
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = draw();
      },
      p);
  for (auto& layer : p.layers) layer.c_0.setZero();
  return p;
}

template <typename Scalar = double>
StackedLstm<Scalar> init_params(const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return StackedLstm<Scalar>(cfg, truncated_normal_params<Scalar>(cfg, seed));
}

using Network = StackedLstm<double>;

}  // namespace rdson
