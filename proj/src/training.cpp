#include "rdson/training.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "rdson/errors.hpp"

namespace rdson {

namespace {

std::vector<VectorD> to_vectors(std::span<const double> values) {
  std::vector<VectorD> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(VectorD::Constant(1, v));
  return out;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void TrainConfig::validate() const {
  net.validate();
  if (!(e_th > 0.0)) throw ConfigError("e_th must be > 0");
  if (it_max < 0) throw ConfigError("it_max must be >= 0");
  if (m < 1) throw ConfigError("m must be >= 1");
  if (!(adam.lr > 0.0) || adam.beta1 < 0.0 || adam.beta1 >= 1.0 || adam.beta2 < 0.0 || adam.beta2 >= 1.0 ||
      !(adam.epsilon > 0.0)) {
    throw ConfigError("invalid Adam hyper-parameters");
  }
}

TrainConfig desk_profile() {
  TrainConfig cfg;
  cfg.net.hidden = 16;
  cfg.net.ell = 2;
  cfg.it_max = 300;
  cfg.adam.lr = 5e-3;
  return cfg;
}

TrainingBatch generate_batch(std::span<const std::string> device_ids, std::span<const std::size_t> lengths,
                             const SampleReader& read, const NetConfig& cfg, std::mt19937_64& rng) {
  if (device_ids.size() != lengths.size()) throw ShapeError("generate_batch: ids/lengths mismatch");
  if (cfg.k != 1) throw ConfigError("generate_batch: scalar traces require k = 1");
  const std::size_t window = static_cast<std::size_t>(cfg.window());
  for (std::size_t d = 0; d < lengths.size(); ++d) {
    if (lengths[d] < window) {
      throw InsufficientDataError("device " + device_ids[d] + " has " + std::to_string(lengths[d]) +
                                  " samples; a window needs tau+n = " + std::to_string(window));
    }
  }
  TrainingBatch batch;
  for (std::size_t d = 0; d < lengths.size(); ++d) {
    std::uniform_int_distribution<std::size_t> pick(0, lengths[d] - window);
    const std::size_t s = pick(rng);
    std::vector<VectorD> x, y;
    x.reserve(window - 1);
    y.reserve(static_cast<std::size_t>(cfg.n));
    for (std::size_t i = 0; i + 1 < window; ++i) x.push_back(VectorD::Constant(1, read(d, s + i)));
    for (std::size_t i = static_cast<std::size_t>(cfg.tau); i < window; ++i) {
      y.push_back(VectorD::Constant(1, read(d, s + i)));
    }
    batch.x.push_back(std::move(x));
    batch.y.push_back(std::move(y));
    batch.device_ids.push_back(device_ids[d]);
    batch.window_starts.push_back(s);
  }
  return batch;
}

TrainingBatch generate_data(std::span<const NormalizedTrace> traces, const NetConfig& cfg,
                            std::uint64_t seed) {
  std::vector<std::string> ids;
  std::vector<std::size_t> lengths;
  for (const auto& t : traces) {
    ids.push_back(t.device_id);
    lengths.push_back(t.values.size());
  }
  std::mt19937_64 rng(seed);
  return generate_batch(
      ids, lengths, [&](std::size_t d, std::size_t i) { return traces[d].values[i]; }, cfg, rng);
}

double mse(std::span<const std::vector<VectorD>> preds, std::span<const std::vector<VectorD>> targets) {
  if (preds.size() != targets.size() || preds.empty()) throw ShapeError("mse: row count mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < preds.size(); ++r) {
    if (preds[r].size() != targets[r].size()) throw ShapeError("mse: sequence length mismatch");
    for (std::size_t t = 0; t < preds[r].size(); ++t) {
      if (preds[r][t].size() != targets[r][t].size()) throw ShapeError("mse: vector width mismatch");
      sum += (targets[r][t] - preds[r][t]).squaredNorm();
      count += static_cast<std::size_t>(preds[r][t].size());
    }
  }
  if (count == 0) throw ShapeError("mse: no elements");
  return sum / static_cast<double>(count);
}

double mse(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size() || preds.empty()) throw ShapeError("mse: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += (targets[i] - preds[i]) * (targets[i] - preds[i]);
  return sum / static_cast<double>(preds.size());
}

AdamState AdamState::fresh(const NetParams<double>& like, AdamHyper hyper) {
  return {NetParams<double>::zeros_like(like), NetParams<double>::zeros_like(like), 0, hyper};
}

AdamUpdate adam_step(const AdamState& state, const NetParams<double>& params,
                     const Gradients<double>& grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter/gradient/moment shapes differ");
  }
  bool finite = true;
  NetParams<double>::for_each_tensor([&](const auto& g) { finite = finite && g.allFinite(); }, grads);
  if (!finite) throw DivergenceError("adam_step: non-finite gradient");

  AdamUpdate out{params, state};
  const auto& h = state.hyper;
  out.state.step_count = state.step_count + 1;
  const double t = static_cast<double>(out.state.step_count);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  NetParams<double>::for_each_tensor(
      [&](auto& p, auto& m, auto& v, const auto& g) {
        if (p.rows() != g.rows() || p.cols() != g.cols())
          throw ShapeError("adam_step: tensor shape mismatch");
        m = h.beta1 * m + (1.0 - h.beta1) * g;
        v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseAbs2();
        p.array() -= h.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + h.epsilon);
      },
      out.params, out.state.first_moment, out.state.second_moment, grads);
  return out;
}

double clip_global_norm(Gradients<double>& grads, double max_norm) {
  double sq = 0.0;
  NetParams<double>::for_each_tensor([&](const auto& g) { sq += g.squaredNorm(); }, grads);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    NetParams<double>::for_each_tensor([&](auto& g) { g *= s; }, grads);
  }
  return norm;
}

double rollout_window_mse(const Network& net, std::span<const double> series, std::size_t start) {
  const auto& cfg = net.config();
  const std::size_t tau = static_cast<std::size_t>(cfg.tau);
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  if (start + tau + n > series.size()) {
    throw InsufficientDataError("rollout window [" + std::to_string(start) + ", " +
                                std::to_string(start + tau + n) + ") exceeds series of length " +
                                std::to_string(series.size()));
  }
  const auto preds = forecast(net, series.subspan(start, tau), n);
  return mse(preds, series.subspan(start + tau, n));
}

double evaluate_windows(const Network& net, std::span<const double> series, std::size_t stride) {
  const std::size_t window = static_cast<std::size_t>(net.config().window());
  if (series.size() < window) {
    throw InsufficientDataError("evaluation series has " + std::to_string(series.size()) +
                                " samples; a window needs " + std::to_string(window));
  }
  if (stride == 0) stride = 1;
  const std::size_t last = series.size() - window;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s <= last; s += stride) starts.push_back(s);
  if (starts.back() != last) starts.push_back(last);
  double sum = 0.0;
  for (std::size_t s : starts) sum += rollout_window_mse(net, series, s);
  return sum / static_cast<double>(starts.size());
}

std::vector<double> forecast(const Network& net, std::span<const double> recent, std::size_t horizon) {
  const std::size_t tau = static_cast<std::size_t>(net.config().tau);
  if (net.config().k != 1) throw ConfigError("forecast: scalar series require k = 1");
  if (recent.size() < tau) {
    throw InsufficientDataError("forecast needs at least tau = " + std::to_string(tau) + " samples, got " +
                                std::to_string(recent.size()));
  }
  const auto inputs = to_vectors(recent.subspan(recent.size() - tau));
  const auto result = forward_rollout<double>(net, inputs, horizon);
  std::vector<double> out;
  out.reserve(horizon);
  for (const auto& p : result.preds) out.push_back(p[0]);
  return out;
}

TrainResult train(std::span<const NormalizedTrace> training, const NormalizedTrace& test,
                  const TrainConfig& cfg, std::uint64_t seed, const TrainOptions& options) {
  cfg.validate();
  if (training.empty()) throw DataError("train: at least one training device is required");
  for (const auto& t : training) {
    if (t.device_id == test.device_id) {
      throw DataError("train: test device " + test.device_id + " is also a training device");
    }
  }
  const std::size_t window = static_cast<std::size_t>(cfg.net.window());
  if (test.values.size() < window) {
    throw InsufficientDataError("test device " + test.device_id + " has " +
                                std::to_string(test.values.size()) + " samples; a window needs " +
                                std::to_string(window));
  }

  Network model = options.warm_start ? *options.warm_start : init_params(cfg.net, seed);
  if (!(model.config() == cfg.net))
    throw ConfigError("train: warm-start model config differs from TrainConfig");

  TrainResult result{model, {}, std::numeric_limits<double>::infinity(), 0};
  AdamState adam = AdamState::fresh(model.params(), cfg.adam);

  std::mt19937_64 batch_rng(mix_seed(seed, 1));
  std::mt19937_64 test_rng(mix_seed(seed, 2));
  std::uniform_int_distribution<std::size_t> test_start(0, test.values.size() - window);

  const std::size_t rows = std::min<std::size_t>(static_cast<std::size_t>(cfg.m), training.size());
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), 0);

  double error = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= cfg.it_max && error >= cfg.e_th; ++j) {
    // Pick `rows` distinct devices when more are available than m.
    if (rows < training.size()) {
      for (std::size_t i = 0; i < rows; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(batch_rng)]);
      }
    }
    std::vector<std::string> ids;
    std::vector<std::size_t> lengths;
    std::vector<const NormalizedTrace*> chosen;
    for (std::size_t i = 0; i < rows; ++i) {
      chosen.push_back(&training[order[i]]);
      ids.push_back(chosen.back()->device_id);
      lengths.push_back(chosen.back()->values.size());
    }
    const auto batch = generate_batch(
        ids, lengths, [&](std::size_t d, std::size_t i) { return chosen[d]->values[i]; }, cfg.net, batch_rng);

    std::vector<ForwardTape<double>> tapes;
    tapes.reserve(rows);
    for (const auto& x : batch.x) tapes.push_back(forward_teacher_forced<double>(model, x).tape);
    auto [loss, grads] = bptt<double>(model, tapes, batch.y);
    if (!std::isfinite(loss))
      throw DivergenceError("train: loss became non-finite at iteration " + std::to_string(j));
    clip_global_norm(grads, cfg.clip_norm);
    auto update = adam_step(adam, model.params(), grads);
    model = model.with_params(std::move(update.params));
    adam = std::move(update.state);

    error = rollout_window_mse(model, test.values, test_start(test_rng));
    if (!std::isfinite(error))
      throw DivergenceError("train: test error became non-finite at iteration " + std::to_string(j));
    const HistoryRow row{j, loss, error};
    result.history.push_back(row);
    if (error < result.best_test_mse) {
      result.best_test_mse = error;
      result.best_model = model;
      result.best_iteration = j;
    }
    if (options.on_iteration && !options.on_iteration(row)) break;
  }
  return result;
}

void write_history_csv(std::ostream& out, std::span<const HistoryRow> history) {
  out << "iteration,train_mse,test_mse\n";
  char buf[96];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g\n", h.iteration, h.train_mse, h.test_mse);
    out << buf;
  }
}

}  // namespace rdson
