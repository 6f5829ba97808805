#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rdson/bptt.hpp"
#include "rdson/data.hpp"
#include "rdson/network.hpp"

namespace rdson {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  NetConfig net;
  double e_th = 5e-5;  ///< stop once the test error drops below this
  int it_max = 1000;
  int m = 4;  ///< devices per batch
  AdamHyper adam;
  double clip_norm = 5.0;  ///< global gradient-norm clip; <= 0 disables

  void validate() const;
};

/// Single-core profile: hidden=16, ell=2, it_max=300, lr=5e-3. The larger
/// step compensates for the 300-iteration budget.
TrainConfig desk_profile();

/// Batch tensor: x is m x (tau+n-1) x k, y is m x n x k.
struct TrainingBatch {
  std::vector<std::vector<VectorD>> x;
  std::vector<std::vector<VectorD>> y;
  std::vector<std::string> device_ids;
  std::vector<std::size_t> window_starts;

  std::size_t rows() const { return x.size(); }
};

/// Random access to sample `index` of device `device`.
using SampleReader = std::function<double(std::size_t device, std::size_t index)>;

/// One uniformly random window of length tau+n per device. Window samples
/// [s, s+tau+n-2] become inputs and [s+tau, s+tau+n-1] targets.
TrainingBatch generate_batch(std::span<const std::string> device_ids, std::span<const std::size_t> lengths,
                             const SampleReader& read, const NetConfig& cfg, std::mt19937_64& rng);

TrainingBatch generate_data(std::span<const NormalizedTrace> traces, const NetConfig& cfg,
                            std::uint64_t seed);

/// Mean squared error over every row, step and component.
double mse(std::span<const std::vector<VectorD>> preds, std::span<const std::vector<VectorD>> targets);
double mse(std::span<const double> preds, std::span<const double> targets);

struct AdamState {
  Gradients<double> first_moment;
  Gradients<double> second_moment;
  std::int64_t step_count = 0;
  AdamHyper hyper;

  static AdamState fresh(const NetParams<double>& like, AdamHyper hyper = {});
};

struct AdamUpdate {
  NetParams<double> params;
  AdamState state;
};

/// Bias-corrected Adam step. Throws DivergenceError on non-finite gradients.
AdamUpdate adam_step(const AdamState& state, const NetParams<double>& params, const Gradients<double>& grads);

/// Scales `grads` in place so its global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(Gradients<double>& grads, double max_norm);

struct HistoryRow {
  int iteration = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
};

struct TrainResult {
  Network best_model;
  std::vector<HistoryRow> history;
  double best_test_mse;  ///< +inf when no iteration ran
  int best_iteration = 0;
};

struct TrainOptions {
  /// Start from these weights instead of a fresh truncated-normal draw.
  std::optional<Network> warm_start;
  /// Called after every iteration; return false to stop early.
  std::function<bool(const HistoryRow&)> on_iteration;
};

/// Training loop with test-error checkpointing: each iteration draws a batch,
/// runs the teacher-forced pass, back-propagates, takes an Adam step and then
/// scores one rollout window of `test`. The model with the lowest test error
/// is returned. The loop runs while iteration <= it_max and the test error is
/// still >= e_th.
TrainResult train(std::span<const NormalizedTrace> training, const NormalizedTrace& test,
                  const TrainConfig& cfg, std::uint64_t seed, const TrainOptions& options = {});

/// Rollout MSE on one window of a normalized series starting at `start`.
double rollout_window_mse(const Network& net, std::span<const double> series, std::size_t start);

/// Mean rollout MSE over windows starting at 0, stride, 2*stride, ... that
/// fit inside `series`; the last valid window is always included.
double evaluate_windows(const Network& net, std::span<const double> series, std::size_t stride);

/// Rolls `horizon` steps past the last tau values of `recent` (normalized).
std::vector<double> forecast(const Network& net, std::span<const double> recent, std::size_t horizon);

void write_history_csv(std::ostream& out, std::span<const HistoryRow> history);

/// Seed derivation for independent sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rdson
