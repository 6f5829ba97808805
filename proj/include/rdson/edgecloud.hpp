#pragma once

// In-process simulation of the edge/cloud deployment: edge nodes stream
// sensed samples, run rollout inference and raise a retrain request when a
// matured prediction misses by more than delta_r_t; the cloud trains on the
// aggregated traces and pushes versioned model snapshots back. Transport is
// a deterministic event queue ordered by (tick, insertion sequence).

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rdson/data.hpp"
#include "rdson/metrics.hpp"
#include "rdson/snapshot.hpp"
#include "rdson/training.hpp"

namespace rdson {

// ---------------------------------------------------------------------------
// Edge

struct EdgeConfig {
  std::string node_id;
  double delta_r_t = std::numeric_limits<double>::infinity();  ///< ohms
  std::size_t horizon = 104;
  std::size_t buffer_capacity = 0;  ///< 0 = tau of the installed model
};

/// Forecasts `horizon` ohm values following `recent` (ohms, oldest first).
using EdgePredictor = std::function<std::vector<double>(std::span<const double> recent, std::size_t horizon)>;

/// A matured prediction compared against the value sensed for its target.
struct MaturedCheck {
  std::uint64_t index = 0;
  double actual = 0.0;
  double predicted = 0.0;
  std::uint64_t model_version = 0;
  bool exceeded = false;
};

struct RetrainRequest {
  std::string node_id;
  std::uint64_t index = 0;  ///< sample whose check triggered the request
  double error = 0.0;       ///< |actual - predicted|, ohms
  std::uint64_t model_version = 0;
};

struct EdgeStepResult {
  std::optional<std::vector<double>> prediction;  ///< targets index+1 ... index+horizon
  std::optional<RetrainRequest> request;
  std::optional<MaturedCheck> check;
};

class EdgeNode {
 public:
  EdgeNode(EdgeConfig config, ModelSnapshot model);

  /// Replaces inference with `p` (test harnesses, alternative models).
  void set_predictor(EdgePredictor p) {
    predictor_ = std::move(p);
    custom_predictor_ = true;
  }

  /// Installs a pushed model. Stale versions are ignored (returns false).
  /// Pending predictions and the outstanding-request flag are cleared.
  bool install(ModelSnapshot model);

  EdgeStepResult step(const Sample& s);

  /// Samples received since the last call.
  std::vector<Sample> take_upload();

  const EdgeConfig& config() const { return config_; }
  const ModelSnapshot& model() const { return model_; }
  bool request_outstanding() const { return outstanding_; }
  std::size_t buffered() const { return buffer_.size(); }
  std::size_t pending_upload() const { return pending_upload_.size(); }

 private:
  EdgeConfig config_;
  ModelSnapshot model_;
  EdgePredictor predictor_;
  bool custom_predictor_ = false;
  std::deque<double> buffer_;
  std::vector<Sample> pending_upload_;
  // Target index -> (predicted value, version that made it). The first
  // prediction made for a target is the one judged.
  std::map<std::uint64_t, std::pair<double, std::uint64_t>> pending_;
  bool outstanding_ = false;
};

/// The default edge predictor: normalize, roll the network out, denormalize.
EdgePredictor snapshot_predictor(const ModelSnapshot& model);

// ---------------------------------------------------------------------------
// Cloud

class CloudNode {
 public:
  /// `training` must not include the device that later streams to the edge.
  /// `validation` is the device whose rollout error checkpoints training.
  CloudNode(std::vector<DeviceTrace> training, DeviceTrace validation, TrainConfig cfg, std::uint64_t seed);

  /// Trains from scratch and publishes version 1.
  ModelSnapshot train_initial();

  /// Appends uploaded samples to the registry entry of `device_id`.
  void receive(const std::string& device_id, std::span<const Sample> samples);

  /// Warm-starts from the latest model with it_max / 4 iterations, adding
  /// every registered streamed device long enough for a window.
  ModelSnapshot retrain();

  const ModelSnapshot& latest() const { return latest_; }
  const std::map<std::string, DeviceTrace>& streamed() const { return streamed_; }

 private:
  std::vector<NormalizedTrace> training_set() const;

  std::vector<DeviceTrace> training_;
  DeviceTrace validation_;
  TrainConfig cfg_;
  std::uint64_t seed_;
  Normalizer normalizer_;
  std::map<std::string, DeviceTrace> streamed_;
  ModelSnapshot latest_;
};

// ---------------------------------------------------------------------------
// Event loop

enum class EventKind { Sample, Upload, RetrainRequest, ModelPush };

const char* to_string(EventKind k);

struct SimEvent {
  std::uint64_t tick = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Sample;
  std::variant<rdson::Sample, std::vector<rdson::Sample>, rdson::RetrainRequest, ModelSnapshot> payload;
};

/// Min-queue on (tick, seq); seq is assigned on push.
class EventQueue {
 public:
  void push(std::uint64_t tick, EventKind kind, decltype(SimEvent::payload) payload);
  SimEvent pop();
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      return a.tick != b.tick ? a.tick > b.tick : a.seq > b.seq;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> q_;
  std::uint64_t next_seq_ = 0;
};

struct ScenarioSpec {
  std::vector<DeviceTrace> devices;
  std::string holdout;
  std::string validation;  ///< empty = last non-holdout device
  double delta_r_t = 0.005;
  std::size_t horizon = 104;
  int retrain_budget = 3;
  std::optional<std::size_t> stream_samples;  ///< default: whole holdout trace
  std::size_t upload_interval = 25;           ///< samples per routine upload
  std::uint64_t uplink_latency = 1;           ///< ticks
  std::uint64_t downlink_latency = 1;         ///< ticks
  std::uint64_t train_latency = 10;           ///< ticks
  TrainConfig train = desk_profile();
};

/// Parses `key = value` lines. `devices` lists preset names (from `presets`,
/// if given, else the built-in catalogue) or CSV paths; relative paths
/// resolve against `base_dir`. `train.*` keys override the training profile.
ScenarioSpec parse_scenario(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioSpec load_scenario(const std::filesystem::path& path);

struct EventLogRow {
  std::uint64_t tick = 0;
  std::uint64_t seq = 0;
  std::string kind;
  std::uint64_t model_version = 0;
  std::int64_t index = -1;  ///< sample index, -1 if not applicable
  double value = 0.0;
  std::string note;
};

struct VersionReport {
  std::uint64_t version = 0;
  std::size_t checks = 0;
  std::optional<ErrorReport> report;  ///< present once the version has a matured check
};

struct SimReport {
  std::vector<EventLogRow> log;
  std::vector<VersionReport> versions;
  std::size_t predictions = 0;
  std::size_t checks = 0;
  std::size_t retrain_requests = 0;
  std::size_t retrains = 0;
  std::size_t denied_requests = 0;
  std::size_t messages_up = 0;    ///< uploads + requests
  std::size_t messages_down = 0;  ///< model pushes
  std::uint64_t final_version = 0;
  std::optional<double> error_at_5pct;  ///< from the judged prediction at the detection point
};

SimReport run_scenario(const ScenarioSpec& spec, std::uint64_t seed);

void write_event_log_csv(std::ostream& out, const SimReport& r);
void write_sim_summary(std::ostream& out, const SimReport& r);

// ---------------------------------------------------------------------------
// Aggregation experiment

struct AggregationPoint {
  int m = 0;
  double mean_mse = 0.0;  ///< normalized scale
  std::vector<double> trial_mse;
};

struct AggregationResult {
  std::string holdout;
  std::vector<AggregationPoint> curve;
  bool monotone = false;  ///< mean_mse strictly decreases along m_values
};

/// For every trial the non-holdout devices are shuffled once; the model for
/// m uses the first m of them with a trial seed shared by every m. Each model
/// is scored by evaluate_windows on the held-out device.
AggregationResult aggregation_experiment(std::span<const DeviceTrace> devices, std::size_t holdout,
                                         std::span<const int> m_values, int trials, const TrainConfig& cfg,
                                         std::uint64_t seed, std::size_t eval_stride = 5);

void write_aggregation_csv(std::ostream& out, const AggregationResult& r);

}  // namespace rdson
