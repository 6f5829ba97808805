#include "rdson/edgecloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rdson/errors.hpp"
#include "text.hpp"

namespace rdson {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Edge

EdgePredictor snapshot_predictor(const ModelSnapshot& model) {
  return [net = model.network(), nz = model.normalizer](std::span<const double> recent, std::size_t horizon) {
    const auto z = normalize(nz, recent);
    return denormalize(nz, forecast(net, z, horizon));
  };
}

EdgeNode::EdgeNode(EdgeConfig config, ModelSnapshot model)
    : config_(std::move(config)), model_(std::move(model)), predictor_(snapshot_predictor(model_)) {}

bool EdgeNode::install(ModelSnapshot model) {
  if (model.version <= model_.version) return false;
  model_ = std::move(model);
  if (!custom_predictor_) predictor_ = snapshot_predictor(model_);
  pending_.clear();
  outstanding_ = false;
  return true;
}

EdgeStepResult EdgeNode::step(const Sample& s) {
  EdgeStepResult r;
  // Targets that were skipped by the stream can never mature.
  pending_.erase(pending_.begin(), pending_.lower_bound(s.index));
  if (auto it = pending_.find(s.index); it != pending_.end()) {
    const double err = std::abs(s.delta_r - it->second.first);
    r.check = MaturedCheck{s.index, s.delta_r, it->second.first, it->second.second, err > config_.delta_r_t};
    pending_.erase(it);
    if (r.check->exceeded && !outstanding_) {
      outstanding_ = true;
      r.request = RetrainRequest{config_.node_id, s.index, err, r.check->model_version};
    }
  }

  const std::size_t tau = static_cast<std::size_t>(model_.config.tau);
  const std::size_t capacity = std::max(config_.buffer_capacity, tau);
  buffer_.push_back(s.delta_r);
  while (buffer_.size() > capacity) buffer_.pop_front();
  pending_upload_.push_back(s);

  if (buffer_.size() >= tau && config_.horizon > 0) {
    const std::vector<double> recent(buffer_.end() - static_cast<std::ptrdiff_t>(tau), buffer_.end());
    auto pred = predictor_(recent, config_.horizon);
    if (pred.size() != config_.horizon) throw ShapeError("edge predictor returned the wrong horizon");
    for (std::size_t k = 0; k < pred.size(); ++k)
      pending_.emplace(s.index + 1 + k, std::pair{pred[k], model_.version});
    r.prediction = std::move(pred);
  }
  return r;
}

std::vector<Sample> EdgeNode::take_upload() { return std::exchange(pending_upload_, {}); }

// ---------------------------------------------------------------------------
// Cloud

CloudNode::CloudNode(std::vector<DeviceTrace> training, DeviceTrace validation, TrainConfig cfg,
                     std::uint64_t seed)
    : training_(std::move(training)), validation_(std::move(validation)), cfg_(cfg), seed_(seed) {
  cfg_.validate();
  if (training_.empty()) throw DataError("cloud: at least one training device is required");
  std::vector<DeviceTrace> fit = training_;
  fit.push_back(validation_);
  normalizer_ = fit_normalizer(fit);
}

std::vector<NormalizedTrace> CloudNode::training_set() const {
  std::vector<NormalizedTrace> out;
  for (const auto& t : training_) out.push_back(normalize(normalizer_, t));
  const std::size_t window = static_cast<std::size_t>(cfg_.net.window());
  for (const auto& [id, t] : streamed_) {
    if (t.size() >= window) out.push_back(normalize(normalizer_, t));
  }
  return out;
}

ModelSnapshot CloudNode::train_initial() {
  const auto result = train(training_set(), normalize(normalizer_, validation_), cfg_, mix_seed(seed_, 1));
  latest_ = ModelSnapshot::from_network(result.best_model, normalizer_, 1);
  return latest_;
}

void CloudNode::receive(const std::string& device_id, std::span<const Sample> samples) {
  auto& trace = streamed_[device_id];
  trace.device_id = device_id;
  for (const auto& s : samples) {
    if (!trace.samples.empty() && s.index <= trace.samples.back().index) continue;
    trace.samples.push_back(s);
  }
}

ModelSnapshot CloudNode::retrain() {
  if (latest_.version == 0) return train_initial();
  TrainConfig cfg = cfg_;
  cfg.it_max = std::max(1, cfg_.it_max / 4);
  TrainOptions opt;
  opt.warm_start = latest_.network();
  const std::uint64_t next = latest_.version + 1;
  const auto result =
      train(training_set(), normalize(normalizer_, validation_), cfg, mix_seed(seed_, next), opt);
  latest_ = ModelSnapshot::from_network(result.best_model, normalizer_, next);
  return latest_;
}

// ---------------------------------------------------------------------------
// Event loop

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Sample:
      return "sample";
    case EventKind::Upload:
      return "upload";
    case EventKind::RetrainRequest:
      return "retrain_request";
    case EventKind::ModelPush:
      return "model_push";
  }
  return "?";
}

void EventQueue::push(std::uint64_t tick, EventKind kind, decltype(SimEvent::payload) payload) {
  q_.push(SimEvent{tick, next_seq_++, kind, std::move(payload)});
}

SimEvent EventQueue::pop() {
  SimEvent e = q_.top();
  q_.pop();
  return e;
}

namespace {

const DeviceTrace& find_device(const std::vector<DeviceTrace>& devices, const std::string& id,
                               const char* role) {
  for (const auto& d : devices)
    if (d.device_id == id) return d;
  throw ConfigError(std::string("scenario: ") + role + " device '" + id +
                    "' is not among the listed devices");
}

}  // namespace

SimReport run_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.train.validate();
  if (spec.holdout.empty()) throw ConfigError("scenario: holdout device is required");
  const DeviceTrace& held = find_device(spec.devices, spec.holdout, "holdout");
  std::string validation_id = spec.validation;
  if (validation_id.empty()) {
    for (const auto& d : spec.devices)
      if (d.device_id != spec.holdout) validation_id = d.device_id;
  }
  if (validation_id == spec.holdout)
    throw ConfigError("scenario: validation and holdout devices must differ");
  const DeviceTrace& validation = find_device(spec.devices, validation_id, "validation");
  std::vector<DeviceTrace> training;
  for (const auto& d : spec.devices)
    if (d.device_id != spec.holdout && d.device_id != validation_id) training.push_back(d);
  if (training.empty())
    throw ConfigError("scenario: need at least one training device besides holdout and validation");

  SimReport rep;
  CloudNode cloud(std::move(training), validation, spec.train, seed);
  EventQueue queue;
  const ModelSnapshot v1 = cloud.train_initial();
  rep.log.push_back({0, 0, "train", v1.version, -1, 0.0, "initial"});
  queue.push(0, EventKind::ModelPush, v1);
  ++rep.messages_down;

  const std::size_t streamed = std::min(spec.stream_samples.value_or(held.size()), held.size());
  for (std::size_t i = 0; i < streamed; ++i) queue.push(i + 1, EventKind::Sample, held.samples[i]);

  const auto t5 = detection_index(held.values());
  std::optional<EdgeNode> edge;
  int budget = spec.retrain_budget;
  std::map<std::uint64_t, std::pair<std::vector<double>, std::vector<double>>>
      by_version;  // actual, predicted
  std::optional<MaturedCheck> detection_check;

  while (!queue.empty()) {
    SimEvent ev = queue.pop();
    const std::uint64_t current = edge ? edge->model().version : 0;
    switch (ev.kind) {
      case EventKind::ModelPush: {
        auto& snap = std::get<ModelSnapshot>(ev.payload);
        const auto version = snap.version;
        bool installed = true;
        if (!edge) {
          edge.emplace(EdgeConfig{spec.holdout, spec.delta_r_t, spec.horizon, 0}, std::move(snap));
        } else {
          installed = edge->install(std::move(snap));
        }
        rep.log.push_back(
            {ev.tick, ev.seq, "model_push", version, -1, 0.0, installed ? "installed" : "stale"});
        break;
      }
      case EventKind::Sample: {
        const auto& s = std::get<Sample>(ev.payload);
        const auto idx = static_cast<std::int64_t>(s.index);
        if (!edge) {
          rep.log.push_back({ev.tick, ev.seq, "sample", 0, idx, s.delta_r, "no model"});
          break;
        }
        rep.log.push_back({ev.tick, ev.seq, "sample", current, idx, s.delta_r, ""});
        const auto res = edge->step(s);
        if (res.check) {
          ++rep.checks;
          const auto& c = *res.check;
          rep.log.push_back({ev.tick, ev.seq, "check", c.model_version, idx, std::abs(c.actual - c.predicted),
                             c.exceeded ? "exceeded" : "ok"});
          auto& [act, pred] = by_version[c.model_version];
          act.push_back(c.actual);
          pred.push_back(c.predicted);
          if (t5 && c.index == held.samples[*t5].index) detection_check = c;
        }
        if (res.prediction) ++rep.predictions;
        if (res.request) {
          ++rep.retrain_requests;
          rep.log.push_back({ev.tick, ev.seq, "retrain_request", res.request->model_version, idx,
                             res.request->error, "sent"});
          queue.push(ev.tick + spec.uplink_latency, EventKind::Upload, edge->take_upload());
          queue.push(ev.tick + spec.uplink_latency, EventKind::RetrainRequest, *res.request);
          rep.messages_up += 2;
        } else if (spec.upload_interval > 0 && edge->pending_upload() >= spec.upload_interval) {
          queue.push(ev.tick + spec.uplink_latency, EventKind::Upload, edge->take_upload());
          ++rep.messages_up;
        }
        break;
      }
      case EventKind::Upload: {
        const auto& samples = std::get<std::vector<Sample>>(ev.payload);
        cloud.receive(spec.holdout, samples);
        rep.log.push_back({ev.tick, ev.seq, "upload", current,
                           samples.empty() ? -1 : static_cast<std::int64_t>(samples.back().index),
                           static_cast<double>(samples.size()), ""});
        break;
      }
      case EventKind::RetrainRequest: {
        const auto& req = std::get<RetrainRequest>(ev.payload);
        if (budget <= 0) {
          ++rep.denied_requests;
          rep.log.push_back({ev.tick, ev.seq, "retrain_denied", req.model_version,
                             static_cast<std::int64_t>(req.index), req.error, "budget exhausted"});
          break;
        }
        --budget;
        const ModelSnapshot next = cloud.retrain();
        ++rep.retrains;
        rep.log.push_back({ev.tick, ev.seq, "train", next.version, static_cast<std::int64_t>(req.index),
                           req.error, "warm start"});
        queue.push(ev.tick + spec.train_latency + spec.downlink_latency, EventKind::ModelPush, next);
        ++rep.messages_down;
        break;
      }
    }
  }

  rep.final_version = edge ? edge->model().version : 0;
  for (std::uint64_t v = 1; v <= cloud.latest().version; ++v) {
    VersionReport vr{v, 0, std::nullopt};
    if (auto it = by_version.find(v); it != by_version.end()) {
      vr.checks = it->second.first.size();
      vr.report = make_report(it->second.first, it->second.second);
      if (detection_check && detection_check->model_version == v) {
        const std::vector<std::vector<double>> a{{detection_check->actual}}, p{{detection_check->predicted}};
        vr.report->error_at_5pct = error_at_5pct(p, a);
      }
    }
    rep.versions.push_back(std::move(vr));
  }
  if (detection_check) {
    const std::vector<std::vector<double>> a{{detection_check->actual}}, p{{detection_check->predicted}};
    rep.error_at_5pct = error_at_5pct(p, a);
  }
  return rep;
}

void write_event_log_csv(std::ostream& out, const SimReport& r) {
  out << "tick,seq,kind,model_version,index,value,note\n";
  for (const auto& row : r.log) {
    out << row.tick << ',' << row.seq << ',' << row.kind << ',' << row.model_version << ',';
    if (row.index >= 0) out << row.index;
    out << ',' << num(row.value) << ',' << row.note << '\n';
  }
}

void write_sim_summary(std::ostream& out, const SimReport& r) {
  out << "# log base: e (natural logarithm)\n";
  out << "predictions=" << r.predictions << '\n';
  out << "checks=" << r.checks << '\n';
  out << "retrain_requests=" << r.retrain_requests << '\n';
  out << "retrains=" << r.retrains << '\n';
  out << "denied_requests=" << r.denied_requests << '\n';
  out << "messages_up=" << r.messages_up << '\n';
  out << "messages_down=" << r.messages_down << '\n';
  out << "final_version=" << r.final_version << '\n';
  out << "error_at_5pct=" << (r.error_at_5pct ? num(*r.error_at_5pct) : "undefined") << '\n';
  for (const auto& v : r.versions) {
    const std::string prefix = "v" + std::to_string(v.version) + ".";
    out << prefix << "checks=" << v.checks << '\n';
    if (v.report) write_report_kv(out, *v.report, prefix);
  }
}

// ---------------------------------------------------------------------------
// Scenario files

ScenarioSpec parse_scenario(const std::string& content, const std::filesystem::path& base_dir) {
  ScenarioSpec spec;
  std::vector<std::string> device_names;
  std::filesystem::path presets_path;
  std::size_t devices_line = 0;
  for (const auto& kv : text::parse_key_values(content)) {
    auto bad = [&] { return ParseError("bad value for '" + kv.key + "'", kv.line); };
    auto number = [&](auto& out, bool allow_inf = false) {
      if (!text::parse_number(kv.value, out, allow_inf)) throw bad();
    };
    const auto& k = kv.key;
    if (k == "devices") {
      device_names = text::split(kv.value, ',');
      devices_line = kv.line;
    } else if (k == "presets") {
      presets_path = kv.value;
    } else if (k == "holdout") {
      spec.holdout = kv.value;
    } else if (k == "validation") {
      spec.validation = kv.value;
    } else if (k == "delta_r_t") {
      number(spec.delta_r_t, true);
      if (spec.delta_r_t < 0.0) throw bad();
    } else if (k == "horizon") {
      number(spec.horizon);
    } else if (k == "retrain_budget") {
      number(spec.retrain_budget);
    } else if (k == "stream_samples") {
      std::size_t s = 0;
      number(s);
      spec.stream_samples = s;
    } else if (k == "upload_interval") {
      number(spec.upload_interval);
    } else if (k == "uplink_latency") {
      number(spec.uplink_latency);
    } else if (k == "downlink_latency") {
      number(spec.downlink_latency);
    } else if (k == "train_latency") {
      number(spec.train_latency);
    } else if (k == "train.hidden") {
      number(spec.train.net.hidden);
    } else if (k == "train.ell") {
      number(spec.train.net.ell);
    } else if (k == "train.tau") {
      number(spec.train.net.tau);
    } else if (k == "train.n") {
      number(spec.train.net.n);
    } else if (k == "train.it_max") {
      number(spec.train.it_max);
    } else if (k == "train.e_th") {
      number(spec.train.e_th);
    } else if (k == "train.m") {
      number(spec.train.m);
    } else if (k == "train.lr") {
      number(spec.train.adam.lr);
    } else if (k == "train.clip_norm") {
      number(spec.train.clip_norm);
    } else {
      throw ParseError("unknown scenario key '" + k + "'", kv.line);
    }
  }
  if (device_names.empty()) throw ConfigError("scenario: 'devices' is required");
  const auto catalogue =
      presets_path.empty()
          ? default_presets()
          : load_presets(presets_path.is_absolute() ? presets_path : base_dir / presets_path);
  for (const auto& name : device_names) {
    if (name.size() > 4 && name.ends_with(".csv")) {
      const std::filesystem::path p(name);
      spec.devices.push_back(load_csv(p.is_absolute() ? p : base_dir / p));
      continue;
    }
    auto it = std::find_if(catalogue.begin(), catalogue.end(),
                           [&](const SynthParams& s) { return s.name == name; });
    if (it == catalogue.end()) throw ParseError("unknown device '" + name + "'", devices_line);
    spec.devices.push_back(synth_degradation(*it));
  }
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Aggregation

AggregationResult aggregation_experiment(std::span<const DeviceTrace> devices, std::size_t holdout,
                                         std::span<const int> m_values, int trials, const TrainConfig& cfg,
                                         std::uint64_t seed, std::size_t eval_stride) {
  if (holdout >= devices.size()) throw ConfigError("aggregation: holdout index out of range");
  if (trials < 1) throw ConfigError("aggregation: trials must be >= 1");
  if (m_values.empty()) throw ConfigError("aggregation: no m values");
  std::vector<DeviceTrace> pool;
  for (std::size_t i = 0; i < devices.size(); ++i)
    if (i != holdout) pool.push_back(devices[i]);
  for (int m : m_values) {
    if (m < 1 || static_cast<std::size_t>(m) > pool.size()) {
      throw ConfigError("aggregation: m=" + std::to_string(m) + " outside 1.." + std::to_string(pool.size()));
    }
  }
  // One normalizer for every m keeps the curve free of scaling effects.
  const Normalizer nz = fit_normalizer(pool);
  const NormalizedTrace test = normalize(nz, devices[holdout]);

  AggregationResult out;
  out.holdout = devices[holdout].device_id;
  for (int m : m_values) out.curve.push_back({m, 0.0, {}});
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(mix_seed(seed, 2 * static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    const std::uint64_t trial_seed = mix_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1);
    for (auto& point : out.curve) {
      std::vector<NormalizedTrace> train_set;
      for (int i = 0; i < point.m; ++i)
        train_set.push_back(normalize(nz, pool[order[static_cast<std::size_t>(i)]]));
      TrainConfig c = cfg;
      c.m = point.m;
      const auto result = train(train_set, test, c, trial_seed);
      point.trial_mse.push_back(evaluate_windows(result.best_model, test.values, eval_stride));
    }
  }
  for (auto& p : out.curve) {
    p.mean_mse = std::accumulate(p.trial_mse.begin(), p.trial_mse.end(), 0.0) / static_cast<double>(trials);
  }
  out.monotone = true;
  for (std::size_t i = 1; i < out.curve.size(); ++i) {
    out.monotone = out.monotone && out.curve[i].mean_mse < out.curve[i - 1].mean_mse;
  }
  return out;
}

void write_aggregation_csv(std::ostream& out, const AggregationResult& r) {
  out << "m,mean_mse,log_mean_mse,trials\n";
  for (const auto& p : r.curve) {
    out << p.m << ',' << num(p.mean_mse) << ',' << num(log_mse(p.mean_mse)) << ',' << p.trial_mse.size()
        << '\n';
  }
}

}  // namespace rdson
