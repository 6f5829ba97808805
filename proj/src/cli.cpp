#include "rdson/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "rdson/errors.hpp"
#include "rdson/metrics.hpp"
#include "text.hpp"

namespace rdson::cli {

namespace {

/// Missing or contradictory command-line input; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T>
std::string fmt_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return fmt(v);
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
    return v.string();
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, std::optional<std::size_t>>) {
    return v ? std::to_string(*v) : "";
  } else {
    std::string s;
    for (const auto& item : v) s += (s.empty() ? "" : ",") + fmt_value(item);
    return s;
  }
}

template <typename T>
bool parse_value(const std::string& s, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (s == "true" || s == "1") return out = true, true;
    if (s == "false" || s == "0") return out = false, true;
    return false;
  } else if constexpr (std::is_arithmetic_v<T>) {
    return text::parse_number(s, out, std::is_floating_point_v<T>);
  } else if constexpr (std::is_same_v<T, std::filesystem::path> || std::is_same_v<T, std::string>) {
    out = s;
    return true;
  } else if constexpr (std::is_same_v<T, std::optional<std::size_t>>) {
    if (s.empty()) return out.reset(), true;
    std::size_t v = 0;
    if (!text::parse_number(s, v)) return false;
    out = v;
    return true;
  } else {
    T items;
    for (const auto& part : text::split(s, ',')) {
      typename T::value_type item{};
      if (!parse_value(part, item)) return false;
      items.push_back(item);
    }
    out = std::move(items);
    return true;
  }
}

struct KeySpec {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<bool(RunConfig&, const std::string&)> set;
};

template <typename Field>
KeySpec key(std::string name, Field field) {
  return {std::move(name),
          [field](const RunConfig& c) { return fmt_value(field(const_cast<RunConfig&>(c))); },
          [field](RunConfig& c, const std::string& v) { return parse_value(v, field(c)); }};
}

#define RDSON_FIELD(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table{
      {"profile", [](const RunConfig& c) { return c.profile; },
       [](RunConfig& c, const std::string& v) {
         c.profile = v;
         return v == "default" || v == "desk";
       }},
      key("seed", RDSON_FIELD(seed)),
      key("out", RDSON_FIELD(out_dir)),
      key("presets", RDSON_FIELD(presets)),
      key("devices", RDSON_FIELD(devices)),
      key("holdout", RDSON_FIELD(holdout)),
      key("synth.length", RDSON_FIELD(synth_length)),
      key("train.hidden", RDSON_FIELD(train.net.hidden)),
      key("train.ell", RDSON_FIELD(train.net.ell)),
      key("train.tau", RDSON_FIELD(train.net.tau)),
      key("train.n", RDSON_FIELD(train.net.n)),
      key("train.learn_initial_state", RDSON_FIELD(train.net.learn_initial_state)),
      key("train.it_max", RDSON_FIELD(train.it_max)),
      key("train.e_th", RDSON_FIELD(train.e_th)),
      key("train.m", RDSON_FIELD(train.m)),
      key("train.lr", RDSON_FIELD(train.adam.lr)),
      key("train.beta1", RDSON_FIELD(train.adam.beta1)),
      key("train.beta2", RDSON_FIELD(train.adam.beta2)),
      key("train.epsilon", RDSON_FIELD(train.adam.epsilon)),
      key("train.clip_norm", RDSON_FIELD(train.clip_norm)),
      key("model", RDSON_FIELD(model)),
      key("trace", RDSON_FIELD(trace)),
      key("horizon", RDSON_FIELD(horizon)),
      key("eval_stride", RDSON_FIELD(eval_stride)),
      key("particle.seed", RDSON_FIELD(particle_seed)),
      key("particle.count", RDSON_FIELD(particles)),
      key("scenario", RDSON_FIELD(scenario)),
      key("delta_r_t", RDSON_FIELD(delta_r_t)),
      key("retrain_budget", RDSON_FIELD(retrain_budget)),
      key("stream_samples", RDSON_FIELD(stream_samples)),
      key("aggregate.m_values", RDSON_FIELD(m_values)),
      key("aggregate.trials", RDSON_FIELD(trials)),
  };
  return table;
}

#undef RDSON_FIELD

const KeySpec* find_key(const std::string& k) {
  const auto& t = key_table();
  auto it = std::find_if(t.begin(), t.end(), [&](const KeySpec& s) { return s.key == k; });
  return it == t.end() ? nullptr : &*it;
}

std::size_t device_index(std::span<const DeviceTrace> devices, const std::string& id) {
  for (std::size_t i = 0; i < devices.size(); ++i)
    if (devices[i].device_id == id) return i;
  throw ConfigError("device '" + id + "' is not among the configured devices");
}

std::size_t require_holdout(const RunConfig& cfg, std::span<const DeviceTrace> devices) {
  if (cfg.holdout.empty()) throw UsageError("--holdout is required");
  return device_index(devices, cfg.holdout);
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const auto path = cfg.out_dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  return cfg.out_dir / name;
}

/// Writes `text` to out_dir/name and echoes it.
void emit_summary(const RunConfig& cfg, const std::string& name, const std::string& text, std::ostream& out) {
  auto f = open_output(cfg, name);
  f << text;
  out << text;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  auto presets = cfg.presets.empty() ? default_presets() : load_presets(cfg.presets);
  const auto min_length = static_cast<std::size_t>(cfg.train.net.window());
  for (auto& p : presets) {
    if (cfg.synth_length) p.length = *cfg.synth_length;
    p.validate(min_length);
  }
  for (const auto& p : presets) {
    const auto path = out_path(cfg, p.name + ".csv");
    save_csv(synth_degradation(p), path);
    out << "wrote " << path.string() << " (" << p.length << " samples)\n";
  }
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto devices = resolve_devices(cfg);
  const std::size_t h = require_holdout(cfg, devices);
  if (devices.size() < 2) throw ConfigError("train needs at least two devices");
  if (cfg.train.it_max == 0) err << "warning: it_max=0, writing the initial model untrained\n";
  const auto run = train_holdout(devices, h, cfg.train, cfg.seed);
  save_model(ModelSnapshot::from_network(run.result.best_model, run.normalizer, 1),
             out_path(cfg, "model.drce"));
  auto history = open_output(cfg, "history.csv");
  write_history_csv(history, run.result.history);

  std::ostringstream s;
  s << "holdout=" << cfg.holdout << "\n";
  s << "iterations=" << run.result.history.size() << "\n";
  if (!run.result.history.empty()) {
    const auto& last = run.result.history.back();
    s << "final_train_mse=" << fmt(last.train_mse) << "\nfinal_train_log_mse=" << fmt(log_mse(last.train_mse))
      << "\nfinal_test_mse=" << fmt(last.test_mse) << "\nfinal_test_log_mse=" << fmt(log_mse(last.test_mse))
      << "\n";
    s << "best_iteration=" << run.result.best_iteration << "\nbest_test_mse=" << fmt(run.result.best_test_mse)
      << "\nbest_test_log_mse=" << fmt(log_mse(run.result.best_test_mse)) << "\n";
  }
  emit_summary(cfg, "train_summary.txt", s.str(), out);
  return 0;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  if (cfg.model.empty()) throw UsageError("--model is required");
  if (cfg.trace.empty()) throw UsageError("--trace is required");
  const auto model = load_model(cfg.model);
  const auto trace = resolve_trace(cfg, cfg.trace);
  const auto recent = normalize(model.normalizer, trace.values());
  const auto pred = denormalize(model.normalizer, forecast(model.network(), recent, cfg.horizon));
  auto f = open_output(cfg, "predictions.csv");
  f << "index,predicted_delta_r_ohms\n";
  const std::uint64_t last = trace.samples.back().index;
  char buf[64];
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%llu,%.10g\n", static_cast<unsigned long long>(last + 1 + i), pred[i]);
    f << buf;
  }
  out << "wrote " << pred.size() << " predictions to " << (cfg.out_dir / "predictions.csv").string() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.model.empty()) throw UsageError("--model is required");
  const std::string name = !cfg.trace.empty() ? cfg.trace : cfg.holdout;
  if (name.empty()) throw UsageError("--trace or --holdout is required");
  const auto model = load_model(cfg.model);
  const auto net = model.network();
  const auto trace = resolve_trace(cfg, name);
  const auto ohms = trace.values();
  const auto z = normalize(model.normalizer, ohms);
  const auto tau = static_cast<std::size_t>(model.config.tau);
  const auto n = static_cast<std::size_t>(model.config.n);
  if (z.size() < tau + n)
    throw InsufficientDataError("trace " + trace.device_id + " is shorter than one window");
  const auto stride = std::max<std::size_t>(cfg.eval_stride, 1);

  std::vector<double> actual, predicted;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + tau + n <= z.size(); s += stride) starts.push_back(s);
  if (starts.back() != z.size() - tau - n) starts.push_back(z.size() - tau - n);
  for (auto s : starts) {
    const auto p =
        denormalize(model.normalizer, forecast(net, std::span<const double>(z).subspan(s, tau), n));
    actual.insert(actual.end(), ohms.begin() + static_cast<std::ptrdiff_t>(s + tau),
                  ohms.begin() + static_cast<std::ptrdiff_t>(s + tau + n));
    predicted.insert(predicted.end(), p.begin(), p.end());
  }
  auto report = make_report(actual, predicted, 2.0 / (model.normalizer.r_max - model.normalizer.r_min));

  // Detection-point error: one forecast whose last step lands on t5.
  std::string note;
  if (const auto t5 = detection_index(ohms); !t5) {
    note = "trace never reaches the detection threshold";
  } else if (*t5 + 1 < cfg.horizon + tau) {
    note = "detection point too early for horizon " + std::to_string(cfg.horizon);
  } else {
    const std::size_t prefix = *t5 + 1 - cfg.horizon;
    auto seq = ohms;
    const auto p =
        denormalize(model.normalizer, forecast(net, std::span<const double>(z).first(prefix), cfg.horizon));
    std::copy(p.begin(), p.end(), seq.begin() + static_cast<std::ptrdiff_t>(prefix));
    const std::vector<std::vector<double>> pv{seq}, av{ohms};
    report.error_at_5pct = error_at_5pct(pv, av);
  }

  auto residuals = open_output(cfg, "error_diff.csv");
  write_report_csv(residuals, report);
  std::ostringstream s;
  s << "trace=" << trace.device_id << "\nmodel_version=" << model.version << "\nwindows=" << starts.size()
    << "\n";
  write_report_kv(s, report);
  if (!note.empty()) s << "# error_at_5pct: " << note << "\n";
  emit_summary(cfg, "evaluation.txt", s.str(), out);
  return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const auto devices = resolve_devices(cfg);
  const auto table =
      compare_leave_one_out(devices, cfg.train, cfg.seed, cfg.horizon, cfg.particle_seed, cfg.particles);
  auto csv = open_output(cfg, "comparison.csv");
  write_comparison_csv(csv, table);
  std::ostringstream s;
  write_comparison_text(s, table);
  emit_summary(cfg, "comparison.txt", s.str(), out);
  return 0;
}

ScenarioSpec scenario_from(const RunConfig& cfg) {
  if (!cfg.scenario.empty()) return load_scenario(cfg.scenario);
  ScenarioSpec spec;
  spec.devices = resolve_devices(cfg);
  if (cfg.holdout.empty()) throw UsageError("--holdout or --scenario is required");
  spec.holdout = cfg.holdout;
  spec.delta_r_t = cfg.delta_r_t;
  spec.horizon = cfg.horizon;
  spec.retrain_budget = cfg.retrain_budget;
  spec.stream_samples = cfg.stream_samples;
  spec.train = cfg.train;
  return spec;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto report = run_scenario(scenario_from(cfg), cfg.seed);
  auto events = open_output(cfg, "events.csv");
  write_event_log_csv(events, report);
  std::ostringstream s;
  write_sim_summary(s, report);
  emit_summary(cfg, "simulation.txt", s.str(), out);
  return 0;
}

int cmd_aggregate(const RunConfig& cfg, std::ostream& out) {
  const auto devices = resolve_devices(cfg);
  const std::size_t h = cfg.holdout.empty() ? devices.size() - 1 : device_index(devices, cfg.holdout);
  const auto result =
      aggregation_experiment(devices, h, cfg.m_values, cfg.trials, cfg.train, cfg.seed, cfg.eval_stride);
  auto csv = open_output(cfg, "aggregation.csv");
  write_aggregation_csv(csv, result);
  std::ostringstream s;
  s << "holdout=" << result.holdout << "\ntrials=" << cfg.trials << "\n";
  for (const auto& p : result.curve) s << "m" << p.m << "_mean_mse=" << fmt(p.mean_mse) << "\n";
  s << "monotone=" << (result.monotone ? "true" : "false") << "\n";
  emit_summary(cfg, "aggregation.txt", s.str(), out);
  return 0;
}

}  // namespace

const char* to_string(Source s) {
  switch (s) {
    case Source::Default:
      return "default";
    case Source::ConfigFile:
      return "config";
    case Source::Flag:
      return "flag";
  }
  return "?";
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.push_back(k.key);
  return out;
}

ResolvedConfig resolve(std::span<const Setting> file_settings, std::span<const Setting> flag_settings) {
  std::map<std::string, Setting> merged;
  for (auto layer : {file_settings, flag_settings}) {
    for (const auto& s : layer) {
      if (!find_key(s.key)) throw ParseError("unknown setting '" + s.key + "'", 0);
      merged[s.key] = s;
    }
  }
  ResolvedConfig r;
  auto apply = [&](const KeySpec& spec) {
    auto it = merged.find(spec.key);
    if (it == merged.end()) return;
    if (!spec.set(r.config, it->second.value)) {
      throw ConfigError("bad value for '" + spec.key + "': '" + it->second.value + "' (" +
                        to_string(it->second.source) + ")");
    }
  };
  // The profile replaces the whole training block, so it goes first.
  apply(key_table().front());
  if (r.config.profile == "desk") r.config.train = desk_profile();
  for (std::size_t i = 1; i < key_table().size(); ++i) apply(key_table()[i]);
  for (const auto& spec : key_table()) {
    auto it = merged.find(spec.key);
    r.effective.push_back(
        {spec.key, spec.get(r.config), it == merged.end() ? Source::Default : it->second.source});
  }
  return r;
}

std::vector<Setting> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<Setting> out;
  try {
    for (auto& kv : text::parse_key_values(ss.str())) {
      if (!find_key(kv.key)) throw ParseError("unknown setting '" + kv.key + "'", kv.line);
      out.push_back({kv.key, kv.value, Source::ConfigFile});
    }
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return out;
}

DeviceTrace resolve_trace(const RunConfig& cfg, const std::string& name) {
  if (name.size() > 4 && name.ends_with(".csv")) return load_csv(name);
  const auto catalogue = cfg.presets.empty() ? default_presets() : load_presets(cfg.presets);
  for (auto p : catalogue) {
    if (p.name != name) continue;
    if (cfg.synth_length) p.length = *cfg.synth_length;
    return synth_degradation(p);
  }
  throw ConfigError("unknown device '" + name + "' (not a preset and not a .csv path)");
}

std::vector<DeviceTrace> resolve_devices(const RunConfig& cfg) {
  std::vector<std::string> names = cfg.devices;
  if (names.empty()) {
    for (const auto& p : cfg.presets.empty() ? default_presets() : load_presets(cfg.presets))
      names.push_back(p.name);
  }
  std::vector<DeviceTrace> out;
  for (const auto& n : names) out.push_back(resolve_trace(cfg, n));
  return out;
}

HoldoutRun train_holdout(std::span<const DeviceTrace> devices, std::size_t holdout, const TrainConfig& cfg,
                         std::uint64_t seed) {
  if (holdout >= devices.size()) throw ConfigError("holdout index out of range");
  std::vector<DeviceTrace> fit;
  for (std::size_t i = 0; i < devices.size(); ++i)
    if (i != holdout) fit.push_back(devices[i]);
  const Normalizer nz = fit_normalizer(fit);
  std::vector<NormalizedTrace> training;
  for (const auto& d : fit) training.push_back(normalize(nz, d));
  TrainConfig c = cfg;
  c.m = std::min<int>(c.m, static_cast<int>(training.size()));
  return {train(training, normalize(nz, devices[holdout]), c, seed), nz};
}

ComparisonTable compare_leave_one_out(std::span<const DeviceTrace> devices, const TrainConfig& cfg,
                                      std::uint64_t seed, std::size_t horizon, std::uint64_t particle_seed,
                                      std::size_t particles) {
  std::vector<ComparisonScenario> scenarios;
  std::map<std::string, HoldoutRun> models;
  for (std::size_t h = 0; h < devices.size(); ++h) {
    models.emplace(devices[h].device_id, train_holdout(devices, h, cfg, mix_seed(seed, h)));
    scenarios.push_back({devices[h].device_id, devices[h].values()});
  }
  ParticleParams pp;
  pp.particles = particles;
  const std::vector<Method> methods{
      {"lstm",
       [&models](const std::string& device, std::span<const double> prefix, std::size_t n) {
         const auto& m = models.at(device);
         return denormalize(m.normalizer, forecast(m.result.best_model, normalize(m.normalizer, prefix), n));
       }},
      {"kalman", [](const std::string&, std::span<const double> prefix,
                    std::size_t n) { return kalman_predict(prefix, n); }},
      {"particle",
       [particle_seed, pp](const std::string&, std::span<const double> prefix, std::size_t n) {
         return particle_predict(prefix, n, particle_seed, pp);
       }},
  };
  return compare(methods, scenarios, horizon);
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Degradation forecasting toolkit for power MOSFET on-resistance drift", "rdson"};
  app.require_subcommand(1);
  app.fallthrough();

  std::vector<Setting> flags;
  std::string config_path;
  bool verbose = false;
  auto flag = [&flags](CLI::App* a, const std::string& name, const std::string& k, const std::string& desc) {
    a->add_option_function<std::string>(
        name, [&flags, k](const std::string& v) { flags.push_back({k, v, Source::Flag}); }, desc);
  };
  app.add_option("--config", config_path, "key = value settings file");
  app.add_flag("--verbose,-v", verbose, "print every resolved setting and its source");
  app.add_option_function<std::vector<std::string>>(
      "--set",
      [&flags](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected KEY=VALUE, got " + item);
          flags.push_back({text::trim(item.substr(0, eq)), text::trim(item.substr(eq + 1)), Source::Flag});
        }
      },
      "override any setting, KEY=VALUE (repeatable)");
  flag(&app, "--seed", "seed", "random seed");
  flag(&app, "--out", "out", "output directory");
  flag(&app, "--profile", "profile", "training defaults: default or desk");
  flag(&app, "--presets", "presets", "preset catalogue file");
  flag(&app, "--devices", "devices", "comma-separated preset names or CSV paths");
  flag(&app, "--holdout", "holdout", "held-out device");
  flag(&app, "--hidden", "train.hidden", "hidden width");
  flag(&app, "--ell", "train.ell", "stacked layers");
  flag(&app, "--it-max", "train.it_max", "iteration budget");
  flag(&app, "--lr", "train.lr", "Adam step size");

  auto* synth = app.add_subcommand("synth", "write the preset device traces as CSV");
  flag(synth, "--length", "synth.length", "override every preset's length");
  auto* train_cmd = app.add_subcommand("train", "train with one held-out device");
  auto* predict = app.add_subcommand("predict", "forecast past the end of a trace");
  flag(predict, "--model", "model", "model file");
  flag(predict, "--trace", "trace", "CSV path or preset name");
  flag(predict, "--horizon", "horizon", "steps to forecast");
  auto* evaluate = app.add_subcommand("evaluate", "score a model on a trace");
  flag(evaluate, "--model", "model", "model file");
  flag(evaluate, "--trace", "trace", "CSV path or preset name");
  flag(evaluate, "--horizon", "horizon", "horizon for the detection-point error");
  auto* compare_cmd =
      app.add_subcommand("compare", "leave-one-out comparison against Kalman and particle filters");
  flag(compare_cmd, "--horizon", "horizon", "forecast horizon ending at the detection point");
  auto* simulate = app.add_subcommand("simulate", "run the edge/cloud scenario");
  flag(simulate, "--scenario", "scenario", "scenario file");
  flag(simulate, "--delta-r-t", "delta_r_t", "retrain threshold, ohms (inf disables)");
  flag(simulate, "--retrain-budget", "retrain_budget", "maximum retrains");
  auto* aggregate = app.add_subcommand("aggregate", "held-out error against the number of training devices");
  flag(aggregate, "--m-values", "aggregate.m_values", "comma-separated device counts");
  flag(aggregate, "--trials", "aggregate.trials", "trials per m");

  std::vector<const char*> argv{"rdson"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  ResolvedConfig resolved;
  try {
    resolve({}, flags);  // flag values alone: a failure here is a usage error
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    resolved = resolve(config_path.empty() ? std::vector<Setting>{} : read_config_file(config_path), flags);
    if (verbose) {
      for (const auto& s : resolved.effective)
        err << s.key << " = " << s.value << "  [" << to_string(s.source) << "]\n";
    }
    const auto& cfg = resolved.config;
    if (synth->parsed()) return cmd_synth(cfg, out);
    if (train_cmd->parsed()) return cmd_train(cfg, out, err);
    if (predict->parsed()) return cmd_predict(cfg, out);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out);
    if (compare_cmd->parsed()) return cmd_compare(cfg, out);
    if (simulate->parsed()) return cmd_simulate(cfg, out);
    if (aggregate->parsed()) return cmd_aggregate(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace rdson::cli
