#pragma once

// Command-line front end. Settings are resolved from three layers, lowest
// first: built-in defaults (network and training defaults, or the desk
// profile when `profile = desk`), the `--config` file, then flags.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdson/baselines.hpp"
#include "rdson/data.hpp"
#include "rdson/edgecloud.hpp"
#include "rdson/snapshot.hpp"
#include "rdson/training.hpp"

namespace rdson::cli {

struct RunConfig {
  std::string profile = "default";  ///< "default" or "desk"
  TrainConfig train;
  std::filesystem::path presets;     ///< empty = built-in catalogue
  std::vector<std::string> devices;  ///< preset names or CSV paths; empty = every preset
  std::string holdout;
  std::optional<std::size_t> synth_length;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";

  std::filesystem::path model;
  std::string trace;  ///< preset name or CSV path
  std::size_t horizon = 104;
  std::size_t eval_stride = 5;

  std::uint64_t particle_seed = 7;
  std::size_t particles = 1000;

  std::filesystem::path scenario;  ///< simulate: scenario file replacing the settings below
  double delta_r_t = 0.005;
  int retrain_budget = 3;
  std::optional<std::size_t> stream_samples;

  std::vector<int> m_values{1, 2, 3, 4};
  int trials = 20;
};

enum class Source { Default, ConfigFile, Flag };

const char* to_string(Source s);

/// One `key = value` setting and where it came from.
struct Setting {
  std::string key;
  std::string value;
  Source source = Source::Default;
};

struct ResolvedConfig {
  RunConfig config;
  /// Every key with its effective value, sorted by key.
  std::vector<Setting> effective;
};

/// Keys accepted in config files and by `--set`.
std::vector<std::string> known_keys();

/// Applies file settings, then flag settings, over the defaults. Throws
/// ParseError for unknown keys or malformed values.
ResolvedConfig resolve(std::span<const Setting> file_settings, std::span<const Setting> flag_settings);

/// Reads a config file into settings tagged Source::ConfigFile.
std::vector<Setting> read_config_file(const std::filesystem::path& path);

/// Named presets are synthesized (honouring `synth_length`); other entries
/// are loaded as CSV files.
std::vector<DeviceTrace> resolve_devices(const RunConfig& cfg);
DeviceTrace resolve_trace(const RunConfig& cfg, const std::string& name);

struct HoldoutRun {
  TrainResult result;
  Normalizer normalizer;
};

/// Trains on every device except `holdout`, normalized over the training
/// devices only, checkpointing on the held-out device.
HoldoutRun train_holdout(std::span<const DeviceTrace> devices, std::size_t holdout, const TrainConfig& cfg,
                         std::uint64_t seed);

/// Leave-one-out comparison of the LSTM (trained with seed mix_seed(seed, h)
/// for holdout h) against the Kalman and particle-filter baselines.
ComparisonTable compare_leave_one_out(std::span<const DeviceTrace> devices, const TrainConfig& cfg,
                                      std::uint64_t seed, std::size_t horizon, std::uint64_t particle_seed,
                                      std::size_t particles = 1000);

/// Exit codes: 0 success, 1 runtime or data error, 2 usage error.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace rdson::cli
