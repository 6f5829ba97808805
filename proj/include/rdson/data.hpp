#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rdson {

struct Sample {
  std::uint64_t index = 0;
  double delta_r = 0.0;  // ohms

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// One device's on-resistance drift series. Indices strictly increase and
/// drift values are non-negative.
struct DeviceTrace {
  std::string device_id;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<double> values() const;

  /// Throws DataError if an invariant is violated.
  void validate() const;

  friend bool operator==(const DeviceTrace&, const DeviceTrace&) = default;
};

/// Reads a two-column `index,delta_r_ohms` CSV. The device id defaults to the
/// file stem.
DeviceTrace load_csv(const std::filesystem::path& path, std::string device_id = {});
void save_csv(const DeviceTrace& trace, const std::filesystem::path& path);
DeviceTrace parse_csv(const std::string& text, std::string device_id);
std::string format_csv(const DeviceTrace& trace);

// ---------------------------------------------------------------------------
// Synthetic degradation: dR(t) = a t + b (exp(c t) - 1) + noise, clamped at 0.

struct SynthParams {
  std::string name;
  double linear_rate = 0.0;  // a, ohm / sample
  double exp_scale = 0.0;    // b, ohm
  double exp_rate = 0.0;     // c, 1 / sample
  double noise_sigma = 0.0;  // ohm
  std::size_t length = 0;    // samples
  std::uint64_t seed = 0;

  void validate(std::size_t min_length = 0) const;
};

DeviceTrace synth_degradation(const SynthParams& p);

/// Five built-in device presets; every one crosses 0.05 ohm before its end.
std::vector<SynthParams> default_presets();

/// Preset catalogue: blocks of `key=value` lines, one block per preset,
/// each block opened by `[name]`. Blank lines and `#` comments are ignored.
std::vector<SynthParams> parse_presets(const std::string& text);
std::string format_presets(std::span<const SynthParams> presets);
std::vector<SynthParams> load_presets(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Normalization to the network's [-1, 1] range.

struct Normalizer {
  double r_min = 0.0;
  double r_max = 1.0;

  double normalize(double ohms) const { return 2.0 * (ohms - r_min) / (r_max - r_min) - 1.0; }
  double denormalize(double v) const { return r_min + (v + 1.0) * 0.5 * (r_max - r_min); }

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

struct NormalizedTrace {
  std::string device_id;
  std::vector<double> values;
  bool extrapolated = false;  ///< some value fell outside [-1, 1]
};

/// Fits over the union of `traces`; throws DegenerateRangeError if flat.
Normalizer fit_normalizer(std::span<const DeviceTrace> traces);
NormalizedTrace normalize(const Normalizer& nz, const DeviceTrace& trace);
std::vector<double> normalize(const Normalizer& nz, std::span<const double> ohms);
std::vector<double> denormalize(const Normalizer& nz, std::span<const double> values);

}  // namespace rdson
