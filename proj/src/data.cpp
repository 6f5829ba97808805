#include "rdson/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "rdson/errors.hpp"
#include "text.hpp"

namespace rdson {

namespace {

constexpr const char* kCsvHeader = "index,delta_r_ohms";

using text::parse_number;
using text::trim;

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace

std::vector<double> DeviceTrace::values() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.delta_r);
  return v;
}

void DeviceTrace::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].delta_r) || samples[i].delta_r < 0.0) {
      throw DataError(device_id + ": sample " + std::to_string(i) + " has invalid drift value");
    }
    if (i > 0 && samples[i].index <= samples[i - 1].index) {
      throw DataError(device_id + ": non-monotonic index at sample " + std::to_string(i));
    }
  }
}

DeviceTrace parse_csv(const std::string& text, std::string device_id) {
  DeviceTrace trace{std::move(device_id), {}};
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (!header_seen) {
      if (row.empty()) continue;
      if (row != kCsvHeader) throw ParseError("expected header \"" + std::string(kCsvHeader) + "\"", line_no);
      header_seen = true;
      continue;
    }
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
      throw ParseError("expected two comma-separated columns", line_no);
    }
    Sample s;
    if (!parse_number(trim(row.substr(0, comma)), s.index)) throw ParseError("malformed index", line_no);
    if (!parse_number(trim(row.substr(comma + 1)), s.delta_r))
      throw ParseError("malformed delta_r value", line_no);
    if (s.delta_r < 0.0) throw ParseError("negative delta_r value", line_no);
    if (!trace.samples.empty() && s.index <= trace.samples.back().index) {
      throw ParseError("non-monotonic index", line_no);
    }
    trace.samples.push_back(s);
  }
  if (trace.samples.empty())
    throw DataError("empty trace" + (trace.device_id.empty() ? "" : ": " + trace.device_id));
  return trace;
}

std::string format_csv(const DeviceTrace& trace) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& s : trace.samples) {
    out += std::to_string(s.index);
    out += ',';
    out += format_double(s.delta_r, 12);
    out += '\n';
  }
  return out;
}

DeviceTrace load_csv(const std::filesystem::path& path, std::string device_id) {
  if (!std::filesystem::exists(path)) throw DataError("no such file: " + path.string());
  if (device_id.empty()) device_id = path.stem().string();
  return parse_csv(read_file(path), std::move(device_id));
}

void save_csv(const DeviceTrace& trace, const std::filesystem::path& path) {
  trace.validate();
  write_file(path, format_csv(trace));
}

// ---------------------------------------------------------------------------

void SynthParams::validate(std::size_t min_length) const {
  for (double v : {linear_rate, exp_scale, exp_rate, noise_sigma}) {
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("synth preset " + name + ": parameters must be non-negative");
  }
  if (length == 0 || length < min_length) {
    throw ConfigError("synth preset " + name + ": length " + std::to_string(length) + " < required " +
                      std::to_string(std::max<std::size_t>(min_length, 1)));
  }
}

DeviceTrace synth_degradation(const SynthParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  DeviceTrace trace{p.name, {}};
  trace.samples.reserve(p.length);
  for (std::size_t t = 0; t < p.length; ++t) {
    const double td = static_cast<double>(t);
    double v = p.linear_rate * td + p.exp_scale * std::expm1(p.exp_rate * td);
    // Always draw so the noise stream does not depend on noise_sigma.
    v += p.noise_sigma * noise(rng);
    trace.samples.push_back({t, std::max(v, 0.0)});
  }
  return trace;
}

std::vector<SynthParams> default_presets() {
  // Near-linear early drift with an exponential knee, crossing 0.05 ohm at
  // roughly 60-85% of the trace.
  return {
      {"device_1", 6.0e-5, 2.0e-3, 0.0100, 3.0e-4, 400, 101},
      {"device_2", 4.0e-5, 1.5e-3, 0.0115, 3.0e-4, 400, 202},
      {"device_3", 8.0e-5, 2.5e-3, 0.0090, 3.0e-4, 400, 303},
      {"device_4", 5.0e-5, 3.0e-3, 0.0095, 3.0e-4, 400, 404},
      {"device_5", 7.0e-5, 1.0e-3, 0.0120, 3.0e-4, 400, 505},
  };
}

std::vector<SynthParams> parse_presets(const std::string& text) {
  std::vector<SynthParams> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string row = trim(line);
    if (row.empty() || row[0] == '#') continue;
    if (row.front() == '[') {
      if (row.back() != ']' || row.size() < 3) throw ParseError("malformed preset header", line_no);
      out.push_back(SynthParams{row.substr(1, row.size() - 2)});
      continue;
    }
    const auto eq = row.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    if (out.empty()) throw ParseError("key outside a [preset] block", line_no);
    const std::string key = trim(row.substr(0, eq));
    const std::string val = trim(row.substr(eq + 1));
    auto& p = out.back();
    bool ok = true;
    if (key == "linear_rate")
      ok = parse_number(val, p.linear_rate);
    else if (key == "exp_scale")
      ok = parse_number(val, p.exp_scale);
    else if (key == "exp_rate")
      ok = parse_number(val, p.exp_rate);
    else if (key == "noise_sigma")
      ok = parse_number(val, p.noise_sigma);
    else if (key == "length")
      ok = parse_number(val, p.length);
    else if (key == "seed")
      ok = parse_number(val, p.seed);
    else
      throw ParseError("unknown preset key '" + key + "'", line_no);
    if (!ok) throw ParseError("bad value for '" + key + "'", line_no);
  }
  for (const auto& p : out) p.validate();
  return out;
}

std::string format_presets(std::span<const SynthParams> presets) {
  std::string out;
  for (const auto& p : presets) {
    out += "[" + p.name + "]\n";
    out += "linear_rate=" + format_double(p.linear_rate, 17) + "\n";
    out += "exp_scale=" + format_double(p.exp_scale, 17) + "\n";
    out += "exp_rate=" + format_double(p.exp_rate, 17) + "\n";
    out += "noise_sigma=" + format_double(p.noise_sigma, 17) + "\n";
    out += "length=" + std::to_string(p.length) + "\n";
    out += "seed=" + std::to_string(p.seed) + "\n\n";
  }
  return out;
}

std::vector<SynthParams> load_presets(const std::filesystem::path& path) {
  return parse_presets(read_file(path));
}

// ---------------------------------------------------------------------------

Normalizer fit_normalizer(std::span<const DeviceTrace> traces) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& t : traces) {
    for (const auto& s : t.samples) {
      lo = std::min(lo, s.delta_r);
      hi = std::max(hi, s.delta_r);
    }
  }
  if (!(hi > lo)) throw DegenerateRangeError("cannot fit normalizer: value range is empty or constant");
  return {lo, hi};
}

NormalizedTrace normalize(const Normalizer& nz, const DeviceTrace& trace) {
  NormalizedTrace out{trace.device_id, {}, false};
  out.values.reserve(trace.size());
  for (const auto& s : trace.samples) {
    const double v = nz.normalize(s.delta_r);
    out.extrapolated = out.extrapolated || v < -1.0 || v > 1.0;
    out.values.push_back(v);
  }
  return out;
}

std::vector<double> normalize(const Normalizer& nz, std::span<const double> ohms) {
  std::vector<double> out;
  out.reserve(ohms.size());
  for (double v : ohms) out.push_back(nz.normalize(v));
  return out;
}

std::vector<double> denormalize(const Normalizer& nz, std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(nz.denormalize(v));
  return out;
}

}  // namespace rdson
