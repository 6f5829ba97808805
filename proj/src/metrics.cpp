#include "rdson/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "rdson/errors.hpp"

namespace rdson {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<double> error_diff(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    throw ShapeError("error_diff: " + std::to_string(actual.size()) + " actual vs " +
                     std::to_string(predicted.size()) + " predicted values");
  }
  std::vector<double> out(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) out[i] = actual[i] - predicted[i];
  return out;
}

double mse_of(std::span<const double> actual, std::span<const double> predicted) {
  const auto d = error_diff(actual, predicted);
  if (d.empty()) throw ShapeError("mse: empty sequences");
  double s = 0.0;
  for (double v : d) s += v * v;
  return s / static_cast<double>(d.size());
}

double log_mse(double mse) {
  if (mse < 0.0 || std::isnan(mse)) throw MetricUndefinedError("log_mse: mse must be >= 0");
  if (mse == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(mse);
}

std::optional<std::size_t> detection_index(std::span<const double> actual, double threshold) {
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] >= threshold) return i;
  }
  return std::nullopt;
}

double error_at_5pct(std::span<const std::vector<double>> predicted,
                     std::span<const std::vector<double>> actual, std::span<const std::string> device_ids,
                     double threshold) {
  if (predicted.size() != actual.size() || predicted.empty()) {
    throw ShapeError("error_at_5pct: need one predicted and one actual sequence per device");
  }
  if (!(threshold > 0.0)) throw MetricUndefinedError("error_at_5pct: threshold must be positive");
  auto name = [&](std::size_t d) {
    return d < device_ids.size() ? device_ids[d] : "#" + std::to_string(d + 1);
  };
  double sum = 0.0;
  for (std::size_t d = 0; d < actual.size(); ++d) {
    const auto t5 = detection_index(actual[d], threshold);
    if (!t5) throw MetricUndefinedError("device " + name(d) + " never reaches " + fmt(threshold) + " ohm");
    if (*t5 >= predicted[d].size()) {
      throw ShapeError("error_at_5pct: no prediction for device " + name(d) + " at its detection point");
    }
    sum += std::abs(predicted[d][*t5] - threshold) / threshold;
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ShapeError("quantile of empty data");
  const double pos = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> residuals) {
  if (residuals.size() < 4) {
    throw ShapeError("box_stats: need at least 4 samples, got " + std::to_string(residuals.size()));
  }
  std::vector<double> s(residuals.begin(), residuals.end());
  std::sort(s.begin(), s.end());
  BoxStats b;
  b.q1 = quantile_sorted(s, 0.25);
  b.median = quantile_sorted(s, 0.5);
  b.q3 = quantile_sorted(s, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  for (double v : s) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
    } else {
      b.whisker_lo = std::min(b.whisker_lo, v);
      b.whisker_hi = std::max(b.whisker_hi, v);
    }
  }
  return b;
}

ErrorReport make_report(std::span<const double> actual, std::span<const double> predicted,
                        std::optional<double> normalized_scale) {
  ErrorReport r;
  r.error_diff = error_diff(actual, predicted);
  r.mse = mse_of(actual, predicted);
  r.log_mse = log_mse(r.mse);
  for (double d : r.error_diff) r.max_abs_error_ohms = std::max(r.max_abs_error_ohms, std::abs(d));
  if (normalized_scale) {
    r.mse_normalized = r.mse * *normalized_scale * *normalized_scale;
    r.max_abs_error_normalized = r.max_abs_error_ohms * *normalized_scale;
  }
  if (r.error_diff.size() >= 4) r.box = box_stats(r.error_diff);
  return r;
}

void write_report_kv(std::ostream& out, const ErrorReport& r, const std::string& prefix) {
  if (prefix.empty()) out << "# log base: e (natural logarithm)\n";
  auto kv = [&](const std::string& k, const std::string& v) { out << prefix << k << '=' << v << '\n'; };
  kv("samples", std::to_string(r.error_diff.size()));
  kv("mse", fmt(r.mse));
  kv("log_mse", fmt(r.log_mse));
  if (r.mse_normalized) {
    kv("mse_normalized", fmt(*r.mse_normalized));
    kv("log_mse_normalized", fmt(log_mse(*r.mse_normalized)));
  }
  kv("max_abs_error_ohms", fmt(r.max_abs_error_ohms));
  // A residual of 0.009 ohm reads as 0.9 %.
  kv("max_abs_error_pct", fmt(100.0 * r.max_abs_error_ohms));
  if (r.max_abs_error_normalized) kv("max_abs_error_normalized", fmt(*r.max_abs_error_normalized));
  kv("box_median", fmt(r.box.median));
  kv("box_q1", fmt(r.box.q1));
  kv("box_q3", fmt(r.box.q3));
  kv("box_whisker_lo", fmt(r.box.whisker_lo));
  kv("box_whisker_hi", fmt(r.box.whisker_hi));
  kv("box_outliers", std::to_string(r.box.outliers.size()));
  kv("error_at_5pct", r.error_at_5pct ? fmt(*r.error_at_5pct) : "undefined");
}

void write_report_csv(std::ostream& out, const ErrorReport& r) {
  out << "position,error_diff_ohms\n";
  for (std::size_t i = 0; i < r.error_diff.size(); ++i) out << i << ',' << fmt(r.error_diff[i]) << '\n';
}

}  // namespace rdson
