#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdson {

/// Detection threshold for the miss-prediction metric, in ohms.
inline constexpr double kDetectionThreshold = 0.05;

/// Box-whisker summary. Quartiles use linear interpolation between closest
/// ranks; whiskers sit at the furthest datum within 1.5 IQR of the box.
struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;
  double whisker_hi = 0.0;
  std::vector<double> outliers;
};

struct ErrorReport {
  double mse = 0.0;      ///< ohm^2
  double log_mse = 0.0;  ///< natural log of mse
  std::optional<double> mse_normalized;
  std::vector<double> error_diff;  ///< actual - predicted, ohms
  BoxStats box;
  std::optional<double> error_at_5pct;  ///< percent
  double max_abs_error_ohms = 0.0;
  std::optional<double> max_abs_error_normalized;
};

/// Elementwise actual - predicted.
std::vector<double> error_diff(std::span<const double> actual, std::span<const double> predicted);

/// Mean of error_diff squared.
double mse_of(std::span<const double> actual, std::span<const double> predicted);

/// Natural log; returns -infinity for mse == 0. Throws for negative input.
double log_mse(double mse);

/// First position where the sensed value reaches `threshold`.
std::optional<std::size_t> detection_index(std::span<const double> actual,
                                           double threshold = kDetectionThreshold);

/// Miss-prediction error at the detection point, in percent:
/// (100 / m) * sum over devices |pred(t5) - thr| / thr, where t5 is each
/// device's own first crossing of `threshold`. Sequences are aligned by
/// position. Throws MetricUndefinedError naming a device that never crosses.
double error_at_5pct(std::span<const std::vector<double>> predicted,
                     std::span<const std::vector<double>> actual,
                     std::span<const std::string> device_ids = {}, double threshold = kDetectionThreshold);

/// Requires at least 4 samples.
BoxStats box_stats(std::span<const double> residuals);

/// Linear-interpolation quantile of already sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

/// Builds a full report from aligned actual/predicted ohm sequences.
/// `normalized_scale`, if given, is 2 / (r_max - r_min) and adds the
/// normalized-domain figures.
ErrorReport make_report(std::span<const double> actual, std::span<const double> predicted,
                        std::optional<double> normalized_scale = std::nullopt);

/// `key=value` lines; the header line records the log base.
void write_report_kv(std::ostream& out, const ErrorReport& r, const std::string& prefix = {});
/// One row per residual: position,error_diff_ohms.
void write_report_csv(std::ostream& out, const ErrorReport& r);

}  // namespace rdson
