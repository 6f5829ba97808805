#pragma once

// Classical single-device predictors used as comparison points for the
// recurrent model: a constant-velocity Kalman filter and a sequential
// importance-resampling particle filter over an exponential growth law.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rdson {

struct KalmanParams {
  double q = 1e-10;   ///< process noise, ohm^2 per sample
  double rho = 1e-8;  ///< measurement noise variance, ohm^2
};

/// State [r, r_dot] with F = [[1, 1], [0, 1]] and H = [1, 0].
class KalmanModel {
 public:
  /// Initializes from two consecutive samples.
  KalmanModel(double y0, double y1, KalmanParams params = {});

  void predict();
  /// Joseph-form measurement update; throws DegeneracyError if the
  /// covariance stops being symmetric PSD.
  void update(double y);

  const Eigen::Vector2d& state() const { return x_; }
  const Eigen::Matrix2d& covariance() const { return P_; }

 private:
  void check_covariance() const;

  KalmanParams params_;
  Eigen::Vector2d x_;
  Eigen::Matrix2d P_;
};

/// Filters the prefix, then propagates the state `horizon` steps with no
/// further updates. Requires at least 2 samples.
std::vector<double> kalman_predict(std::span<const double> prefix, std::size_t horizon,
                                   KalmanParams params = {});

struct ParticleParams {
  std::size_t particles = 1000;
  double sigma = 1e-3;                ///< likelihood standard deviation, ohm
  double a_min = 1e-4, a_max = 1e-1;  ///< log-uniform prior on a, ohm
  double b_min = 1e-3, b_max = 5e-2;  ///< log-uniform prior on b, 1/sample
  double kernel_h = 0.1;              ///< regularization kernel width (Liu-West)
};

/// Particles over (a, b) of R(t) = a (exp(b t) - 1). Each observation
/// reweights by a Gaussian likelihood; when the effective sample size falls
/// below N/2 the cloud is resampled systematically and jittered with a
/// shrinkage kernel in log-parameter space.
class ParticleModel {
 public:
  ParticleModel(ParticleParams params, std::uint64_t seed);

  /// Assimilates the sample observed at time `t`. Throws DegeneracyError if
  /// the effective sample size drops below 2.
  void observe(double t, double y);

  double predict(double t) const;
  double mean_a() const;
  double mean_b() const;
  double effective_sample_size() const;

  std::span<const double> a() const { return a_; }
  std::span<const double> b() const { return b_; }
  std::span<const double> weights() const { return w_; }

 private:
  void resample();

  ParticleParams params_;
  std::mt19937_64 rng_;
  std::vector<double> a_, b_, w_;
};

/// Runs the prefix through a particle filter (sample i observed at t = i)
/// and returns the weighted-mean trajectory for t = prefix.size() onward.
/// Requires at least 5 samples.
std::vector<double> particle_predict(std::span<const double> prefix, std::size_t horizon, std::uint64_t seed,
                                     ParticleParams params = {});

// ---------------------------------------------------------------------------
// Comparison at the detection point

/// Returns `horizon` ohm values following `prefix` (ohms) of `device`.
using Predictor = std::function<std::vector<double>(const std::string& device, std::span<const double> prefix,
                                                    std::size_t horizon)>;

struct Method {
  std::string name;
  Predictor predict;
};

struct ComparisonScenario {
  std::string device_id;
  std::vector<double> trace;  ///< ohms
};

struct ComparisonRow {
  std::string method;
  std::vector<double> per_scenario;  ///< detection-point error for each scenario, percent
  double error_at_5pct = 0.0;        ///< averaged over scenarios, percent
  double ratio = 1.0;                ///< this method / reference method
};

struct ComparisonTable {
  std::vector<std::string> scenarios;
  std::vector<std::size_t> detection_index;
  std::size_t horizon = 0;
  std::vector<ComparisonRow> rows;  ///< rows[0] is the reference method
};

/// Every method forecasts from the same prefix, which ends `horizon` samples
/// before the scenario's detection point, so the last predicted value lands
/// on it. The first method is the reference for the ratio column.
ComparisonTable compare(std::span<const Method> methods, std::span<const ComparisonScenario> scenarios,
                        std::size_t horizon);

void write_comparison_csv(std::ostream& out, const ComparisonTable& t);
void write_comparison_text(std::ostream& out, const ComparisonTable& t);

}  // namespace rdson
