#include "rdson/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "rdson/errors.hpp"
#include "rdson/metrics.hpp"

namespace rdson {

namespace {

const Eigen::Matrix2d kF = (Eigen::Matrix2d() << 1.0, 1.0, 0.0, 1.0).finished();
const Eigen::RowVector2d kH(1.0, 0.0);

}  // namespace

KalmanModel::KalmanModel(double y0, double y1, KalmanParams params) : params_(params) {
  if (!(params.q >= 0.0) || !(params.rho > 0.0)) throw ConfigError("Kalman: q must be >= 0 and rho > 0");
  x_ << y1, y1 - y0;
  // Covariance of [y1, y1 - y0] under independent measurement noise.
  P_ << params.rho, params.rho, params.rho, 2.0 * params.rho;
}

void KalmanModel::predict() {
  x_ = kF * x_;
  P_ = kF * P_ * kF.transpose() + params_.q * Eigen::Matrix2d::Identity();
}

void KalmanModel::update(double y) {
  const double s = (kH * P_ * kH.transpose())(0, 0) + params_.rho;
  const Eigen::Vector2d K = P_ * kH.transpose() / s;
  x_ += K * (y - kH * x_);
  const Eigen::Matrix2d A = Eigen::Matrix2d::Identity() - K * kH;
  P_ = A * P_ * A.transpose() + params_.rho * K * K.transpose();
  P_ = (0.5 * (P_ + P_.transpose())).eval();
  check_covariance();
}

void KalmanModel::check_covariance() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(P_, Eigen::EigenvaluesOnly);
  if (!P_.allFinite() || es.eigenvalues().minCoeff() < -1e-10) {
    throw DegeneracyError("Kalman covariance is no longer positive semidefinite");
  }
}

std::vector<double> kalman_predict(std::span<const double> prefix, std::size_t horizon, KalmanParams params) {
  if (prefix.size() < 2) throw InsufficientDataError("kalman_predict needs at least 2 samples");
  KalmanModel kf(prefix[0], prefix[1], params);
  for (std::size_t i = 2; i < prefix.size(); ++i) {
    kf.predict();
    kf.update(prefix[i]);
  }
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) {
    kf.predict();
    out.push_back(kf.state()[0]);
  }
  return out;
}

ParticleModel::ParticleModel(ParticleParams params, std::uint64_t seed) : params_(params), rng_(seed) {
  if (params.particles < 100) throw ConfigError("particle filter needs at least 100 particles");
  if (!(params.sigma > 0.0) || !(params.a_min > 0.0) || !(params.a_max > params.a_min) ||
      !(params.b_min > 0.0) || !(params.b_max > params.b_min) ||
      !(params.kernel_h > 0.0 && params.kernel_h < 1.0)) {
    throw ConfigError("invalid particle filter parameters");
  }
  std::uniform_real_distribution<double> la(std::log(params.a_min), std::log(params.a_max));
  std::uniform_real_distribution<double> lb(std::log(params.b_min), std::log(params.b_max));
  const std::size_t n = params.particles;
  a_.resize(n);
  b_.resize(n);
  w_.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    a_[i] = std::exp(la(rng_));
    b_[i] = std::exp(lb(rng_));
  }
}

void ParticleModel::observe(double t, double y) {
  const std::size_t n = w_.size();
  std::vector<double> logw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (y - a_[i] * std::expm1(b_[i] * t)) / params_.sigma;
    logw[i] = std::log(w_[i]) - 0.5 * r * r;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += (w_[i] = std::exp(logw[i] - top));
  for (auto& w : w_) w /= sum;
  const double ess = effective_sample_size();
  if (!(ess >= 2.0)) {
    throw DegeneracyError("particle weights collapsed at t=" + std::to_string(t) +
                          " (effective sample size " + std::to_string(ess) + ")");
  }
  if (ess < 0.5 * static_cast<double>(n)) resample();
}

void ParticleModel::resample() {
  const std::size_t n = w_.size();
  // Weighted moments in log space drive the shrinkage kernel.
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += w_[i] * std::log(a_[i]);
    mb += w_[i] * std::log(b_[i]);
  }
  double vaa = 0.0, vab = 0.0, vbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = std::log(a_[i]) - ma, db = std::log(b_[i]) - mb;
    vaa += w_[i] * da * da;
    vab += w_[i] * da * db;
    vbb += w_[i] * db * db;
  }
  Eigen::Matrix2d V;
  V << vaa, vab, vab, vbb;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(V);
  const Eigen::Matrix2d L = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng_) / static_cast<double>(n);
  std::vector<std::size_t> pick(n);
  double cum = w_[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = u + static_cast<double>(i) / static_cast<double>(n);
    while (target > cum && j + 1 < n) cum += w_[++j];
    pick[i] = j;
  }

  const double h = params_.kernel_h;
  const double s = std::sqrt(1.0 - h * h);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> na(n), nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d z(g(rng_), g(rng_));
    const Eigen::Vector2d jitter = h * (L * z);
    na[i] = std::exp(s * std::log(a_[pick[i]]) + (1.0 - s) * ma + jitter[0]);
    nb[i] = std::exp(s * std::log(b_[pick[i]]) + (1.0 - s) * mb + jitter[1]);
  }
  a_ = std::move(na);
  b_ = std::move(nb);
  w_.assign(n, 1.0 / static_cast<double>(n));
}

double ParticleModel::predict(double t) const {
  double out = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) out += w_[i] * a_[i] * std::expm1(b_[i] * t);
  return out;
}

double ParticleModel::mean_a() const { return std::inner_product(w_.begin(), w_.end(), a_.begin(), 0.0); }
double ParticleModel::mean_b() const { return std::inner_product(w_.begin(), w_.end(), b_.begin(), 0.0); }

double ParticleModel::effective_sample_size() const {
  double sq = 0.0;
  for (double w : w_) sq += w * w;
  return 1.0 / sq;
}

std::vector<double> particle_predict(std::span<const double> prefix, std::size_t horizon, std::uint64_t seed,
                                     ParticleParams params) {
  if (prefix.size() < 5) throw InsufficientDataError("particle_predict needs at least 5 samples");
  ParticleModel pf(params, seed);
  for (std::size_t i = 0; i < prefix.size(); ++i) pf.observe(static_cast<double>(i), prefix[i]);
  std::vector<double> out;
  out.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) out.push_back(pf.predict(static_cast<double>(prefix.size() + k)));
  return out;
}

ComparisonTable compare(std::span<const Method> methods, std::span<const ComparisonScenario> scenarios,
                        std::size_t horizon) {
  if (methods.empty() || scenarios.empty())
    throw ConfigError("compare: need at least one method and one scenario");
  if (horizon == 0) throw ConfigError("compare: horizon must be positive");
  ComparisonTable table;
  table.horizon = horizon;
  for (const auto& m : methods) table.rows.push_back({m.name, {}, 0.0, 1.0});

  for (const auto& sc : scenarios) {
    const auto t5 = detection_index(sc.trace);
    if (!t5) {
      throw MetricUndefinedError("device " + sc.device_id + " never reaches " +
                                 std::to_string(kDetectionThreshold) + " ohm");
    }
    if (*t5 + 1 < horizon + 2) {
      throw InsufficientDataError("device " + sc.device_id + " crosses the threshold at sample " +
                                  std::to_string(*t5) + ", too early for a " + std::to_string(horizon) +
                                  "-step forecast");
    }
    table.scenarios.push_back(sc.device_id);
    table.detection_index.push_back(*t5);
    const std::size_t origin = *t5 + 1 - horizon;
    const std::span<const double> prefix(sc.trace.data(), origin);
    const std::vector<std::vector<double>> actual{
        std::vector<double>(sc.trace.begin(), sc.trace.begin() + *t5 + 1)};
    const std::vector<std::string> ids{sc.device_id};
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto forecast = methods[m].predict(sc.device_id, prefix, horizon);
      if (forecast.size() != horizon) {
        throw ShapeError("compare: method " + methods[m].name + " returned " +
                         std::to_string(forecast.size()) + " values, expected " + std::to_string(horizon));
      }
      std::vector<std::vector<double>> pred{std::vector<double>(prefix.begin(), prefix.end())};
      pred[0].insert(pred[0].end(), forecast.begin(), forecast.end());
      table.rows[m].per_scenario.push_back(error_at_5pct(pred, actual, ids));
    }
  }
  for (auto& row : table.rows) {
    row.error_at_5pct = std::accumulate(row.per_scenario.begin(), row.per_scenario.end(), 0.0) /
                        static_cast<double>(row.per_scenario.size());
  }
  const double ref = table.rows[0].error_at_5pct;
  for (auto& row : table.rows) {
    row.ratio = row.error_at_5pct == ref ? 1.0 : row.error_at_5pct / ref;
  }
  return table;
}

namespace {

std::string num(double v, const char* f = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

void write_comparison_csv(std::ostream& out, const ComparisonTable& t) {
  out << "method";
  for (const auto& s : t.scenarios) out << ',' << s;
  out << ",error_at_5pct,ratio_to_" << t.rows.front().method << '\n';
  for (const auto& row : t.rows) {
    out << row.method;
    for (double v : row.per_scenario) out << ',' << num(v);
    out << ',' << num(row.error_at_5pct) << ',' << num(row.ratio) << '\n';
  }
}

void write_comparison_text(std::ostream& out, const ComparisonTable& t) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"method"};
  head.insert(head.end(), t.scenarios.begin(), t.scenarios.end());
  head.push_back("mean %");
  head.push_back("ratio");
  cells.push_back(head);
  for (const auto& row : t.rows) {
    std::vector<std::string> line{row.method};
    for (double v : row.per_scenario) line.push_back(num(v, "%.2f"));
    line.push_back(num(row.error_at_5pct, "%.2f"));
    line.push_back(num(row.ratio, "%.2fx"));
    cells.push_back(line);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      const std::string pad(width[c] - line[c].size(), ' ');
      out << (c == 0 ? line[c] + pad : "  " + pad + line[c]);
    }
    out << '\n';
  }
}

}  // namespace rdson
