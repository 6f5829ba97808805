#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rdson/errors.hpp"
#include "rdson/metrics.hpp"
#include "rdson/training.hpp"

using namespace rdson;

TEST(ErrorDiff, Examples) {
  const std::vector<double> a{0.1, 0.2, 0.3};
  for (double d : error_diff(a, a)) EXPECT_EQ(d, 0.0);
  const std::vector<double> y{0.05}, z{0.041};
  EXPECT_NEAR(error_diff(y, z)[0], 0.009, 1e-15);
  const std::vector<double> b{0.4, -0.1, 0.25};
  const auto ab = error_diff(a, b), ba = error_diff(b, a);
  for (std::size_t i = 0; i < ab.size(); ++i) EXPECT_EQ(ab[i], -ba[i]);
  EXPECT_THROW(error_diff(a, y), ShapeError);
}

TEST(ErrorAt5pct, ExactDetectionIsZero) {
  std::vector<std::vector<double>> actual{{0.0, 0.02, 0.05, 0.07}, {0.01, 0.06}};
  std::vector<std::vector<double>> pred{{9.0, 9.0, 0.05, 9.0}, {9.0, 0.05}};
  EXPECT_EQ(error_at_5pct(pred, actual), 0.0);
}

TEST(ErrorAt5pct, SingleDevice) {
  std::vector<std::vector<double>> actual{{0.01, 0.05}};
  std::vector<std::vector<double>> pred{{0.0, 0.06}};
  EXPECT_DOUBLE_EQ(error_at_5pct(pred, actual), 20.0);
}

TEST(ErrorAt5pct, ThreeDevices) {
  std::vector<std::vector<double>> actual{{0.05}, {0.05}, {0.05}};
  std::vector<std::vector<double>> pred{{0.05}, {0.04}, {0.06}};
  EXPECT_NEAR(error_at_5pct(pred, actual), 40.0 / 3.0, 1e-12);
}

TEST(ErrorAt5pct, IgnoresPredictionsAfterDetection) {
  std::vector<std::vector<double>> actual{{0.01, 0.052, 0.09}};
  std::vector<std::vector<double>> p1{{0.0, 0.045, 0.1}}, p2{{0.0, 0.045, -3.0}};
  EXPECT_EQ(error_at_5pct(p1, actual), error_at_5pct(p2, actual));
}

TEST(ErrorAt5pct, NeverCrossingNamesDevice) {
  std::vector<std::vector<double>> actual{{0.05}, {0.01, 0.02}};
  std::vector<std::vector<double>> pred{{0.05}, {0.01, 0.02}};
  const std::vector<std::string> ids{"alpha", "beta"};
  try {
    error_at_5pct(pred, actual, ids);
    FAIL() << "expected MetricUndefinedError";
  } catch (const MetricUndefinedError& e) {
    EXPECT_NE(std::string(e.what()).find("beta"), std::string::npos);
  }
}

TEST(BoxStats, OneToFive) {
  const std::vector<double> v{5, 1, 4, 2, 3};
  const auto b = box_stats(v);
  EXPECT_EQ(b.median, 3.0);
  EXPECT_EQ(b.q1, 2.0);
  EXPECT_EQ(b.q3, 4.0);
  EXPECT_EQ(b.whisker_lo, 1.0);
  EXPECT_EQ(b.whisker_hi, 5.0);
  EXPECT_TRUE(b.outliers.empty());
}

TEST(BoxStats, AllEqual) {
  const std::vector<double> v(7, 0.3);
  const auto b = box_stats(v);
  EXPECT_EQ(b.q1, b.median);
  EXPECT_EQ(b.median, b.q3);
  EXPECT_TRUE(b.outliers.empty());
}

TEST(BoxStats, SymmetricData) {
  const std::vector<double> v{-3.1, -1.2, -0.4, 0.0, 0.4, 1.2, 3.1};
  const auto b = box_stats(v);
  EXPECT_NEAR(b.median, 0.0, 1e-12);
  EXPECT_NEAR(b.q3 - b.median, b.median - b.q1, 1e-12);
}

TEST(BoxStats, MatchesOracleQuantilesAndPartitionsSamples) {
  std::mt19937_64 rng(17);
  std::student_t_distribution<double> heavy(2.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> v(4 + rep * 3);
    for (auto& x : v) x = heavy(rng);
    const auto b = box_stats(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_NEAR(b.q1, oracle::quantile_sorted(sorted, 0.25), 1e-12);
    EXPECT_NEAR(b.median, oracle::quantile_sorted(sorted, 0.5), 1e-12);
    EXPECT_NEAR(b.q3, oracle::quantile_sorted(sorted, 0.75), 1e-12);
    const double iqr = b.q3 - b.q1;
    EXPECT_GE(b.whisker_lo, b.q1 - 1.5 * iqr);
    EXPECT_LE(b.whisker_hi, b.q3 + 1.5 * iqr);
    std::size_t inside = 0;
    for (double x : v) inside += (x >= b.whisker_lo && x <= b.whisker_hi);
    EXPECT_EQ(inside + b.outliers.size(), v.size());
  }
}

TEST(BoxStats, TooFewSamples) {
  const std::vector<double> v{1, 2, 3};
  EXPECT_THROW(box_stats(v), ShapeError);
}

TEST(LogMse, Examples) {
  EXPECT_EQ(log_mse(1.0), 0.0);
  EXPECT_NEAR(log_mse(std::exp(-13.0)), -13.0, 1e-12);
  for (double x : {1e-9, 3.7e-4, 0.2, 12.0}) EXPECT_NEAR(std::exp(log_mse(x)), x, 1e-12 * x);
  EXPECT_TRUE(std::isinf(log_mse(0.0)) && log_mse(0.0) < 0.0);
  EXPECT_THROW(log_mse(-1.0), MetricUndefinedError);
}

TEST(Report, ConsistentWithTrainingMse) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.08);
  std::vector<double> a(40), p(40);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = u(rng);
    p[i] = u(rng);
  }
  const auto r = make_report(a, p, 2.0 / 0.08);
  double sum = 0.0;
  for (double d : r.error_diff) sum += d * d;
  EXPECT_NEAR(r.mse, sum / 40.0, 1e-12);
  EXPECT_NEAR(r.mse, mse(std::span<const double>(p), std::span<const double>(a)), 1e-12);
  EXPECT_NEAR(r.log_mse, std::log(r.mse), 1e-12);
  ASSERT_TRUE(r.mse_normalized.has_value());
  EXPECT_NEAR(*r.mse_normalized, r.mse * 625.0, 1e-12);
}

TEST(Report, KeyValueBlock) {
  const std::vector<double> a{0.05, 0.01, 0.02, 0.03}, p{0.041, 0.01, 0.02, 0.03};
  auto r = make_report(a, p);
  r.error_at_5pct = 18.0;
  std::ostringstream out;
  write_report_kv(out, r);
  const auto s = out.str();
  EXPECT_EQ(s.rfind("# log base: e", 0), 0u);
  EXPECT_NE(s.find("max_abs_error_ohms=0.009\n"), std::string::npos);
  EXPECT_NE(s.find("max_abs_error_pct=0.9\n"), std::string::npos);
  EXPECT_NE(s.find("error_at_5pct=18\n"), std::string::npos);
  std::ostringstream csv;
  write_report_csv(csv, r);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "position,error_diff_ohms");
}
