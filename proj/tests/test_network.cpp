#include <gtest/gtest.h>

#include <cmath>

#include "rdson/network.hpp"
#include "test_util.hpp"

using namespace rdson;
using testutil::from_vec;
using testutil::to_vec;

namespace {

std::vector<VectorD> constant_inputs(int count, double v) {
  return std::vector<VectorD>(static_cast<std::size_t>(count), VectorD::Constant(1, v));
}

}  // namespace

TEST(RnnCell, ZeroNetworkGivesZeros) {
  const auto p = RnnCellParams<double>::zeros(2, 3, 1);
  VectorD x(2);
  x << 0.4, -2.0;
  const auto r = rnn_cell_step(p, x, VectorD::Zero(3));
  EXPECT_EQ(r.z, VectorD::Zero(1));
  EXPECT_EQ(r.c, VectorD::Zero(3));
}

TEST(RnnCell, BiasPassthrough) {
  auto p = RnnCellParams<double>::zeros(1, 2, 1);
  p.W_o << 3.0, -7.0;
  p.b_o << 1.0;
  const auto r = rnn_cell_step(p, VectorD::Constant(1, 0.3), VectorD::Zero(2));
  EXPECT_EQ(r.z, VectorD::Constant(1, 1.0));
}

TEST(RnnCell, MatchesScalarOracle) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    auto p = RnnCellParams<double>::zeros(1, 2, 1);
    for (auto* m : {&p.W_i, &p.W_c, &p.W_o})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = testutil::random_vector(rng, 1)[0];
    p.b_i = testutil::random_vector(rng, 2);
    p.b_o = testutil::random_vector(rng, 1);
    const VectorD x = testutil::random_vector(rng, 1);
    const VectorD c = testutil::random_vector(rng, 2);
    const auto got = rnn_cell_step(p, x, c);
    const oracle::Rnn o{testutil::to_mat(p.W_i), testutil::to_mat(p.W_c), testutil::to_mat(p.W_o),
                        to_vec(p.b_i), to_vec(p.b_o)};
    const auto [z, c_next] = oracle::rnn_step(o, to_vec(x), to_vec(c));
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_NEAR(got.z[i], z[i], 1e-12);
    for (std::size_t i = 0; i < c_next.size(); ++i) EXPECT_NEAR(got.c[i], c_next[i], 1e-12);
  }
}

TEST(RnnCell, ShapeErrors) {
  const auto p = RnnCellParams<double>::zeros(1, 2, 1);
  EXPECT_THROW(rnn_cell_step(p, VectorD::Zero(2), VectorD::Zero(2)), ShapeError);
  EXPECT_THROW(rnn_cell_step(p, VectorD::Zero(1), VectorD::Zero(3)), ShapeError);
}

TEST(LstmCell, ZeroWeightsZeroState) {
  const auto p = LstmCellParams<double>::zeros(1, 3);
  const auto r = lstm_cell_step(p, VectorD::Constant(1, 0.9), VectorD::Zero(3), VectorD::Zero(3));
  EXPECT_EQ(r.h, VectorD::Zero(3));
  EXPECT_EQ(r.c, VectorD::Zero(3));
}

TEST(LstmCell, OpenForgetClosedInputPreservesMemory) {
  auto p = LstmCellParams<double>::zeros(1, 1);
  p.b_f << 50.0;
  p.b_i << -50.0;
  const auto r = lstm_cell_step(p, VectorD::Constant(1, 0.2), VectorD::Zero(1), VectorD::Constant(1, 0.7));
  EXPECT_NEAR(r.c[0], 0.7, 1e-12);
}

TEST(LstmCell, MatchesScalarOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    NetConfig cfg{1, 1, 1, 3, 1};
    const auto params = testutil::random_params(cfg, 100 + trial);
    const auto& p = params.layers[0];
    const VectorD x = testutil::random_vector(rng, 1);
    const VectorD h = testutil::random_vector(rng, 3, 0.5);
    const VectorD c = testutil::random_vector(rng, 3);
    const auto got = lstm_cell_step(p, x, h, c);
    const auto [h_ref, c_ref] = oracle::lstm_step(testutil::to_oracle(p), to_vec(x), to_vec(h), to_vec(c));
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(got.h[i], h_ref[i], 1e-12);
      EXPECT_NEAR(got.c[i], c_ref[i], 1e-12);
    }
  }
}

TEST(LstmCell, GateAndStateBounds) {
  std::mt19937_64 rng(5);
  NetConfig cfg{2, 1, 1, 6, 1};
  for (int trial = 0; trial < 200; ++trial) {
    const auto params = testutil::random_params(cfg, 900 + trial, 3.0);
    const VectorD x = testutil::random_vector(rng, 2, 10.0);
    const VectorD h = testutil::random_vector(rng, 6).array().tanh().matrix();
    const VectorD c = testutil::random_vector(rng, 6, 4.0);
    const auto s = lstm_cell_forward(params.layers[0], x, h, c);
    for (const VectorD* gate : {&s.i, &s.f, &s.o}) {
      EXPECT_TRUE((gate->array() >= 0.0).all() && (gate->array() <= 1.0).all());
    }
    EXPECT_TRUE((s.c.array().abs() <= c.array().abs() + 1.0).all());
    EXPECT_TRUE((s.h.array().abs() <= 1.0).all());
  }
}

TEST(LstmCell, ShapeErrors) {
  const auto p = LstmCellParams<double>::zeros(2, 3);
  EXPECT_THROW(lstm_cell_step(p, VectorD::Zero(1), VectorD::Zero(3), VectorD::Zero(3)), ShapeError);
  EXPECT_THROW(lstm_cell_step(p, VectorD::Zero(2), VectorD::Zero(2), VectorD::Zero(3)), ShapeError);
  EXPECT_THROW(lstm_cell_step(p, VectorD::Zero(2), VectorD::Zero(3), VectorD::Zero(4)), ShapeError);
}

TEST(StackedLstm, ConstructionRejectsInconsistentWidths) {
  NetConfig cfg{1, 3, 2, 4, 2};
  auto p = NetParams<double>::zeros(cfg);
  p.layers[1] = LstmCellParams<double>::zeros(1, 4);  // upper layer must take hidden inputs
  EXPECT_THROW(Network(cfg, p), ShapeError);
  auto q = NetParams<double>::zeros(cfg);
  q.dense.W_d = MatrixD::Zero(1, 3);
  EXPECT_THROW(Network(cfg, q), ShapeError);
  auto r = NetParams<double>::zeros(cfg);
  r.layers.pop_back();
  EXPECT_THROW(Network(cfg, r), ShapeError);
  EXPECT_NO_THROW(Network(cfg, NetParams<double>::zeros(cfg)));
}

TEST(Forward, ZeroNetworkEmitsDenseBias) {
  NetConfig cfg{1, 4, 5, 3, 2};
  auto p = NetParams<double>::zeros(cfg);
  p.dense.b_d << 0.37;
  const Network net(cfg, p);
  const auto inputs = constant_inputs(4, 0.8);
  const auto out = forward<double>(net, inputs);
  ASSERT_EQ(out.preds.size(), 5u);
  for (const auto& v : out.preds) EXPECT_EQ(v[0], 0.37);
}

TEST(Forward, SingleUnitMatchesHandComposition) {
  NetConfig cfg{1, 1, 1, 1, 1};
  auto p = NetParams<double>::zeros(cfg);
  auto& L = p.layers[0];
  L.W_i << 0.5, -0.3;
  L.W_f << -0.2, 0.1;
  L.W_o << 0.7, 0.4;
  L.W_c << 1.1, -0.6;
  L.b_i << 0.05;
  L.b_f << 0.2;
  L.b_o << -0.1;
  L.b_c << 0.3;
  L.c_0 << 0.25;
  p.dense.W_d << 1.5;
  p.dense.b_d << -0.2;
  const Network net(cfg, p);
  const double x = 0.6;
  // h_prev = 0, so v = [x, 0].
  const double i = 1.0 / (1.0 + std::exp(-(0.5 * x + 0.05)));
  const double f = 1.0 / (1.0 + std::exp(-(-0.2 * x + 0.2)));
  const double o = 1.0 / (1.0 + std::exp(-(0.7 * x - 0.1)));
  const double g = std::tanh(1.1 * x + 0.3);
  const double c = f * 0.25 + i * g;
  const double h = o * std::tanh(c);
  const double expected = 1.5 * h - 0.2;
  const std::vector<VectorD> in{VectorD::Constant(1, x)};
  const auto out = forward<double>(net, in);
  ASSERT_EQ(out.preds.size(), 1u);
  EXPECT_NEAR(out.preds[0][0], expected, 1e-14);
}

TEST(Forward, RolloutMatchesOracleComposition) {
  // Two layers, rollout feeds each prediction back in.
  NetConfig cfg{1, 3, 4, 2, 2};
  const Network net(cfg, testutil::random_params(cfg, 77));
  const std::vector<VectorD> in{VectorD::Constant(1, 0.1), VectorD::Constant(1, -0.4),
                                VectorD::Constant(1, 0.9)};

  const auto o0 = testutil::to_oracle(net.params().layers[0]);
  const auto o1 = testutil::to_oracle(net.params().layers[1]);
  oracle::Vec h0(2, 0.0), h1(2, 0.0);
  oracle::Vec c0 = to_vec(net.params().layers[0].c_0), c1 = to_vec(net.params().layers[1].c_0);
  const auto Wd = testutil::to_mat(net.params().dense.W_d);
  const auto bd = to_vec(net.params().dense.b_d);
  std::vector<double> expected;
  double x = 0.0;
  for (int t = 0; t < cfg.tau + cfg.n - 1; ++t) {
    if (t < cfg.tau) x = in[t][0];
    std::tie(h0, c0) = oracle::lstm_step(o0, {x}, h0, c0);
    std::tie(h1, c1) = oracle::lstm_step(o1, h0, h1, c1);
    if (t >= cfg.tau - 1) {
      x = oracle::affine(Wd, h1, bd)[0];
      expected.push_back(x);
    }
  }
  const auto out = forward<double>(net, in);
  ASSERT_EQ(out.preds.size(), expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(out.preds[j][0], expected[j], 1e-12);
}

TEST(Forward, DeterministicAndBounded) {
  NetConfig cfg{1, 6, 8, 5, 3};
  const auto net = init_params(cfg, 9);
  std::mt19937_64 rng(1);
  std::vector<VectorD> in;
  for (int t = 0; t < cfg.tau; ++t) in.push_back(testutil::random_vector(rng, 1, 0.5));
  const auto a = forward<double>(net, in);
  const auto b = forward<double>(net, in);
  ASSERT_EQ(a.preds.size(), b.preds.size());
  const double bound = net.params().dense.b_d.cwiseAbs().sum() + net.params().dense.W_d.cwiseAbs().sum();
  for (std::size_t j = 0; j < a.preds.size(); ++j) {
    EXPECT_EQ(a.preds[j], b.preds[j]);
    EXPECT_LE(std::abs(a.preds[j][0]), bound);
  }
  // Identical nets on identical prefixes agree on the first prediction.
  const auto c = forward_rollout<double>(net, in, 1);
  EXPECT_EQ(c.preds[0], a.preds[0]);
}

TEST(Forward, TeacherForcedMatchesRolloutWhenFedOwnPredictions) {
  NetConfig cfg{1, 4, 3, 3, 2};
  const Network net(cfg, testutil::random_params(cfg, 5, 0.3));
  std::vector<VectorD> in{VectorD::Constant(1, 0.2), VectorD::Constant(1, 0.1), VectorD::Constant(1, -0.3),
                          VectorD::Constant(1, 0.5)};
  const auto roll = forward<double>(net, in);
  auto tf_in = in;
  for (int j = 0; j + 1 < cfg.n; ++j) tf_in.push_back(roll.preds[j]);
  const auto tf = forward_teacher_forced<double>(net, tf_in);
  ASSERT_EQ(tf.preds.size(), roll.preds.size());
  for (std::size_t j = 0; j < tf.preds.size(); ++j) EXPECT_EQ(tf.preds[j], roll.preds[j]);
  EXPECT_EQ(tf.tape.steps.size(), static_cast<std::size_t>(cfg.tau + cfg.n - 1));
}

TEST(Forward, RejectsWrongInputs) {
  NetConfig cfg{1, 3, 2, 2, 1};
  const auto net = init_params(cfg, 1);
  EXPECT_THROW(forward<double>(net, constant_inputs(2, 0.0)), ShapeError);
  std::vector<VectorD> wide(3, VectorD::Zero(2));
  EXPECT_THROW(forward<double>(net, wide), ShapeError);
  EXPECT_THROW(forward_teacher_forced<double>(net, constant_inputs(3, 0.0)), ShapeError);
  EXPECT_TRUE(forward_rollout<double>(net, constant_inputs(3, 0.0), 0).preds.empty());
}

TEST(InitParams, DeterministicUnderSeed) {
  NetConfig cfg{1, 2, 2, 8, 2};
  EXPECT_EQ(init_params(cfg, 123), init_params(cfg, 123));
  EXPECT_FALSE(init_params(cfg, 123) == init_params(cfg, 124));
}

TEST(InitParams, TruncatedNormalStatistics) {
  // hidden=49, ell=1, k=1 -> 4*49*50 + 4*49 + 49 + 49 + 1 = 10094 draws (c_0 zeroed).
  NetConfig cfg{1, 1, 1, 49, 1};
  const auto flat = flatten(init_params(cfg, 31337).params());
  ASSERT_GE(flat.size(), 10000u);
  double sum = 0.0;
  for (double v : flat) {
    EXPECT_GE(v, -0.2);
    EXPECT_LE(v, 0.2);
    sum += v;
  }
  EXPECT_NEAR(sum / static_cast<double>(flat.size()), 0.0, 0.01);
  const auto net = init_params(cfg, 1);
  for (const auto& layer : net.params().layers) EXPECT_EQ(layer.c_0, VectorD::Zero(49));
}

TEST(NetParams, FlattenRoundTrip) {
  NetConfig cfg{1, 2, 2, 3, 2};
  const auto p = testutil::random_params(cfg, 8);
  const auto flat = flatten(p);
  EXPECT_EQ(flat.size(), p.size());
  EXPECT_EQ(flatten(unflatten<double>(cfg, flat)), flat);
  std::vector<double> short_flat(flat.begin(), flat.end() - 1);
  EXPECT_THROW(unflatten<double>(cfg, short_flat), ShapeError);
}
