#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <limits>
#include <random>

#include "rdson/errors.hpp"
#include "rdson/snapshot.hpp"
#include "test_util.hpp"

using namespace rdson;

namespace {

ModelSnapshot random_snapshot(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(1, 4);
  NetConfig cfg{small(rng), small(rng), small(rng), small(rng), small(rng), rng() % 2 == 0};
  ModelSnapshot m{rng(), cfg, {0.0, 0.1}, {}};
  m.params.resize(NetParams<double>::zeros(cfg).size());
  // Arbitrary bit patterns, including NaNs, infinities and subnormals.
  for (auto& p : m.params) p = std::bit_cast<double>(rng());
  m.normalizer.r_min = std::bit_cast<double>(rng());
  return m;
}

}  // namespace

TEST(Snapshot, RoundTripIsBitExact) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto m = random_snapshot(rng);
    EXPECT_EQ(decode_model(encode_model(m)), m);
  }
}

TEST(Snapshot, LayoutHeader) {
  NetConfig cfg{1, 2, 3, 2, 1};
  const auto m = ModelSnapshot::from_network(init_params(cfg, 1), {0.0, 0.05}, 7);
  const auto bytes = encode_model(m);
  EXPECT_EQ(bytes.size(), 59 + 8 * m.params.size() + 4);
  EXPECT_EQ(std::memcmp(bytes.data(), "DRCE", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 1);   // k, little-endian
  EXPECT_EQ(bytes[10], 2);  // tau
  EXPECT_EQ(bytes[27], 7);  // version
}

TEST(Snapshot, NetworkSurvivesRoundTrip) {
  NetConfig cfg{1, 3, 2, 4, 2};
  const auto net = init_params(cfg, 5);
  const auto m = decode_model(encode_model(ModelSnapshot::from_network(net, {0.0, 1.0}, 1)));
  EXPECT_EQ(m.network(), net);
}

TEST(Snapshot, FlippedPayloadByteIsChecksumError) {
  NetConfig cfg{1, 2, 2, 3, 1};
  auto bytes = encode_model(ModelSnapshot::from_network(init_params(cfg, 2), {0.0, 0.05}, 1));
  bytes[70] ^= 0x10;
  EXPECT_THROW(decode_model(bytes), ChecksumError);
}

TEST(Snapshot, EveryByteIsProtected) {
  NetConfig cfg{1, 2, 2, 2, 1};
  const auto good = encode_model(ModelSnapshot::from_network(init_params(cfg, 3), {0.0, 0.05}, 4));
  for (std::size_t i = 0; i < good.size(); ++i) {
    auto bad = good;
    bad[i] ^= 0xFF;
    EXPECT_THROW(decode_model(bad), DecodeError) << "byte " << i;
  }
}

TEST(Snapshot, MagicCheckedFirst) {
  NetConfig cfg{1, 2, 2, 2, 1};
  auto bytes = encode_model(ModelSnapshot::from_network(init_params(cfg, 3), {0.0, 0.05}, 1));
  bytes[0] = 'X';
  EXPECT_THROW(decode_model(bytes), BadMagicError);
  EXPECT_THROW(decode_model(std::vector<std::uint8_t>{}), BadMagicError);
  const std::vector<std::uint8_t> stub{'D', 'R', 'C', 'E', 1};
  EXPECT_THROW(decode_model(stub), DecodeError);
}

TEST(Snapshot, ConfigIncompatibility) {
  NetConfig big{1, 4, 3, 64, 1};
  const auto bytes = encode_model(ModelSnapshot::from_network(init_params(big, 1), {0.0, 0.05}, 1));
  NetConfig expect = big;
  expect.hidden = 32;
  EXPECT_THROW(decode_model(bytes, expect), ConfigIncompatibleError);
  EXPECT_NO_THROW(decode_model(bytes, big));
}

TEST(Snapshot, FileRoundTrip) {
  testutil::TempDir dir("snap");
  NetConfig cfg{1, 3, 2, 4, 2};
  const auto m = ModelSnapshot::from_network(init_params(cfg, 5), {0.001, 0.07}, 3);
  save_model(m, dir / "m.drce");
  EXPECT_EQ(load_model(dir / "m.drce"), m);
  EXPECT_THROW(load_model(dir / "missing.drce"), DataError);
}

TEST(Snapshot, EncodeRejectsWrongParameterCount) {
  ModelSnapshot m{1, NetConfig{1, 2, 2, 2, 1}, {}, {1.0, 2.0}};
  EXPECT_THROW(encode_model(m), ShapeError);
}
