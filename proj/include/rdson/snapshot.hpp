#pragma once

// Binary model file exchanged between cloud and edge. All integers and
// floats are little-endian:
//
//   offset  size  field
//   0       4     magic "DRCE"
//   4       2     format version (u16, currently 1)
//   6       20    config: k, tau, n, hidden, ell (i32 each)
//   26      1     learn_initial_state (u8)
//   27      8     model version (u64)
//   35      16    normalizer r_min, r_max (f64)
//   51      8     parameter count P (u64)
//   59      8P    parameters (f64, flatten() order)
//   59+8P   4     CRC-32 of every preceding byte (u32)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "rdson/data.hpp"
#include "rdson/network.hpp"

namespace rdson {

inline constexpr std::uint16_t kSnapshotFormat = 1;

struct ModelSnapshot {
  std::uint64_t version = 0;
  NetConfig config;
  Normalizer normalizer;
  std::vector<double> params;  ///< flatten() order

  static ModelSnapshot from_network(const Network& net, const Normalizer& nz, std::uint64_t version);
  Network network() const;

  /// Bitwise equality, so NaN payloads and signed zeros compare exactly.
  friend bool operator==(const ModelSnapshot& a, const ModelSnapshot& b);
};

std::vector<std::uint8_t> encode_model(const ModelSnapshot& m);

/// Throws BadMagicError, ChecksumError, DecodeError (truncation, unknown
/// format, inconsistent sizes) or, when `expected` is given and differs from
/// the stored config, ConfigIncompatibleError.
ModelSnapshot decode_model(std::span<const std::uint8_t> bytes,
                           const std::optional<NetConfig>& expected = {});

void save_model(const ModelSnapshot& m, const std::filesystem::path& path);
ModelSnapshot load_model(const std::filesystem::path& path, const std::optional<NetConfig>& expected = {});

}  // namespace rdson
