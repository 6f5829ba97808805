#include "rdson/snapshot.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rdson/errors.hpp"

namespace rdson {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'R', 'C', 'E'};
constexpr std::size_t kHeaderBytes = 59;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void uint(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v), 8); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint64_t uint(int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(uint(4))); }
  double f64() { return std::bit_cast<double>(uint(8)); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t crc(std::span<const std::uint8_t> data) {
  uLong c = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(c, data.data(), static_cast<uInt>(data.size())));
}

std::string describe(const NetConfig& c) {
  return "k=" + std::to_string(c.k) + " tau=" + std::to_string(c.tau) + " n=" + std::to_string(c.n) +
         " hidden=" + std::to_string(c.hidden) + " ell=" + std::to_string(c.ell) +
         " learn_initial_state=" + std::to_string(c.learn_initial_state);
}

}  // namespace

ModelSnapshot ModelSnapshot::from_network(const Network& net, const Normalizer& nz, std::uint64_t version) {
  return {version, net.config(), nz, flatten(net.params())};
}

Network ModelSnapshot::network() const {
  return Network(config, unflatten<double>(config, std::span<const double>(params)));
}

bool operator==(const ModelSnapshot& a, const ModelSnapshot& b) {
  auto same = [](double x, double y) {
    return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
  };
  if (a.version != b.version || !(a.config == b.config) || !same(a.normalizer.r_min, b.normalizer.r_min) ||
      !same(a.normalizer.r_max, b.normalizer.r_max) || a.params.size() != b.params.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (!same(a.params[i], b.params[i])) return false;
  return true;
}

std::vector<std::uint8_t> encode_model(const ModelSnapshot& m) {
  m.config.validate();
  if (m.params.size() != NetParams<double>::zeros(m.config).size()) {
    throw ShapeError("encode_model: " + std::to_string(m.params.size()) + " parameters do not match config " +
                     describe(m.config));
  }
  Writer w;
  for (auto b : kMagic) w.u8(b);
  w.uint(kSnapshotFormat, 2);
  for (int v : {m.config.k, m.config.tau, m.config.n, m.config.hidden, m.config.ell}) {
    w.uint(static_cast<std::uint32_t>(v), 4);
  }
  w.u8(m.config.learn_initial_state ? 1 : 0);
  w.uint(m.version, 8);
  w.f64(m.normalizer.r_min);
  w.f64(m.normalizer.r_max);
  w.uint(m.params.size(), 8);
  for (double p : m.params) w.f64(p);
  w.uint(crc(w.bytes()), 4);
  return std::move(w.bytes());
}

ModelSnapshot decode_model(std::span<const std::uint8_t> bytes, const std::optional<NetConfig>& expected) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw BadMagicError("not a model file (bad magic)");
  if (bytes.size() < kHeaderBytes + 4) throw DecodeError("model file truncated");
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (crc(body) != static_cast<std::uint32_t>(tail.uint(4)))
    throw ChecksumError("model file checksum mismatch");

  Reader r(body.subspan(4));
  const auto format = static_cast<std::uint16_t>(r.uint(2));
  if (format != kSnapshotFormat)
    throw DecodeError("unsupported model format version " + std::to_string(format));
  ModelSnapshot m;
  m.config.k = r.i32();
  m.config.tau = r.i32();
  m.config.n = r.i32();
  m.config.hidden = r.i32();
  m.config.ell = r.i32();
  const auto flag = r.uint(1);
  if (flag > 1) throw DecodeError("invalid learn_initial_state flag");
  m.config.learn_initial_state = flag == 1;
  m.version = r.uint(8);
  m.normalizer.r_min = r.f64();
  m.normalizer.r_max = r.f64();
  const auto count = r.uint(8);

  if (expected && !(*expected == m.config)) {
    throw ConfigIncompatibleError("model config (" + describe(m.config) + ") does not match expected (" +
                                  describe(*expected) + ")");
  }
  try {
    m.config.validate();
  } catch (const ConfigError& e) {
    throw DecodeError(std::string("invalid stored config: ") + e.what());
  }
  if (count != NetParams<double>::zeros(m.config).size() || body.size() != kHeaderBytes + 8 * count) {
    throw DecodeError("parameter block size does not match stored config");
  }
  m.params.resize(count);
  for (auto& p : m.params) p = r.f64();
  return m;
}

void save_model(const ModelSnapshot& m, const std::filesystem::path& path) {
  const auto bytes = encode_model(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

ModelSnapshot load_model(const std::filesystem::path& path, const std::optional<NetConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_model(bytes, expected);
}

}  // namespace rdson
