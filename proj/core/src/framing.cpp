// SPDX-License-Identifier: Apache-2.0
#include "mdagg/framing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mdagg/channel.hpp"

namespace mdagg {
namespace {

constexpr std::size_t kMacHeaderBytes = 24;
constexpr std::size_t kMapEntryBytes = 3;
constexpr std::size_t kHeaderMapCapacity = 7;
constexpr std::size_t kFcsBytes = 4;
constexpr std::uint8_t kFrameControl0 = 0x08;  // data frame
constexpr std::uint8_t kFrameControl1 = 0x02;  // from-DS

// 64-bit mix used to derive keystream seeds (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in [0,1) from the top 53 bits; avoids
// std::uniform_real_distribution, whose output is implementation-defined.
double next_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void append_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t read_le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void append_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

const std::array<std::uint32_t, 256>& crc_table() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? (0xedb88320u ^ (c >> 1)) : (c >> 1);
      t[i] = c;
    }
    return t;
  }();
  return table;
}

}  // namespace

BitVector bytes_to_bits(const std::vector<std::uint8_t>& bytes) {
  BitVector bits;
  bits.reserve(bytes.size() * 8);
  for (std::uint8_t b : bytes)
    for (int i = 7; i >= 0; --i) bits.push_back((b >> i) & 1);
  return bits;
}

std::vector<std::uint8_t> bits_to_bytes(const BitVector& bits) {
  if (bits.size() % 8 != 0)
    throw std::invalid_argument("bits_to_bytes: length must be a multiple of 8");
  std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    bytes[i / 8] = static_cast<std::uint8_t>((bytes[i / 8] << 1) |
                                             (bits[i] & 1));
  return bytes;
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
  const auto& table = crc_table();
  std::uint32_t c = 0xffffffffu;
  for (std::size_t i = 0; i < len; ++i)
    c = table[(c ^ data[i]) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

std::uint32_t crc32(const std::vector<std::uint8_t>& data) {
  return crc32(data.data(), data.size());
}

std::vector<std::uint8_t> SubHeader::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(kSize);
  // Receiver 02:00:00:00:00:<id>.
  out.insert(out.end(), {0x02, 0x00, 0x00, 0x00, 0x00, receiver_id});
  // Source 02:00:00:00:00:FE (the access point).
  out.insert(out.end(), {0x02, 0x00, 0x00, 0x00, 0x00, 0xfe});
  append_le16(out, sequence);
  out.push_back(0x00);
  out.push_back(0x00);
  return out;
}

SubHeader SubHeader::parse(const std::uint8_t* data) {
  SubHeader h;
  h.receiver_id = data[5];
  h.sequence = read_le16(data + 12);
  return h;
}

std::vector<std::uint8_t> AggFrame::serialize() const {
  std::vector<std::uint8_t> out = mac_header;
  for (std::size_t i = kHeaderMapCapacity; i < map.size(); ++i) {
    out.push_back(map[i].station_id);
    append_le16(out, map[i].offset_bytes);
  }
  for (const auto& seg : segments) out.insert(out.end(), seg.begin(), seg.end());
  return out;
}

BitVector AggFrame::serialize_bits() const { return bytes_to_bits(serialize()); }

std::size_t coded_length_bytes(std::size_t info_bytes, double code_rate) {
  if (!(code_rate > 0.0 && code_rate <= 1.0))
    throw std::invalid_argument("coded_length_bytes: rate must be in (0,1]");
  const double bits = std::ceil(8.0 * static_cast<double>(info_bytes) /
                                code_rate);
  return (static_cast<std::size_t>(bits) + 7) / 8;
}

std::uint64_t station_seed(std::uint8_t station_id) {
  return mix64(0x6d64616767ULL ^ (static_cast<std::uint64_t>(station_id) << 1));
}

std::vector<std::uint8_t> scramble_encode(const std::vector<std::uint8_t>& info,
                                          double code_rate,
                                          std::uint64_t seed) {
  std::vector<std::uint8_t> out(coded_length_bytes(info.size(), code_rate), 0);
  std::copy(info.begin(), info.end(), out.begin());
  std::mt19937_64 gen(seed);
  std::uint64_t word = 0;
  int have = 0;
  for (auto& b : out) {
    if (have == 0) {
      word = gen();
      have = 8;
    }
    b ^= static_cast<std::uint8_t>(word & 0xff);
    word >>= 8;
    --have;
  }
  return out;
}

std::vector<std::uint8_t> scramble_decode_prefix(
    const std::vector<std::uint8_t>& coded, std::size_t info_len,
    std::uint64_t seed) {
  if (info_len > coded.size())
    throw std::invalid_argument(
        "scramble_decode_prefix: info_len exceeds codeword length");
  std::vector<std::uint8_t> out(coded.begin(), coded.begin() + info_len);
  std::mt19937_64 gen(seed);
  std::uint64_t word = 0;
  int have = 0;
  for (auto& b : out) {
    if (have == 0) {
      word = gen();
      have = 8;
    }
    b ^= static_cast<std::uint8_t>(word & 0xff);
    word >>= 8;
    --have;
  }
  return out;
}

bool decode_feasible(double code_rate, double crossover, double margin) {
  if (!(code_rate > 0.0 && code_rate <= 1.0))
    throw std::invalid_argument("decode_feasible: rate must be in (0,1]");
  if (!(margin >= 0.0 && margin < 1.0))
    throw std::invalid_argument("decode_feasible: margin must be in [0,1)");
  return code_rate <= (1.0 - margin) * bsc_capacity(crossover);
}

AggFrame build_frame(const std::vector<Packet>& packets, FrameFormat format,
                     const std::vector<double>& code_rates) {
  if (packets.empty())
    throw std::invalid_argument("build_frame: at least one packet required");
  if (packets.size() > 255)
    throw std::invalid_argument("build_frame: at most 255 destinations");
  if (!code_rates.empty() && code_rates.size() != packets.size())
    throw std::invalid_argument(
        "build_frame: code_rates must be empty or one per packet");
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (packets[i].payload.empty())
      throw std::invalid_argument("build_frame: empty payload");
    for (std::size_t j = i + 1; j < packets.size(); ++j)
      if (packets[i].station_id == packets[j].station_id)
        throw std::invalid_argument("build_frame: duplicate station id");
    if (!code_rates.empty() &&
        !(code_rates[i] > 0.0 && code_rates[i] <= 1.0))
      throw std::invalid_argument("build_frame: code rate must be in (0,1]");
  }

  AggFrame frame;
  frame.format = format;
  const std::size_t extension_bytes =
      packets.size() > kHeaderMapCapacity
          ? (packets.size() - kHeaderMapCapacity) * kMapEntryBytes
          : 0;

  // Segment bodies first, so their offsets are known.
  std::size_t offset = kMacHeaderBytes + extension_bytes;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    SubHeader sub;
    sub.receiver_id = packets[i].station_id;
    sub.sequence = static_cast<std::uint16_t>(i);
    std::vector<std::uint8_t> body = sub.serialize();
    body.insert(body.end(), packets[i].payload.begin(),
                packets[i].payload.end());
    append_le32(body, crc32(body));
    const double rate = code_rates.empty() ? 1.0 : code_rates[i];
    if (format == FrameFormat::TimeSharing && rate < 1.0)
      body = scramble_encode(body, rate, station_seed(packets[i].station_id));
    if (offset > 0xffff)
      throw std::invalid_argument(
          "build_frame: frame too large for 16-bit segment offsets");
    frame.map.push_back({packets[i].station_id,
                         static_cast<std::uint16_t>(offset)});
    offset += body.size();
    frame.segments.push_back(std::move(body));
  }

  frame.mac_header.assign(kMacHeaderBytes, 0);
  frame.mac_header[0] = kFrameControl0;
  frame.mac_header[1] = kFrameControl1;
  frame.mac_header[2] = static_cast<std::uint8_t>(packets.size());
  for (std::size_t i = 0; i < std::min(frame.map.size(), kHeaderMapCapacity);
       ++i) {
    frame.mac_header[3 + i * kMapEntryBytes] = frame.map[i].station_id;
    frame.mac_header[4 + i * kMapEntryBytes] =
        static_cast<std::uint8_t>(frame.map[i].offset_bytes & 0xff);
    frame.mac_header[5 + i * kMapEntryBytes] =
        static_cast<std::uint8_t>(frame.map[i].offset_bytes >> 8);
  }
  frame.total_len = offset;
  return frame;
}

SegmentResult parse_frame(const BitVector& bits, std::uint8_t my_station_id,
                          FrameFormat format, double code_rate,
                          double channel_crossover, double margin) {
  const std::vector<std::uint8_t> bytes = bits_to_bytes(bits);
  SegmentResult res;
  if (bytes.size() < kMacHeaderBytes)
    throw std::invalid_argument("parse_frame: frame shorter than MAC header");
  if (bytes[0] != kFrameControl0 || bytes[1] != kFrameControl1)
    throw std::invalid_argument("parse_frame: unrecognized frame control");
  const std::size_t count = bytes[2];
  const std::size_t ext_entries =
      count > kHeaderMapCapacity ? count - kHeaderMapCapacity : 0;
  if (bytes.size() < kMacHeaderBytes + ext_entries * kMapEntryBytes)
    throw std::invalid_argument("parse_frame: truncated extension map");

  std::vector<SegmentMapEntry> map;
  map.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p =
        i < kHeaderMapCapacity
            ? bytes.data() + 3 + i * kMapEntryBytes
            : bytes.data() + kMacHeaderBytes +
                  (i - kHeaderMapCapacity) * kMapEntryBytes;
    map.push_back({p[0], read_le16(p + 1)});
  }

  const SegmentMapEntry* mine = nullptr;
  for (const auto& e : map)
    if (e.station_id == my_station_id) {
      mine = &e;
      break;
    }
  if (mine == nullptr) {
    res.status = SegmentStatus::NotAddressed;
    return res;
  }
  // Segment end: the smallest offset beyond mine, else the frame end.
  std::size_t end = bytes.size();
  for (const auto& e : map)
    if (e.offset_bytes > mine->offset_bytes && e.offset_bytes < end)
      end = e.offset_bytes;
  if (mine->offset_bytes + SubHeader::kSize + kFcsBytes > end ||
      end > bytes.size())
    throw std::invalid_argument("parse_frame: malformed segment bounds");

  std::vector<std::uint8_t> body(bytes.begin() + mine->offset_bytes,
                                 bytes.begin() + end);
  if (format == FrameFormat::TimeSharing && code_rate < 1.0) {
    res.threshold_capacity = (1.0 - margin) * bsc_capacity(channel_crossover);
    if (!decode_feasible(code_rate, channel_crossover, margin)) {
      res.status = SegmentStatus::DecodeFailed;
      return res;
    }
    // Recover the pre-coding body length: coded lengths are strictly
    // increasing in the info length, so the preimage (when it exists) is
    // unique and lies within a couple of bytes of len*rate.
    std::size_t info_len = 0;
    const long long approx = static_cast<long long>(
        std::floor(static_cast<double>(body.size()) * code_rate));
    for (long long n = approx + 2; n >= approx - 3 && n >= 1; --n) {
      const auto cand = static_cast<std::size_t>(n);
      if (cand <= body.size() && cand >= SubHeader::kSize + kFcsBytes &&
          coded_length_bytes(cand, code_rate) == body.size()) {
        info_len = cand;
        break;
      }
    }
    if (info_len == 0)
      throw std::invalid_argument(
          "parse_frame: codeword length matches no info length");
    body = scramble_decode_prefix(body, info_len,
                                  station_seed(my_station_id));
  }

  res.subheader = SubHeader::parse(body.data());
  const std::size_t data_len = body.size() - kFcsBytes;
  const std::uint32_t stored = read_le32(body.data() + data_len);
  res.fcs_ok = crc32(body.data(), data_len) == stored;
  if (format == FrameFormat::Erasure && !res.fcs_ok) {
    res.status = SegmentStatus::Erased;
    return res;
  }
  res.status = SegmentStatus::Delivered;
  res.payload.assign(body.begin() + SubHeader::kSize,
                     body.begin() + data_len);
  return res;
}

BitVector superpose(const std::vector<BitVector>& vectors) {
  if (vectors.empty())
    throw std::invalid_argument("superpose: at least one vector required");
  BitVector out = vectors.front();
  for (std::size_t i = 1; i < vectors.size(); ++i) {
    if (vectors[i].size() != out.size())
      throw std::invalid_argument("superpose: length mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] ^= vectors[i][j];
  }
  return out;
}

BitVector transmit_bsc(const BitVector& bits, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("transmit_bsc: p must lie in [0,1]");
  BitVector out = bits;
  std::mt19937_64 gen(seed);
  for (auto& b : out)
    if (next_unit(gen) < p) b ^= 1;
  return out;
}

std::vector<LayerOutcome> nested_decode(
    const BitVector& received, const std::vector<SuperposedLayer>& layers,
    double margin) {
  if (layers.empty())
    throw std::invalid_argument("nested_decode: at least one layer required");
  if (received.size() % 8 != 0)
    throw std::invalid_argument(
        "nested_decode: received length must be a whole number of bytes");
  for (std::size_t i = 1; i < layers.size(); ++i)
    if (layers[i].effective_crossover >
        layers[i - 1].effective_crossover + 1e-15)
      throw std::invalid_argument(
          "nested_decode: layers must be ordered most-protected first "
          "(non-increasing effective crossover)");

  std::vector<std::uint8_t> residual = bits_to_bytes(received);
  std::vector<LayerOutcome> outcomes;
  outcomes.reserve(layers.size());
  bool failed = false;
  for (const auto& layer : layers) {
    LayerOutcome o;
    o.station_id = layer.station_id;
    o.capacity = bsc_capacity(layer.effective_crossover);
    if (failed) {
      o.blocked = true;
      outcomes.push_back(std::move(o));
      continue;
    }
    if (!decode_feasible(layer.code_rate, layer.effective_crossover, margin)) {
      failed = true;
      outcomes.push_back(std::move(o));
      continue;
    }
    // Idealized successive decoding: the layer decodes exactly, so its
    // codeword can be re-encoded and subtracted without error.
    std::vector<std::uint8_t> codeword = scramble_encode(
        layer.info, layer.code_rate, station_seed(layer.station_id));
    if (codeword.size() > residual.size())
      throw std::invalid_argument(
          "nested_decode: layer codeword exceeds the received vector");
    for (std::size_t j = 0; j < codeword.size(); ++j)
      residual[j] ^= codeword[j];
    o.decoded = true;
    o.payload = layer.info;
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

BitVector corrupt_segments(const AggFrame& frame, double p,
                           std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("corrupt_segments: p must lie in [0,1]");
  BitVector bits = frame.serialize_bits();
  std::size_t data_start = frame.total_len;
  for (const auto& e : frame.map)
    data_start = std::min<std::size_t>(data_start, e.offset_bytes);
  std::mt19937_64 gen(seed);
  for (std::size_t i = data_start * 8; i < bits.size(); ++i)
    if (next_unit(gen) < p) bits[i] ^= 1;
  return bits;
}

std::string hex_dump(const std::vector<std::uint8_t>& bytes) {
  static const char* kHex = "0123456789abcdef";
  std::ostringstream out;
  for (std::size_t i = 0; i < bytes.size(); i += 16) {
    out << kHex[(i >> 12) & 0xf] << kHex[(i >> 8) & 0xf] << kHex[(i >> 4) & 0xf]
        << kHex[i & 0xf] << ": ";
    for (std::size_t j = i; j < std::min(bytes.size(), i + 16); ++j) {
      out << kHex[bytes[j] >> 4] << kHex[bytes[j] & 0xf];
      out << ((j + 1 < std::min(bytes.size(), i + 16)) ? " " : "");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mdagg
