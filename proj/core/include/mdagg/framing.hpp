// SPDX-License-Identifier: Apache-2.0
//
// Bit-exact construction, corruption, and decoding of multi-destination
// aggregated frames.
//
// Frame layout (erasure format):
//   [24 B MAC header: 2 B frame-control, 1 B map count, up to 7 x 3 B map
//    entries (station id, 16-bit LE segment offset), zero padding]
//   [segment 0: 16 B sub-header | payload | 4 B CRC-32]
//   [segment 1: ...] ...
// Frames with more than 7 destinations store the surplus map entries in an
// extension block placed between the header and the first segment; the
// extension counts against the payload budget.  The MAC header (and map) is
// modeled as error-free; segment bodies face the channel.
//
// Coded (time-sharing) format: each segment body (sub-header + payload +
// CRC) is expanded to ceil(len/code_rate) bytes by an idealized
// capacity-achieving code, modeled as a seeded scramble of the zero-padded
// body.  Decoding succeeds iff code_rate <= (1 - margin) * bsc_capacity(p)
// for the crossover p the receiver experiences; on success the descrambled
// prefix is returned (the model verifies rate accounting, not code
// construction).
//
// Superposition: per-receiver codewords of equal length are XORed.  Nested
// decoding peels layers most-protected-first, re-encoding and subtracting
// each decoded layer.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mdagg {

// One bit per element, values 0/1.
using BitVector = std::vector<std::uint8_t>;

BitVector bytes_to_bits(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> bits_to_bytes(const BitVector& bits);

// CRC-32 (polynomial 0xEDB88320 reflected form, init/xorout 0xFFFFFFFF);
// crc32 of "123456789" is 0xCBF43926.
std::uint32_t crc32(const std::uint8_t* data, std::size_t len);
std::uint32_t crc32(const std::vector<std::uint8_t>& data);

struct SubHeader {
  static constexpr std::size_t kSize = 16;  // 6+6+2 bytes + 2 reserved
  std::uint8_t receiver_id = 0;
  std::uint16_t sequence = 0;

  // receiver 02:00:00:00:00:<id>, source 02:00:00:00:00:FE (the AP),
  // 16-bit LE sequence, 2 reserved zero bytes.
  std::vector<std::uint8_t> serialize() const;
  static SubHeader parse(const std::uint8_t* data);
};

struct SegmentMapEntry {
  std::uint8_t station_id = 0;
  std::uint16_t offset_bytes = 0;  // from frame start to segment start
};

enum class FrameFormat { Erasure, TimeSharing };

struct Packet {
  std::uint8_t station_id = 0;
  std::vector<std::uint8_t> payload;
};

struct AggFrame {
  std::vector<std::uint8_t> mac_header;  // 24 bytes
  std::vector<SegmentMapEntry> map;      // all entries (header + extension)
  std::vector<std::vector<std::uint8_t>> segments;  // on-air segment bytes
  FrameFormat format = FrameFormat::Erasure;
  std::size_t total_len = 0;  // header + extension + segments

  std::vector<std::uint8_t> serialize() const;
  BitVector serialize_bits() const;
};

// Builds an aggregate frame.  code_rates[i] applies to packets[i] under the
// TimeSharing format (1.0 = uncoded); it must be in (0, 1].  Throws
// std::invalid_argument on duplicate station ids, empty payloads, or a rate
// outside (0, 1].
AggFrame build_frame(const std::vector<Packet>& packets, FrameFormat format,
                     const std::vector<double>& code_rates = {});

enum class SegmentStatus { Delivered, Erased, DecodeFailed, NotAddressed };

struct SegmentResult {
  SegmentStatus status = SegmentStatus::NotAddressed;
  std::vector<std::uint8_t> payload;  // without sub-header/CRC
  SubHeader subheader;
  bool fcs_ok = false;
  // Capacity threshold the decode was checked against (TimeSharing only).
  double threshold_capacity = 0.0;
};

// Locates my_station_id's segment via the (error-free) header map and
// decodes it.  Erasure format: CRC failure => Erased.  TimeSharing format:
// success iff code_rate <= (1-margin)*bsc_capacity(channel_crossover); the
// payload is the descrambled prefix with fcs_ok reporting its CRC.
SegmentResult parse_frame(const BitVector& bits, std::uint8_t my_station_id,
                          FrameFormat format, double code_rate = 1.0,
                          double channel_crossover = 0.0, double margin = 0.05);

// Bitwise XOR of equal-length vectors; throws std::invalid_argument on
// length mismatch or empty input list.
BitVector superpose(const std::vector<BitVector>& vectors);

// Flips each bit independently with probability p (deterministic in seed).
BitVector transmit_bsc(const BitVector& bits, double p, std::uint64_t seed);

// Coded length for `info_bytes` at `code_rate`: ceil(ceil(8*info/rate)/8)
// bytes.  Strictly monotone in info_bytes for rate <= 1.
std::size_t coded_length_bytes(std::size_t info_bytes, double code_rate);

// Idealized encode: zero-pad `info` to coded_length_bytes(|info|, rate), XOR
// with the keystream of `seed`.  scramble_decode_prefix inverts it given the
// original info length.
std::vector<std::uint8_t> scramble_encode(const std::vector<std::uint8_t>& info,
                                          double code_rate, std::uint64_t seed);
std::vector<std::uint8_t> scramble_decode_prefix(
    const std::vector<std::uint8_t>& coded, std::size_t info_len,
    std::uint64_t seed);

// Keystream seed bound to a station id (used by the scramble model).
std::uint64_t station_seed(std::uint8_t station_id);

// Decode-feasibility predicate of the idealized code model.
bool decode_feasible(double code_rate, double crossover, double margin);

// One superposed layer: the codeword of `info` at `code_rate`, scrambled
// with station_seed(station_id) and XORed into the transmitted vector.
// effective_crossover is the crossover probability the *observing receiver*
// sees for this layer at its decode step (interference from layers not yet
// subtracted is already folded in by the caller).
struct SuperposedLayer {
  std::uint8_t station_id = 0;
  double code_rate = 1.0;
  double effective_crossover = 0.0;
  std::vector<std::uint8_t> info;
};

struct LayerOutcome {
  std::uint8_t station_id = 0;
  bool decoded = false;
  bool blocked = false;  // an earlier layer failed; this one never attempted
  std::vector<std::uint8_t> payload;
  double capacity = 0.0;  // capacity of the layer's effective channel
};

// Successive decoding: layers must be ordered most-protected first
// (non-increasing effective_crossover; throws std::invalid_argument
// otherwise).  Each layer decodes iff its rate clears the idealized
// threshold; on success the layer is re-encoded and XOR-subtracted, else all
// later layers are reported blocked.
std::vector<LayerOutcome> nested_decode(const BitVector& received,
                                        const std::vector<SuperposedLayer>& layers,
                                        double margin = 0.05);

// Flips bits only within segment bodies (MAC header and extension block are
// error-free by model assumption).
BitVector corrupt_segments(const AggFrame& frame, double p, std::uint64_t seed);

// Debug hex dump: 16 bytes per line with offsets.
std::string hex_dump(const std::vector<std::uint8_t>& bytes);

}  // namespace mdagg
