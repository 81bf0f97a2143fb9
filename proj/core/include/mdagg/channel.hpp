// SPDX-License-Identifier: Apache-2.0
//
// Binary-symmetric-channel and packet-erasure-channel mathematics, plus
// ingestion of measured/synthetic link-quality tables.
//
// A BSC link is characterized by its per-bit crossover probability p.  A
// packet-erasure link is characterized by the first-event error probability
// p_u, inferred from a measured frame error rate over frames of l bits via
// p_u = 1 - (1-FER)^(1/l); a frame of L bits is then erased with probability
// 1 - (1-p_u)^L.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mdagg {

// -p*log2(p) - (1-p)*log2(1-p); H(0) = H(1) = 0 by continuity.
// Throws std::domain_error outside [0,1].
double binary_entropy(double p);

// 1 - binary_entropy(p): capacity of a BSC in bits per channel use.
double bsc_capacity(double p);

// Crossover of the cascade/XOR of two independent BSCs: q(1-p) + (1-q)p.
// Commutative and associative; 0.5 is absorbing.  Throws std::domain_error
// outside [0,1].
double effective_crossover(double p, double q);

// p_u = 1 - (1-fer)^(1/measured_bits).  Requires 0 <= fer < 1 (fer = 1 would
// force every frame length to erase) and measured_bits >= 1; throws
// std::domain_error otherwise.
double first_event_error_from_fer(double fer, std::int64_t measured_bits);

// 1 - (1-pu)^frame_bits; monotone nondecreasing in frame_bits.  frame_bits is
// a real so callers can pass analytic (non-integer) frame lengths.
double frame_erasure_prob(double pu, double frame_bits);

// One measured row: link quality at (rssi, phy rate).
struct ChannelRow {
  double rssi_dbm = 0.0;
  double phy_rate_mbps = 0.0;
  double bsc_crossover = 0.0;     // in [0, 0.5]
  double frame_error_rate = 0.0;  // in [0, 1)
  std::int64_t measured_frame_bits = 8640;
};

// Lookup table over ChannelRows.  Same-rate rows are interpolated linearly in
// rssi; queries outside the measured rssi range clamp to the nearest row;
// unknown rates are rejected with a message listing the available rates.
class ChannelTable {
 public:
  static ChannelTable from_rows(std::vector<ChannelRow> rows);
  // CSV with header rssi_dbm,phy_rate_mbps,bsc_crossover,frame_error_rate,
  // measured_frame_bits; '#' lines are comments.
  static ChannelTable from_csv(const std::string& path);

  // Per-bit crossover probability for the link.
  double crossover_at(double rssi_dbm, double rate_mbps) const;
  // First-event error probability derived from the interpolated frame error
  // rate at the row's measured_frame_bits.
  double first_event_error_at(double rssi_dbm, double rate_mbps) const;

  // Distinct PHY rates present, ascending.
  const std::vector<double>& rates() const noexcept { return rates_; }
  bool empty() const noexcept { return rows_.empty(); }
  const std::vector<ChannelRow>& rows() const noexcept { return rows_; }

 private:
  double interpolate(double rssi, double rate, double ChannelRow::*field) const;

  std::vector<ChannelRow> rows_;  // sorted by (rate, rssi)
  std::vector<double> rates_;
};

// Convenience free function mirroring crossover_at.
double crossover_for(const ChannelTable& table, double rssi_dbm,
                     double rate_mbps);

}  // namespace mdagg
