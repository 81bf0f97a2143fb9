// SPDX-License-Identifier: Apache-2.0
//
// Payload sizing under max-min fairness and throughput evaluation for the
// three downlink aggregation schemes, plus the multicast specialization and
// PHY-rate optimization.
//
// Scheme overview, for an aggregate frame of L bytes serving n1 class-1
// (lossy-link) and n2 class-2 (clean-link) destinations, each sub-frame
// carrying 20 bytes of sub-header+FCS overhead:
//   Uncoded       - class-1 sub-frames face erasure; fairness pads x1 down
//                   so the expected delivered bytes match class 2.
//   TimeSharing   - class-1 segments are capacity-coded for the class-1 BSC;
//                   every flow carries the same payload x.
//   Superposition - class-1 and class-2 codewords of L bytes each are XORed;
//                   the power split beta equalizes the two classes' payloads.
//   TimeSharingMultiRate - time sharing with class-2 segments at 54 Mbps and
//                   class-1 segments at a chosen (lower) rate; the frame
//                   budget is the airtime of L bytes at the class-1 rate.
// Uplink flows are equalized with downlink flows; class-1 uplink is
// capacity-coded under the coded schemes and plain (erasure-prone) under
// Uncoded.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdagg/channel.hpp"
#include "mdagg/errors.hpp"
#include "mdagg/mac_model.hpp"

namespace mdagg {

enum class Scheme { Uncoded, TimeSharing, Superposition, TimeSharingMultiRate };
enum class Traffic { SaturatedUnicast, Multicast };

// How the AP term of the network throughput counts downlink payloads:
// PerClass sums one expected sub-frame per class (the literal closed form);
// PerStation weights by station counts (matches what a simulated aggregate
// delivers).  Per-flow throughputs are identical under both.
enum class X0Weighting { PerClass, PerStation };

const char* to_string(Scheme s);
const char* to_string(Traffic t);
std::optional<Scheme> scheme_from_string(const std::string& name);

struct Scenario {
  int n1 = 0;
  int n2 = 0;
  double rssi_class1 = 0.0;
  double rssi_class2 = 0.0;
  double frame_budget_l = 65535.0;  // aggregate payload budget in bytes
  Scheme scheme = Scheme::TimeSharing;
  Traffic traffic = Traffic::SaturatedUnicast;
  MacParams params;
  ChannelTable channel;

  // Throws InfeasibleError when the budget cannot hold one sub-header+FCS per
  // destination, or std::invalid_argument when counts are negative/empty.
  void validate() const;
};

struct SchemeSolution {
  Scheme scheme = Scheme::TimeSharing;
  double phy_rate_down = 0.0;         // class-1 (and single-rate) downlink rate
  double phy_rate_down_class2 = 0.0;  // differs only for TimeSharingMultiRate
  std::optional<double> beta;         // superposition power split
  double x1_down = 0.0, x2_down = 0.0;  // information payload bytes
  double x1_up = 0.0, x2_up = 0.0;
  double e1_down = 0.0, e2_down = 0.0;  // expected delivered bytes
  double e1_up = 0.0, e2_up = 0.0;
  AttemptState attempt;
  SlotTiming slots;
  double network_throughput_mbps = 0.0;           // PerClass AP term
  double network_throughput_weighted_mbps = 0.0;  // PerStation AP term
  // One entry per flow class present, order: down1, down2, up1, up2; every
  // entry is equal under max-min fairness.
  std::vector<double> per_flow_throughputs_mbps;
};

struct MulticastThroughput {
  double per_station_class1_mbps = 0.0;
  double per_station_class2_mbps = 0.0;
  double sum_mbps = 0.0;
  double phy_rate = 0.0;
};

// Power split for superposition: the unique beta in (0, 0.5) with
// n2*(1 - H(beta o p)) == n1*H(beta), where o is effective_crossover.
// Equalizes the two classes' per-destination payloads.  Throws
// InfeasibleError when no root exists (capacity-zero channel).
double solve_beta(int n1, int n2, double p);

// Per-scheme sizing at a fixed PHY rate.  All throw InfeasibleError when the
// fairness system has no solution within the frame budget.
SchemeSolution size_uncoded(const Scenario& sc, double rate_mbps);
SchemeSolution size_timesharing(const Scenario& sc, double rate_mbps);
SchemeSolution size_superposition(const Scenario& sc, double rate_mbps);
SchemeSolution size_timesharing_multirate(const Scenario& sc,
                                          double rate_class1_mbps);
// Dispatches on sc.scheme.
SchemeSolution size_scheme(const Scenario& sc, double rate_mbps);

// Network throughput in Mbps from solved components:
//   S = 8 * (X0 + n1*X1 + n2*X2) / E_T
// with X0 the AP term (weighting as selected), X1/X2 the per-station uplink
// terms.  E terms are bytes, E_T µs.
double network_throughput_mbps(const AttemptState& st, int n1, int n2,
                               double e1_down, double e2_down, double e1_up,
                               double e2_up, double expected_slot_us,
                               X0Weighting weighting);

// Saturated multicast: the AP is the only transmitter (tau0 = 2/(W+1), no
// uplink, no collisions); each class-i station independently receives its
// group's payload.  Per-station throughput is independent of group sizes;
// sum scales with n1, n2.  Only Uncoded and TimeSharing apply.
MulticastThroughput multicast_throughput(const Scenario& sc, double rate_mbps,
                                         Scheme scheme);

struct RateSweepEntry {
  double rate_mbps = 0.0;
  bool feasible = false;
  double throughput_mbps = 0.0;
  std::string reason;  // infeasibility constraint when !feasible
};

struct RateOptimum {
  SchemeSolution best;
  std::vector<RateSweepEntry> sweep;  // ascending by rate
};

// Evaluates every rate in the channel table (class-1 rate for multirate,
// class 2 pinned at 54), returns the argmax by network throughput with ties
// broken toward the higher rate.  Throws InfeasibleError when every rate is
// infeasible.
RateOptimum optimize_rate(const Scenario& sc);

// Multicast counterpart of optimize_rate.
struct MulticastOptimum {
  MulticastThroughput best;
  std::vector<RateSweepEntry> sweep;
};
MulticastOptimum optimize_rate_multicast(const Scenario& sc, Scheme scheme);

}  // namespace mdagg
