// SPDX-License-Identifier: Apache-2.0
//
// 802.11 DCF saturation model: attempt probabilities under binary exponential
// backoff with a finite retry limit, per-class failure probabilities, frame
// transmission durations, and the expected MAC slot time.
//
// Population model: one access point (index 0) plus two station classes.
// Class 1 stations sit on a lossy link (their uplink frames can be erased);
// class 2 stations and the AP fail only by collision.  All stations of a
// class share one attempt probability.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "mdagg/config.hpp"

namespace mdagg {

// MAC timing/size constants (802.11g defaults) plus the PHY rate table.
struct MacParams {
  double t_sifs_us = 16.0;
  double t_phyhdr_us = 20.0;     // preamble+PLCP of a regular frame
  double t_phyhdr1_us = 36.0;    // preamble+PLCP of an aggregated frame
  double t_ack_us = 24.0;
  double t_difs_us = 34.0;
  double idle_slot_sigma_us = 9.0;
  double l_subhdr_bytes = 16.0;  // per-destination sub-header
  double l_fcs_bytes = 4.0;      // per-sub-frame checksum
  double l_machdr_bytes = 24.0;  // frame MAC header
  int cw_min = 16;
  int cw_max = 1024;
  int retry_limit_m = 7;
  // PHY rate -> data bits per OFDM symbol (802.11a/g).
  std::map<double, int> rate_table = {{6, 24},   {9, 36},   {12, 48},
                                      {18, 72},  {24, 96},  {36, 144},
                                      {48, 192}, {54, 216}};

  // log2(cw_max / cw_min): the backoff stage after which the window stops
  // doubling.
  int backoff_stages() const;
  // DBPS for a rate; throws std::invalid_argument listing available rates.
  int dbps_for(double rate_mbps) const;
  // Per-destination framing overhead in bytes (sub-header + FCS).
  double sub_overhead_bytes() const { return l_subhdr_bytes + l_fcs_bytes; }

  // Reads mac.* keys (names match the field names without the unit suffix,
  // e.g. mac.t_sifs, mac.cw_min); absent keys keep their defaults.
  static MacParams from_config(const KeyValueConfig& cfg,
                               const std::string& prefix = "mac.");
};

// Solved attempt/failure probabilities.  tau0: AP, tau1: class 1, tau2:
// class 2.  pf0 == pf2 whenever class 2 and the AP have no channel error
// term, which makes tau0 == tau2.
struct AttemptState {
  double tau0 = 0.0, tau1 = 0.0, tau2 = 0.0;
  double pf0 = 0.0, pf1 = 0.0, pf2 = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

// Slot-type probabilities and the expected MAC slot duration in µs.
struct SlotTiming {
  double t_ap_us = 0.0, t_class1_us = 0.0, t_class2_us = 0.0;
  double p_idle = 0.0, p_ap = 0.0, p_t1 = 0.0, p_t2 = 0.0;
  double expected_slot_us = 0.0;
};

// Attempt probability of a saturated node whose transmissions fail with
// probability pf, under binary exponential backoff (window W doubling for
// backoff_stages() stages, retry limit m).  Continuous and strictly
// decreasing on [0, 1); the removable singularities at pf = 0.5 and pf = 1
// are patched by nearby evaluation.  Throws std::domain_error outside [0, 1].
double bianchi_tau(double pf, const MacParams& params);

struct FailureProbs {
  double pf0 = 0.0, pf1 = 0.0, pf2 = 0.0;
};

// Two-class failure probabilities given attempt probabilities.  pe1_up is the
// probability a class-1 uplink frame is erased by the channel given no
// collision.  With n1 = 0, pf1 is reported as 0.
FailureProbs failure_probs(double tau0, double tau1, double tau2, int n1,
                           int n2, double pe1_up);

// Generalized per-station form: index 0 is the AP; station i fails if any
// other station transmits in the same slot or its own frame (frame_bits[i]
// bits at first-event error probability pus[i]) is erased.
// pf_i = 1 - (1 - pc_i)(1 - pe_i).  Throws std::invalid_argument on length
// mismatch.
std::vector<double> failure_probs_general(const std::vector<double>& taus,
                                          const std::vector<double>& frame_bits,
                                          const std::vector<double>& pus);

// Solves tau = bianchi_tau(pf(tau)) jointly for the AP and both classes.
// pe1_up is the class-1 uplink erasure probability (already evaluated for the
// chosen uplink payload).  Residual < 1e-10 guaranteed on return; throws
// ConvergenceError after 10000 iterations.  When pe1_up == 0 the system is
// symmetric and solved by bisection on the reduced scalar equation; otherwise
// by damped (alpha = 0.5) iteration.
AttemptState solve_fixed_point(int n1, int n2, double pe1_up,
                               const MacParams& params);

// Overload taking pe as a function of the uplink payload in bytes; binds
// pe1_up = pe_of_payload(payload_bytes) and delegates.
AttemptState solve_fixed_point(int n1, int n2,
                               const std::function<double(double)>& pe_of_payload,
                               double payload_bytes, const MacParams& params);

// On-air duration of a frame with `payload_bytes` of payload (MAC header and
// FCS are added internally): 4 µs per OFDM symbol, whole symbols.
// payload_bytes may be fractional (analytic payload sizes); the result is
// still quantized to whole symbols.
double tx_duration_us(double payload_bytes, double rate_mbps,
                      const MacParams& params);

// Fixed per-transmission overhead: DIFS + 2 PHY headers + SIFS + ACK.
// Aggregated frames carry the longer aggregate PHY header once:
// + (t_phyhdr1 - t_phyhdr).
double frame_overheads_us(const MacParams& params, bool aggregated);

// Expected slot duration, combining the four slot types (idle, AP
// transmission, class-1 transmission, class-2 transmission).  Durations must
// satisfy t_ap >= t1 >= t2 (throws std::invalid_argument otherwise; callers
// with empty classes pass the neighbouring duration).
SlotTiming slot_timing(const AttemptState& state, int n1, int n2, double t_ap,
                       double t1, double t2, const MacParams& params);

}  // namespace mdagg
