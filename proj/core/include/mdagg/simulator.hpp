// SPDX-License-Identifier: Apache-2.0
//
// Slot-level discrete-event simulation of a WLAN: one AP aggregating
// downlink traffic to n stations (optionally sending uplink as well), DCF
// contention with binary exponential backoff, DropTail FIFO queues, and
// either single-destination or multi-destination frame aggregation.
//
// Time advances in MAC slots.  Every contender with backoff 0 transmits in
// the slot; two or more transmitters collide.  A transmission slot lasts the
// longest participant's frame duration (plus overheads); backoff counters of
// other nodes freeze during it.  Collisions double the contention window up
// to cw_max; a frame is dropped after retry_limit_m retries.  Aggregated
// downlink frames are acknowledged as a unit (single ACK); sub-frames erased
// by the channel are not retransmitted.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdagg/channel.hpp"
#include "mdagg/mac_model.hpp"

namespace mdagg {

enum class ArrivalKind { Poisson, Cbr };
enum class Aggregation { SingleDest, MultiDest };
enum class SimCoding { Uncoded, TimeSharing };

struct SimConfig {
  int n_stations = 10;      // downlink destinations (also uplink senders)
  int n_class1 = 0;         // first n_class1 stations are class 1 (lossy)
  double rssi_class1 = 35.0;
  double rssi_class2 = 35.0;
  ArrivalKind arrival = ArrivalKind::Poisson;
  double arrival_rate = 2000.0;  // packets/s per flow (Poisson) or bits/s (CBR)
  int packet_size = 500;         // application payload bytes
  int header_bytes = 40;         // RTP/UDP/IP overhead stored with the packet
  int queue_capacity = 200;      // packets, DropTail
  int max_agg_bytes = 65535;     // cap on aggregated segment bytes
  Aggregation aggregation = Aggregation::MultiDest;
  SimCoding coding = SimCoding::Uncoded;
  double phy_rate_down = 54.0;
  double phy_rate_up = 54.0;
  bool rts_cts = false;
  bool uplink_enabled = true;
  bool saturate_downlink = false;  // keep the AP queue topped up round-robin
  double sim_duration_s = 10.0;
  std::uint64_t seed = 1;
  double ts_margin = 0.05;  // coding margin of the idealized code model
  MacParams params;
  std::optional<ChannelTable> channel;  // required when any class is lossy

  static SimConfig from_config(const KeyValueConfig& cfg);
};

// Queued packet: stored size = packet_size + header_bytes.
struct QueuedPacket {
  int flow_id = 0;        // destination station for downlink
  double arrival_time_us = 0.0;
  int stored_bytes = 0;
};

// AP interface queue: DropTail FIFO.
class ApQueue {
 public:
  explicit ApQueue(int capacity) : capacity_(capacity) {}
  bool push(QueuedPacket p);  // false (and counts a drop) when full
  std::size_t size() const noexcept { return fifo_.size(); }
  std::int64_t drops() const noexcept { return drops_; }
  const std::vector<QueuedPacket>& packets() const noexcept { return fifo_; }
  std::vector<QueuedPacket>& packets() noexcept { return fifo_; }

 private:
  int capacity_;
  std::vector<QueuedPacket> fifo_;
  std::int64_t drops_ = 0;
};

// Aggregation policies.  frame_cost(packet) gives the bytes a packet
// contributes to the aggregate (stored + sub-header + FCS, expanded by the
// code rate when the destination's segment is coded).  Selected packets are
// removed from the queue; FIFO order among the rest persists.
// SingleDest: every queued packet addressed to the head's destination, up to
// max_bytes.  MultiDest: the FIFO prefix, up to max_bytes.
using PacketCost = std::function<long long(const QueuedPacket&)>;
std::vector<QueuedPacket> aggregate_single_dest(ApQueue& queue, int max_bytes,
                                                const PacketCost& frame_cost);
std::vector<QueuedPacket> aggregate_multi_dest(ApQueue& queue, int max_bytes,
                                               const PacketCost& frame_cost);
// Flat-overhead conveniences: every packet costs stored + per_packet_overhead.
std::vector<QueuedPacket> aggregate_single_dest(ApQueue& queue, int max_bytes,
                                                int per_packet_overhead);
std::vector<QueuedPacket> aggregate_multi_dest(ApQueue& queue, int max_bytes,
                                               int per_packet_overhead);

struct FlowDetail {
  int flow_id = 0;
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t queue_drops = 0;
  std::int64_t retry_drops = 0;
  std::int64_t channel_losses = 0;  // erased sub-frames (not retransmitted)
  std::int64_t in_queue = 0;        // left over at simulation end
  std::int64_t in_flight = 0;       // inside the frame being sent at end
  double throughput_bps = 0.0;      // stored bytes delivered
  double mean_delay_s = 0.0;
};

struct SimMetrics {
  double per_flow_throughput_bps = 0.0;  // mean over downlink flows
  double mean_downlink_delay_s = 0.0;
  double mean_pkts_per_agg_frame = 0.0;
  double collision_rate = 0.0;  // colliding node-attempts / node-attempts
  double drop_rate = 0.0;       // queue drops / downlink arrivals
  double network_throughput_mbps = 0.0;  // down + up, stored bytes
  double downlink_throughput_mbps = 0.0;
  double uplink_throughput_mbps = 0.0;
  std::int64_t ap_tx_attempts = 0;
  std::int64_t ap_collisions = 0;
  std::int64_t frames_sent = 0;
  double sim_duration_s = 0.0;
  std::vector<FlowDetail> per_flow;  // downlink flows, then uplink flows

  std::string to_json(int indent = 2) const;
};

// Runs the simulation; deterministic for a given (config, seed).
SimMetrics run(const SimConfig& config);

}  // namespace mdagg
