// SPDX-License-Identifier: Apache-2.0
#include "mdagg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mdagg/errors.hpp"

namespace mdagg {

bool ApQueue::push(QueuedPacket p) {
  if (capacity_ > 0 && fifo_.size() >= static_cast<std::size_t>(capacity_)) {
    ++drops_;
    return false;
  }
  fifo_.push_back(std::move(p));
  return true;
}

std::vector<QueuedPacket> aggregate_multi_dest(ApQueue& queue, int max_bytes,
                                               const PacketCost& frame_cost) {
  std::vector<QueuedPacket> taken;
  auto& fifo = queue.packets();
  long long total = 0;
  std::size_t count = 0;
  while (count < fifo.size()) {
    const long long cost = frame_cost(fifo[count]);
    if (count > 0 && total + cost > max_bytes) break;
    total += cost;
    ++count;
  }
  taken.assign(fifo.begin(), fifo.begin() + count);
  fifo.erase(fifo.begin(), fifo.begin() + count);
  return taken;
}

std::vector<QueuedPacket> aggregate_single_dest(ApQueue& queue, int max_bytes,
                                                const PacketCost& frame_cost) {
  std::vector<QueuedPacket> taken;
  auto& fifo = queue.packets();
  if (fifo.empty()) return taken;
  const int dest = fifo.front().flow_id;
  long long total = 0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < fifo.size(); ++i) {
    const long long cost = frame_cost(fifo[i]);
    if (fifo[i].flow_id == dest &&
        (taken.empty() || total + cost <= max_bytes)) {
      total += cost;
      taken.push_back(fifo[i]);
    } else {
      fifo[kept++] = fifo[i];
    }
  }
  fifo.resize(kept);
  return taken;
}

std::vector<QueuedPacket> aggregate_multi_dest(ApQueue& queue, int max_bytes,
                                               int per_packet_overhead) {
  return aggregate_multi_dest(queue, max_bytes, [&](const QueuedPacket& p) {
    return static_cast<long long>(p.stored_bytes) + per_packet_overhead;
  });
}

std::vector<QueuedPacket> aggregate_single_dest(ApQueue& queue, int max_bytes,
                                                int per_packet_overhead) {
  return aggregate_single_dest(queue, max_bytes, [&](const QueuedPacket& p) {
    return static_cast<long long>(p.stored_bytes) + per_packet_overhead;
  });
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double next_unit(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Control-frame on-air time: the frame is `bytes` long in total (no MAC
// header is added) and rides at the 6 Mbps base rate.
double control_duration_us(int bytes, const MacParams& params) {
  const double dbps = params.dbps_for(6.0);
  return 4.0 * std::ceil((bytes * 8.0 + 22.0) / dbps);
}

struct ArrivalStream {
  double next_us = std::numeric_limits<double>::infinity();
  double interval_us = 0.0;  // CBR only
  std::mt19937_64 rng{0};
  double rate_per_us = 0.0;  // Poisson only

  void advance(ArrivalKind kind) {
    if (kind == ArrivalKind::Poisson)
      next_us += -std::log1p(-next_unit(rng)) / rate_per_us;
    else
      next_us += interval_us;
  }
};

struct Counters {
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t queue_drops = 0;
  std::int64_t retry_drops = 0;
  std::int64_t channel_losses = 0;
  std::int64_t in_queue = 0;
  std::int64_t in_flight = 0;
  std::int64_t delivered_bytes = 0;
  double delay_sum_us = 0.0;
};

// Backoff/retry state shared by the AP and the stations.
struct Contender {
  bool has_frame = false;
  int backoff = -1;
  int cw = 0;
  int retries = 0;

  void arm(int cw_min, std::mt19937_64& rng) {
    cw = cw_min;
    retries = 0;
    backoff = static_cast<int>(next_unit(rng) * cw);
  }
  void redraw_after_failure(int cw_max, std::mt19937_64& rng) {
    cw = std::min(cw * 2, cw_max);
    backoff = static_cast<int>(next_unit(rng) * cw);
  }
};

}  // namespace

SimConfig SimConfig::from_config(const KeyValueConfig& cfg) {
  SimConfig c;
  c.n_stations = static_cast<int>(cfg.get_int("sim.n_stations", c.n_stations));
  c.n_class1 = static_cast<int>(cfg.get_int("sim.n_class1", c.n_class1));
  c.rssi_class1 = cfg.get_double("sim.rssi_class1", c.rssi_class1);
  c.rssi_class2 = cfg.get_double("sim.rssi_class2", c.rssi_class2);
  const std::string arrival = cfg.get_string("sim.arrival", "poisson");
  if (arrival == "poisson")
    c.arrival = ArrivalKind::Poisson;
  else if (arrival == "cbr")
    c.arrival = ArrivalKind::Cbr;
  else
    throw ConfigError("sim.arrival must be poisson or cbr, got '" + arrival +
                      "'");
  c.arrival_rate = cfg.get_double("sim.arrival_rate", c.arrival_rate);
  c.packet_size = static_cast<int>(cfg.get_int("sim.packet_size", c.packet_size));
  c.header_bytes =
      static_cast<int>(cfg.get_int("sim.header_bytes", c.header_bytes));
  c.queue_capacity =
      static_cast<int>(cfg.get_int("sim.queue_capacity", c.queue_capacity));
  c.max_agg_bytes =
      static_cast<int>(cfg.get_int("sim.max_agg_bytes", c.max_agg_bytes));
  const std::string agg = cfg.get_string("sim.aggregation", "multi");
  if (agg == "multi" || agg == "multi-dest")
    c.aggregation = Aggregation::MultiDest;
  else if (agg == "single" || agg == "single-dest")
    c.aggregation = Aggregation::SingleDest;
  else
    throw ConfigError("sim.aggregation must be multi or single, got '" + agg +
                      "'");
  const std::string coding = cfg.get_string("sim.coding", "uncoded");
  if (coding == "uncoded")
    c.coding = SimCoding::Uncoded;
  else if (coding == "timesharing")
    c.coding = SimCoding::TimeSharing;
  else
    throw ConfigError("sim.coding must be uncoded or timesharing, got '" +
                      coding + "'");
  c.phy_rate_down = cfg.get_double("sim.phy_rate_down", c.phy_rate_down);
  c.phy_rate_up = cfg.get_double("sim.phy_rate_up", c.phy_rate_up);
  c.rts_cts = cfg.get_bool("sim.rts_cts", c.rts_cts);
  c.uplink_enabled = cfg.get_bool("sim.uplink_enabled", c.uplink_enabled);
  c.saturate_downlink =
      cfg.get_bool("sim.saturate_downlink", c.saturate_downlink);
  c.sim_duration_s = cfg.get_double("sim.duration_s", c.sim_duration_s);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("sim.seed", 1));
  c.ts_margin = cfg.get_double("sim.ts_margin", c.ts_margin);
  c.params = MacParams::from_config(cfg);
  if (cfg.has("channel.table"))
    c.channel =
        ChannelTable::from_csv(cfg.resolve_path(cfg.get_string("channel.table")));
  return c;
}

SimMetrics run(const SimConfig& config) {
  const int n = config.n_stations;
  if (n < 1) throw std::invalid_argument("simulator: n_stations must be >= 1");
  if (config.n_class1 < 0 || config.n_class1 > n)
    throw std::invalid_argument("simulator: n_class1 must lie in [0, n]");
  if (!(config.sim_duration_s > 0.0))
    throw std::invalid_argument("simulator: duration must be positive");
  const bool lossy = config.n_class1 > 0 || config.channel.has_value();
  if ((config.n_class1 > 0 || config.coding == SimCoding::TimeSharing) &&
      !config.channel.has_value())
    throw std::invalid_argument(
        "simulator: a channel table is required for lossy/coded scenarios");

  const MacParams& mp = config.params;
  const int stored_bytes = config.packet_size + config.header_bytes;
  const int sub_overhead = static_cast<int>(mp.sub_overhead_bytes());
  const double duration_us = config.sim_duration_s * 1e6;
  const double t_rts = control_duration_us(20, mp);
  const double t_cts = control_duration_us(14, mp);
  const double rts_success_us = t_rts + mp.t_sifs_us + t_cts + mp.t_sifs_us;
  const double rts_collision_us = t_rts + mp.t_sifs_us + t_cts + mp.t_difs_us;

  auto rssi_of = [&](int station) {
    return station < config.n_class1 ? config.rssi_class1 : config.rssi_class2;
  };
  // First-event error probability per station/direction, 0 without a table.
  auto pu_at = [&](int station, double rate) {
    if (!config.channel) return 0.0;
    return config.channel->first_event_error_at(rssi_of(station), rate);
  };
  // Idealized code rate for class-1 segments under time-sharing coding.
  auto code_rate_at = [&](int station, double rate) {
    const double p = config.channel->crossover_at(rssi_of(station), rate);
    return bsc_capacity(p) * (1.0 - config.ts_margin);
  };
  const bool coded = config.coding == SimCoding::TimeSharing;
  auto is_class1 = [&](int station) { return station < config.n_class1; };

  // Bytes a packet contributes to an aggregate (coded class-1 segments are
  // expanded to their on-air length).
  auto agg_cost = [&](int dest, int stored) {
    if (coded && is_class1(dest)) {
      const double r = code_rate_at(dest, config.phy_rate_down);
      if (r <= 0.0)
        throw InfeasibleError("class-1 channel capacity is zero");
      return static_cast<int>(
          std::ceil((stored + sub_overhead) / r));
    }
    return stored + sub_overhead;
  };

  // --- state ---
  std::mt19937_64 mac_rng(mix64(config.seed ^ 0x5ac5a11dULL));
  ApQueue ap_queue(config.queue_capacity);
  Contender ap;
  std::vector<QueuedPacket> ap_frame;
  long long ap_frame_bytes = 0;

  std::vector<ApQueue> up_queues;
  std::vector<Contender> stations(n);
  std::vector<QueuedPacket> station_frames(n);
  for (int i = 0; i < n; ++i) up_queues.emplace_back(config.queue_capacity);

  const int num_down_flows = n;
  const int num_up_flows = config.uplink_enabled ? n : 0;
  const int num_flows = num_down_flows + num_up_flows;
  std::vector<ArrivalStream> arrivals(num_flows);
  std::vector<Counters> flow_stats(num_flows);
  for (int f = 0; f < num_flows; ++f) {
    ArrivalStream& s = arrivals[f];
    s.rng.seed(mix64(config.seed + 0x9e3779b9ULL * (f + 1)));
    if (config.arrival == ArrivalKind::Poisson) {
      s.rate_per_us = config.arrival_rate / 1e6;
      if (s.rate_per_us > 0.0) {
        s.next_us = 0.0;
        s.advance(ArrivalKind::Poisson);
      }
    } else {
      // CBR: arrival_rate is bits/s; flows are staggered evenly.
      if (config.arrival_rate > 0.0) {
        s.interval_us = config.packet_size * 8.0 / config.arrival_rate * 1e6;
        s.next_us = s.interval_us * f / std::max(1, num_flows);
      }
    }
  }

  std::int64_t node_attempts = 0, colliding_attempts = 0;
  std::int64_t ap_tx_attempts = 0, ap_collisions = 0, frames_sent = 0;
  std::int64_t agg_packets_total = 0;
  int fill_rr = 0;  // round-robin cursor of the saturate top-up

  auto top_up_queue = [&](double now) {
    while (ap_queue.size() < static_cast<std::size_t>(config.queue_capacity)) {
      QueuedPacket p;
      p.flow_id = fill_rr;
      fill_rr = (fill_rr + 1) % n;
      p.arrival_time_us = now;
      p.stored_bytes = stored_bytes;
      ap_queue.push(p);
      ++flow_stats[p.flow_id].arrivals;
    }
  };

  auto ingest = [&](double now) {
    for (int f = 0; f < num_flows; ++f) {
      ArrivalStream& s = arrivals[f];
      while (s.next_us <= now && s.next_us <= duration_us) {
        QueuedPacket p;
        p.flow_id = f;
        p.arrival_time_us = s.next_us;
        p.stored_bytes = stored_bytes;
        ++flow_stats[f].arrivals;
        const bool ok = f < num_down_flows ? ap_queue.push(p)
                                           : up_queues[f - n].push(p);
        if (!ok) ++flow_stats[f].queue_drops;
        s.advance(config.arrival);
      }
    }
  };

  auto deliver_ap_frame = [&](double slot_end) {
    for (const QueuedPacket& p : ap_frame) {
      Counters& fs = flow_stats[p.flow_id];
      bool ok = true;
      if (lossy && config.channel) {
        if (coded && is_class1(p.flow_id)) {
          ok = true;  // rate is below the idealized decode threshold
        } else {
          const double pu = pu_at(p.flow_id, config.phy_rate_down);
          if (pu > 0.0) {
            const double pe = frame_erasure_prob(
                pu, 8.0 * (p.stored_bytes + sub_overhead));
            ok = next_unit(mac_rng) >= pe;
          }
        }
      }
      if (ok) {
        ++fs.delivered;
        fs.delivered_bytes += p.stored_bytes;
        fs.delay_sum_us += slot_end - p.arrival_time_us;
      } else {
        ++fs.channel_losses;  // erased sub-frames are not retransmitted
      }
    }
    agg_packets_total += static_cast<std::int64_t>(ap_frame.size());
    ++frames_sent;
    ap_frame.clear();
    ap.has_frame = false;
    ap.backoff = -1;
  };

  // Station frame on-air payload bytes (class-1 coded uplink is expanded).
  auto station_onair_bytes = [&](int station, int stored) {
    if (coded && is_class1(station)) {
      const double r = code_rate_at(station, config.phy_rate_up);
      if (r <= 0.0)
        throw InfeasibleError("class-1 channel capacity is zero");
      return std::ceil(stored / r);
    }
    return static_cast<double>(stored);
  };

  double now = 0.0;
  while (now < duration_us) {
    if (config.saturate_downlink) top_up_queue(now);
    ingest(now);

    // Pin head-of-line frames and arm fresh backoffs.
    if (!ap.has_frame && ap_queue.size() > 0) {
      const PacketCost frame_cost = [&](const QueuedPacket& p) {
        return static_cast<long long>(agg_cost(p.flow_id, p.stored_bytes));
      };
      ap_frame = config.aggregation == Aggregation::MultiDest
                     ? aggregate_multi_dest(ap_queue, config.max_agg_bytes,
                                            frame_cost)
                     : aggregate_single_dest(ap_queue, config.max_agg_bytes,
                                             frame_cost);
      ap_frame_bytes = 0;
      for (const QueuedPacket& p : ap_frame)
        ap_frame_bytes += agg_cost(p.flow_id, p.stored_bytes);
      ap.has_frame = true;
      ap.arm(mp.cw_min, mac_rng);
    }
    for (int i = 0; i < n && config.uplink_enabled; ++i) {
      if (!stations[i].has_frame && up_queues[i].size() > 0) {
        station_frames[i] = up_queues[i].packets().front();
        up_queues[i].packets().erase(up_queues[i].packets().begin());
        stations[i].has_frame = true;
        stations[i].arm(mp.cw_min, mac_rng);
      }
    }

    const bool ap_active = ap.has_frame;
    std::vector<int> tx_stations;
    bool any_active = ap_active;
    for (int i = 0; i < n; ++i) {
      if (!stations[i].has_frame) continue;
      any_active = true;
      if (stations[i].backoff == 0) tx_stations.push_back(i);
    }

    if (!any_active) {
      // Nobody contends: jump to the next arrival.
      double next_event = std::numeric_limits<double>::infinity();
      for (const ArrivalStream& s : arrivals)
        next_event = std::min(next_event, s.next_us);
      if (!(next_event < duration_us)) break;
      now = next_event;
      continue;
    }

    const bool ap_tx = ap_active && ap.backoff == 0;
    const int transmitters =
        static_cast<int>(tx_stations.size()) + (ap_tx ? 1 : 0);

    if (transmitters == 0) {
      // Idle slot: every active contender counts down.
      if (ap_active) --ap.backoff;
      for (int i = 0; i < n; ++i)
        if (stations[i].has_frame) --stations[i].backoff;
      now += mp.idle_slot_sigma_us;
      continue;
    }

    node_attempts += transmitters;
    if (ap_tx) ++ap_tx_attempts;

    // Frame durations of the participants.
    double ap_dur = 0.0;
    if (ap_tx)
      ap_dur = tx_duration_us(static_cast<double>(ap_frame_bytes),
                              config.phy_rate_down, mp) +
               frame_overheads_us(mp, /*aggregated=*/true);
    double max_station_dur = 0.0;
    for (int i : tx_stations)
      max_station_dur = std::max(
          max_station_dur,
          tx_duration_us(
              station_onair_bytes(i, station_frames[i].stored_bytes),
              config.phy_rate_up, mp) +
              frame_overheads_us(mp, /*aggregated=*/false));

    double slot_len;
    if (transmitters >= 2) {
      colliding_attempts += transmitters;
      if (ap_tx) ++ap_collisions;
      slot_len = config.rts_cts ? rts_collision_us
                                : std::max(ap_dur, max_station_dur);
      auto fail = [&](Contender& c, auto&& on_drop) {
        ++c.retries;
        if (c.retries > mp.retry_limit_m) {
          on_drop();
          c.has_frame = false;
          c.backoff = -1;
        } else {
          c.redraw_after_failure(mp.cw_max, mac_rng);
        }
      };
      if (ap_tx)
        fail(ap, [&] {
          for (const QueuedPacket& p : ap_frame)
            ++flow_stats[p.flow_id].retry_drops;
          ap_frame.clear();
        });
      for (int i : tx_stations)
        fail(stations[i], [&] {
          ++flow_stats[n + i].retry_drops;
        });
    } else if (ap_tx) {
      slot_len = (config.rts_cts ? rts_success_us : 0.0) + ap_dur;
      deliver_ap_frame(now + slot_len);
    } else {
      const int i = tx_stations.front();
      slot_len = (config.rts_cts ? rts_success_us : 0.0) + max_station_dur;
      const QueuedPacket& p = station_frames[i];
      bool ok = true;
      if (lossy && config.channel && !(coded && is_class1(i))) {
        const double pu = pu_at(i, config.phy_rate_up);
        if (pu > 0.0) {
          const double dbps = mp.dbps_for(config.phy_rate_up);
          const double bits =
              dbps * std::ceil(((p.stored_bytes + mp.l_machdr_bytes +
                                 mp.l_fcs_bytes) *
                                    8.0 +
                                22.0) /
                               dbps);
          ok = next_unit(mac_rng) >= frame_erasure_prob(pu, bits);
        }
      }
      if (ok) {
        Counters& fs = flow_stats[n + i];
        ++fs.delivered;
        fs.delivered_bytes += p.stored_bytes;
        fs.delay_sum_us += now + slot_len - p.arrival_time_us;
        stations[i].has_frame = false;
        stations[i].backoff = -1;
      } else {
        // No ACK: the station retries like a collision loser.
        ++stations[i].retries;
        if (stations[i].retries > mp.retry_limit_m) {
          ++flow_stats[n + i].retry_drops;
          stations[i].has_frame = false;
          stations[i].backoff = -1;
        } else {
          stations[i].redraw_after_failure(mp.cw_max, mac_rng);
        }
      }
    }
    now += slot_len;
  }

  // --- metrics ---
  SimMetrics m;
  m.sim_duration_s = config.sim_duration_s;
  m.ap_tx_attempts = ap_tx_attempts;
  m.ap_collisions = ap_collisions;
  m.frames_sent = frames_sent;
  m.mean_pkts_per_agg_frame =
      frames_sent > 0 ? static_cast<double>(agg_packets_total) / frames_sent
                      : 0.0;
  m.collision_rate = node_attempts > 0
                         ? static_cast<double>(colliding_attempts) /
                               static_cast<double>(node_attempts)
                         : 0.0;

  // Residual occupancy closes the per-flow conservation ledger.
  for (const QueuedPacket& p : ap_queue.packets())
    ++flow_stats[p.flow_id].in_queue;
  for (const QueuedPacket& p : ap_frame) ++flow_stats[p.flow_id].in_flight;
  for (int i = 0; i < n && config.uplink_enabled; ++i) {
    for (const QueuedPacket& p : up_queues[i].packets())
      ++flow_stats[n + i].in_queue;
    if (stations[i].has_frame) ++flow_stats[n + i].in_flight;
  }

  std::int64_t down_bytes = 0, up_bytes = 0, down_arrivals = 0,
               down_queue_drops = 0, down_delivered = 0;
  double down_delay_sum = 0.0, down_tp_sum = 0.0;
  for (int f = 0; f < num_flows; ++f) {
    const Counters& c = flow_stats[f];
    FlowDetail d;
    d.flow_id = f;
    d.arrivals = c.arrivals;
    d.delivered = c.delivered;
    d.queue_drops = c.queue_drops;
    d.retry_drops = c.retry_drops;
    d.channel_losses = c.channel_losses;
    d.in_queue = c.in_queue;
    d.in_flight = c.in_flight;
    d.throughput_bps = c.delivered_bytes * 8.0 / config.sim_duration_s;
    d.mean_delay_s =
        c.delivered > 0 ? c.delay_sum_us / (1e6 * c.delivered) : 0.0;
    if (f < num_down_flows) {
      down_bytes += c.delivered_bytes;
      down_arrivals += c.arrivals;
      down_queue_drops += c.queue_drops;
      down_delivered += c.delivered;
      down_delay_sum += c.delay_sum_us;
      down_tp_sum += d.throughput_bps;
    } else {
      up_bytes += c.delivered_bytes;
    }
    m.per_flow.push_back(d);
  }
  m.per_flow_throughput_bps = down_tp_sum / num_down_flows;
  m.mean_downlink_delay_s =
      down_delivered > 0 ? down_delay_sum / (1e6 * down_delivered) : 0.0;
  m.drop_rate = down_arrivals > 0 ? static_cast<double>(down_queue_drops) /
                                        static_cast<double>(down_arrivals)
                                  : 0.0;
  m.downlink_throughput_mbps = down_bytes * 8.0 / config.sim_duration_s / 1e6;
  m.uplink_throughput_mbps = up_bytes * 8.0 / config.sim_duration_s / 1e6;
  m.network_throughput_mbps =
      m.downlink_throughput_mbps + m.uplink_throughput_mbps;
  return m;
}

std::string SimMetrics::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["network_throughput_mbps"] = network_throughput_mbps;
  j["downlink_throughput_mbps"] = downlink_throughput_mbps;
  j["uplink_throughput_mbps"] = uplink_throughput_mbps;
  j["per_flow_throughput_bps"] = per_flow_throughput_bps;
  j["mean_downlink_delay_s"] = mean_downlink_delay_s;
  j["mean_pkts_per_agg_frame"] = mean_pkts_per_agg_frame;
  j["collision_rate"] = collision_rate;
  j["drop_rate"] = drop_rate;
  j["ap_tx_attempts"] = ap_tx_attempts;
  j["ap_collisions"] = ap_collisions;
  j["frames_sent"] = frames_sent;
  j["sim_duration_s"] = sim_duration_s;
  j["per_flow"] = nlohmann::ordered_json::array();
  for (const FlowDetail& d : per_flow) {
    nlohmann::ordered_json f;
    f["flow_id"] = d.flow_id;
    f["arrivals"] = d.arrivals;
    f["delivered"] = d.delivered;
    f["queue_drops"] = d.queue_drops;
    f["retry_drops"] = d.retry_drops;
    f["channel_losses"] = d.channel_losses;
    f["in_queue"] = d.in_queue;
    f["in_flight"] = d.in_flight;
    f["throughput_bps"] = d.throughput_bps;
    f["mean_delay_s"] = d.mean_delay_s;
    j["per_flow"].push_back(f);
  }
  return j.dump(indent);
}

}  // namespace mdagg
