// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: attempt-probability evaluation, the
// MAC fixed point, scheme sizing, rate optimization, the slot-level
// simulator, and the bit-level codec.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "mdagg/channel.hpp"
#include "mdagg/framing.hpp"
#include "mdagg/mac_model.hpp"
#include "mdagg/schemes.hpp"
#include "mdagg/simulator.hpp"

namespace {

const mdagg::ChannelTable& channel() {
  static const mdagg::ChannelTable table = mdagg::ChannelTable::from_csv(
      std::string(MDAGG_DATA_DIR) + "/channel_synthetic.csv");
  return table;
}

mdagg::Scenario scenario() {
  mdagg::Scenario sc;
  sc.n1 = 10;
  sc.n2 = 10;
  sc.rssi_class1 = 20.0;
  sc.rssi_class2 = 35.0;
  sc.frame_budget_l = 65535.0;
  sc.channel = channel();
  return sc;
}

void bm_bianchi_tau(benchmark::State& state) {
  const mdagg::MacParams params;
  double pf = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdagg::bianchi_tau(pf, params));
    pf += 1e-4;
    if (pf > 0.99) pf = 0.0;
  }
}
BENCHMARK(bm_bianchi_tau);

void bm_fixed_point_bisection(benchmark::State& state) {
  const mdagg::MacParams params;
  for (auto _ : state)
    benchmark::DoNotOptimize(mdagg::solve_fixed_point(10, 10, 0.0, params));
}
BENCHMARK(bm_fixed_point_bisection);

void bm_fixed_point_damped(benchmark::State& state) {
  const mdagg::MacParams params;
  for (auto _ : state)
    benchmark::DoNotOptimize(mdagg::solve_fixed_point(10, 10, 0.3, params));
}
BENCHMARK(bm_fixed_point_damped);

void bm_size_timesharing(benchmark::State& state) {
  mdagg::Scenario sc = scenario();
  sc.scheme = mdagg::Scheme::TimeSharing;
  for (auto _ : state)
    benchmark::DoNotOptimize(mdagg::size_scheme(sc, 12.0));
}
BENCHMARK(bm_size_timesharing);

void bm_size_uncoded(benchmark::State& state) {
  mdagg::Scenario sc = scenario();
  sc.scheme = mdagg::Scheme::Uncoded;
  for (auto _ : state)
    benchmark::DoNotOptimize(mdagg::size_scheme(sc, 12.0));
}
BENCHMARK(bm_size_uncoded);

void bm_optimize_rate(benchmark::State& state) {
  mdagg::Scenario sc = scenario();
  sc.scheme = mdagg::Scheme::TimeSharing;
  for (auto _ : state)
    benchmark::DoNotOptimize(mdagg::optimize_rate(sc));
}
BENCHMARK(bm_optimize_rate);

// One saturated multi-destination run; counter reports simulated frames/s.
void bm_simulator_saturated(benchmark::State& state) {
  mdagg::SimConfig c;
  c.n_stations = 10;
  c.n_class1 = 0;
  c.arrival = mdagg::ArrivalKind::Poisson;
  c.arrival_rate = 0.0;
  c.saturate_downlink = true;
  c.uplink_enabled = false;
  c.rts_cts = false;
  c.sim_duration_s = 0.25;
  std::int64_t frames = 0;
  for (auto _ : state) {
    c.seed += 1;
    const mdagg::SimMetrics m = mdagg::run(c);
    frames += m.frames_sent;
    benchmark::DoNotOptimize(m.network_throughput_mbps);
  }
  state.counters["frames"] =
      benchmark::Counter(static_cast<double>(frames), benchmark::Counter::kIsRate);
}
BENCHMARK(bm_simulator_saturated)->Unit(benchmark::kMillisecond);

void bm_simulator_contention(benchmark::State& state) {
  mdagg::SimConfig c;
  c.n_stations = 10;
  c.arrival = mdagg::ArrivalKind::Poisson;
  c.arrival_rate = 2000.0;
  c.uplink_enabled = true;
  c.rts_cts = true;
  c.sim_duration_s = 0.25;
  for (auto _ : state) {
    c.seed += 1;
    benchmark::DoNotOptimize(mdagg::run(c).network_throughput_mbps);
  }
}
BENCHMARK(bm_simulator_contention)->Unit(benchmark::kMillisecond);

void bm_crc32_1500(benchmark::State& state) {
  std::vector<std::uint8_t> data(1500);
  std::mt19937_64 rng(1);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  for (auto _ : state) benchmark::DoNotOptimize(mdagg::crc32(data));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 1500);
}
BENCHMARK(bm_crc32_1500);

void bm_transmit_bsc(benchmark::State& state) {
  mdagg::BitVector bits(12000, 0);
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(mdagg::transmit_bsc(bits, 0.01, seed++));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          12000);
}
BENCHMARK(bm_transmit_bsc);

void bm_frame_roundtrip(benchmark::State& state) {
  std::vector<mdagg::Packet> packets(4);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 4; ++i) {
    packets[i].station_id = static_cast<std::uint8_t>(i + 1);
    packets[i].payload.resize(300);
    for (auto& b : packets[i].payload) b = static_cast<std::uint8_t>(rng());
  }
  for (auto _ : state) {
    const mdagg::AggFrame frame =
        mdagg::build_frame(packets, mdagg::FrameFormat::Erasure);
    const mdagg::SegmentResult res =
        mdagg::parse_frame(frame.serialize_bits(), 2,
                           mdagg::FrameFormat::Erasure);
    benchmark::DoNotOptimize(res.status);
  }
}
BENCHMARK(bm_frame_roundtrip);

}  // namespace

BENCHMARK_MAIN();
