// SPDX-License-Identifier: Apache-2.0
#include "mdagg/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mdagg/errors.hpp"

namespace mdagg {

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("binary_entropy: p must lie in [0,1]");
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double bsc_capacity(double p) { return 1.0 - binary_entropy(p); }

double effective_crossover(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw std::domain_error("effective_crossover: arguments must lie in [0,1]");
  return q * (1.0 - p) + (1.0 - q) * p;
}

double first_event_error_from_fer(double fer, std::int64_t measured_bits) {
  if (!(fer >= 0.0 && fer < 1.0))
    throw std::domain_error("first_event_error_from_fer: fer must lie in [0,1)");
  if (measured_bits < 1)
    throw std::domain_error(
        "first_event_error_from_fer: measured_bits must be >= 1");
  // 1 - (1-fer)^(1/l), computed via log1p/expm1 to keep precision for tiny fer.
  return -std::expm1(std::log1p(-fer) / static_cast<double>(measured_bits));
}

double frame_erasure_prob(double pu, double frame_bits) {
  if (!(pu >= 0.0 && pu <= 1.0))
    throw std::domain_error("frame_erasure_prob: pu must lie in [0,1]");
  if (!(frame_bits >= 0.0))
    throw std::domain_error("frame_erasure_prob: frame_bits must be >= 0");
  if (pu >= 1.0) return frame_bits > 0.0 ? 1.0 : 0.0;
  return -std::expm1(frame_bits * std::log1p(-pu));
}

namespace {

constexpr double kRateTol = 1e-9;

bool row_less(const ChannelRow& a, const ChannelRow& b) {
  if (a.phy_rate_mbps != b.phy_rate_mbps)
    return a.phy_rate_mbps < b.phy_rate_mbps;
  return a.rssi_dbm < b.rssi_dbm;
}

std::string join_rates(const std::vector<double>& rates) {
  std::ostringstream out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i) out << ", ";
    out << rates[i];
  }
  return out.str();
}

}  // namespace

ChannelTable ChannelTable::from_rows(std::vector<ChannelRow> rows) {
  if (rows.empty())
    throw std::invalid_argument("ChannelTable: at least one row required");
  for (const ChannelRow& r : rows) {
    if (!(r.bsc_crossover >= 0.0 && r.bsc_crossover <= 0.5))
      throw std::invalid_argument(
          "ChannelTable: bsc_crossover must lie in [0,0.5]");
    if (!(r.frame_error_rate >= 0.0 && r.frame_error_rate < 1.0))
      throw std::invalid_argument(
          "ChannelTable: frame_error_rate must lie in [0,1)");
    if (r.measured_frame_bits < 1)
      throw std::invalid_argument(
          "ChannelTable: measured_frame_bits must be >= 1");
  }
  std::sort(rows.begin(), rows.end(), row_less);
  ChannelTable t;
  t.rows_ = std::move(rows);
  for (const ChannelRow& r : t.rows_) {
    if (t.rates_.empty() ||
        std::abs(t.rates_.back() - r.phy_rate_mbps) > kRateTol)
      t.rates_.push_back(r.phy_rate_mbps);
  }
  return t;
}

ChannelTable ChannelTable::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open channel table: " + path);
  std::vector<ChannelRow> rows;
  std::string line;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    if (line[b] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // first non-comment line is the column header
      continue;
    }
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 5 columns, got " +
                        std::to_string(cells.size()));
    ChannelRow r;
    try {
      r.rssi_dbm = std::stod(cells[0]);
      r.phy_rate_mbps = std::stod(cells[1]);
      r.bsc_crossover = std::stod(cells[2]);
      r.frame_error_rate = std::stod(cells[3]);
      r.measured_frame_bits = std::stoll(cells[4]);
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": malformed numeric cell");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");
  return from_rows(std::move(rows));
}

double ChannelTable::interpolate(double rssi, double rate,
                                 double ChannelRow::*field) const {
  // Locate the contiguous run of rows for this rate.
  auto lo = std::lower_bound(
      rows_.begin(), rows_.end(), rate - kRateTol,
      [](const ChannelRow& r, double v) { return r.phy_rate_mbps < v; });
  auto hi = lo;
  while (hi != rows_.end() && std::abs(hi->phy_rate_mbps - rate) <= kRateTol)
    ++hi;
  if (lo == hi)
    throw std::invalid_argument("ChannelTable: unknown phy rate " +
                                std::to_string(rate) +
                                " Mbps; available rates: " +
                                join_rates(rates_));
  // Clamp outside the measured rssi range.
  if (rssi <= lo->rssi_dbm) return (*lo).*field;
  auto last = hi - 1;
  if (rssi >= last->rssi_dbm) return (*last).*field;
  auto upper = std::lower_bound(
      lo, hi, rssi,
      [](const ChannelRow& r, double v) { return r.rssi_dbm < v; });
  auto lower = upper - 1;
  if (std::abs(upper->rssi_dbm - rssi) == 0.0) return (*upper).*field;
  double t = (rssi - lower->rssi_dbm) / (upper->rssi_dbm - lower->rssi_dbm);
  return (1.0 - t) * ((*lower).*field) + t * ((*upper).*field);
}

double ChannelTable::crossover_at(double rssi_dbm, double rate_mbps) const {
  return interpolate(rssi_dbm, rate_mbps, &ChannelRow::bsc_crossover);
}

double ChannelTable::first_event_error_at(double rssi_dbm,
                                          double rate_mbps) const {
  double fer = interpolate(rssi_dbm, rate_mbps, &ChannelRow::frame_error_rate);
  // All synthetic/measured rows at one rate share measured_frame_bits; use the
  // first row of the run.
  auto lo = std::lower_bound(
      rows_.begin(), rows_.end(), rate_mbps - kRateTol,
      [](const ChannelRow& r, double v) { return r.phy_rate_mbps < v; });
  return first_event_error_from_fer(fer, lo->measured_frame_bits);
}

double crossover_for(const ChannelTable& table, double rssi_dbm,
                     double rate_mbps) {
  return table.crossover_at(rssi_dbm, rate_mbps);
}

}  // namespace mdagg
