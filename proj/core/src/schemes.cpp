// SPDX-License-Identifier: Apache-2.0
#include "mdagg/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace mdagg {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Uncoded:
      return "uncoded";
    case Scheme::TimeSharing:
      return "timesharing";
    case Scheme::Superposition:
      return "superposition";
    case Scheme::TimeSharingMultiRate:
      return "timesharing-multirate";
  }
  return "?";
}

const char* to_string(Traffic t) {
  switch (t) {
    case Traffic::SaturatedUnicast:
      return "saturated-unicast";
    case Traffic::Multicast:
      return "multicast";
  }
  return "?";
}

std::optional<Scheme> scheme_from_string(const std::string& name) {
  if (name == "uncoded") return Scheme::Uncoded;
  if (name == "timesharing") return Scheme::TimeSharing;
  if (name == "superposition") return Scheme::Superposition;
  if (name == "timesharing-multirate" || name == "multirate")
    return Scheme::TimeSharingMultiRate;
  return std::nullopt;
}

void Scenario::validate() const {
  if (n1 < 0 || n2 < 0)
    throw std::invalid_argument("Scenario: station counts must be >= 0");
  if (n1 + n2 == 0)
    throw std::invalid_argument("Scenario: at least one station required");
  if (channel.empty())
    throw std::invalid_argument("Scenario: channel table is empty");
  if (!(frame_budget_l > 0.0))
    throw std::invalid_argument("Scenario: frame budget must be positive");
  if (frame_budget_l <= params.sub_overhead_bytes() * (n1 + n2))
    throw InfeasibleError("frame budget below per-destination overhead");
}

double network_throughput_mbps(const AttemptState& st, int n1, int n2,
                               double e1_down, double e2_down, double e1_up,
                               double e2_up, double expected_slot_us,
                               X0Weighting weighting) {
  const double down = weighting == X0Weighting::PerStation
                          ? n1 * e1_down + n2 * e2_down
                          : e1_down + e2_down;
  const double x0 = st.tau0 * (1.0 - st.pf0) * down;
  const double x1 = st.tau1 * (1.0 - st.pf1) * e1_up;
  const double x2 = st.tau2 * (1.0 - st.pf2) * e2_up;
  return 8.0 * (x0 + n1 * x1 + n2 * x2) / expected_slot_us;
}

namespace {

// Symbol-quantized on-air bits of an uplink frame carrying x payload bytes
// (MAC header, FCS, service and tail bits included): the exponent of the
// frame erasure probability.
double uplink_bits(double x, double rate, const MacParams& p) {
  const int dbps = p.dbps_for(rate);
  return dbps *
         std::ceil(((x + p.l_machdr_bytes + p.l_fcs_bytes) * 8.0 + 22.0) /
                   static_cast<double>(dbps));
}

// Fills the solution fields shared by every scheme, evaluating the expected
// slot time and both throughput weightings.  t1/t2 are the class slot
// durations in model order (class 1 >= class 2 after the caller's
// degenerate-case substitutions).
void finish_solution(SchemeSolution& sol, const Scenario& sc,
                     const AttemptState& st, double t_ap, double t1,
                     double t2) {
  sol.attempt = st;
  sol.slots = slot_timing(st, sc.n1, sc.n2, t_ap, t1, t2, sc.params);
  const double et = sol.slots.expected_slot_us;
  sol.network_throughput_mbps = network_throughput_mbps(
      st, sc.n1, sc.n2, sol.e1_down, sol.e2_down, sol.e1_up, sol.e2_up, et,
      X0Weighting::PerClass);
  sol.network_throughput_weighted_mbps = network_throughput_mbps(
      st, sc.n1, sc.n2, sol.e1_down, sol.e2_down, sol.e1_up, sol.e2_up, et,
      X0Weighting::PerStation);
  sol.per_flow_throughputs_mbps.clear();
  const double down_coef = 8.0 * st.tau0 * (1.0 - st.pf0) / et;
  if (sc.n1 > 0)
    sol.per_flow_throughputs_mbps.push_back(down_coef * sol.e1_down);
  if (sc.n2 > 0)
    sol.per_flow_throughputs_mbps.push_back(down_coef * sol.e2_down);
  if (sc.n1 > 0)
    sol.per_flow_throughputs_mbps.push_back(8.0 * st.tau1 * (1.0 - st.pf1) *
                                            sol.e1_up / et);
  if (sc.n2 > 0)
    sol.per_flow_throughputs_mbps.push_back(8.0 * st.tau2 * (1.0 - st.pf2) *
                                            sol.e2_up / et);
}

}  // namespace

double solve_beta(int n1, int n2, double p) {
  if (n1 < 1 || n2 < 1)
    throw std::invalid_argument("solve_beta: both classes must be non-empty");
  auto g = [&](double b) {
    return n2 * (1.0 - binary_entropy(effective_crossover(p, b))) -
           n1 * binary_entropy(b);
  };
  if (g(1e-12) <= 0.0)
    throw InfeasibleError("no power split equalizes the classes");
  if (g(0.5) >= 0.0)
    throw InfeasibleError("no power split equalizes the classes");
  double lo = 0.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SchemeSolution size_uncoded(const Scenario& sc, double rate_mbps) {
  sc.validate();
  const MacParams& mp = sc.params;
  const double sub = mp.sub_overhead_bytes();
  const double l = sc.frame_budget_l;
  const int n1 = sc.n1, n2 = sc.n2;
  const double pud = sc.channel.first_event_error_at(sc.rssi_class1, rate_mbps);
  // Probability a class-1 sub-frame of x payload bytes survives erasure.
  auto q8 = [&](double x) { return std::pow(1.0 - pud, 8.0 * (x + sub)); };

  SchemeSolution sol;
  sol.scheme = Scheme::Uncoded;
  sol.phy_rate_down = sol.phy_rate_down_class2 = rate_mbps;

  // Downlink fairness: pad class-1 payloads so the expected delivered bytes
  // match the class-2 payload, spending the whole budget.
  if (n1 == 0) {
    sol.x2_down = l / n2 - sub;
    sol.x1_down = 0.0;
  } else {
    double lo = 0.0, hi = l / n1 - sub;
    auto budget_gap = [&](double x1) {
      return n1 * (x1 + sub) + n2 * (x1 * q8(x1) + sub) - l;
    };
    if (budget_gap(hi) < 0.0)
      throw InfeasibleError("frame budget exceeded at maximal class-1 payload");
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (budget_gap(mid) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    sol.x1_down = 0.5 * (lo + hi);
    sol.x2_down = n2 > 0 ? sol.x1_down * q8(sol.x1_down) : 0.0;
    if (n2 > 0 && sol.x2_down <= 0.0)
      throw InfeasibleError("class-1 delivered payload is zero");
  }
  sol.e1_down = n1 > 0 ? sol.x1_down * q8(sol.x1_down) : 0.0;
  sol.e2_down = sol.x2_down;

  // Uplink fairness: class-1 stations send plain (erasure-prone) frames whose
  // expected delivered rate matches the reference flow (class-2 uplink when
  // present, class-1 downlink otherwise).
  AttemptState st;
  sol.x2_up = sol.x2_down;
  sol.e2_up = sol.x2_up;
  if (n1 == 0) {
    st = solve_fixed_point(n1, n2, 0.0, mp);
  } else {
    const bool against_up2 = n2 > 0;
    auto eval = [&](double x1u) {
      const double bits = uplink_bits(x1u, rate_mbps, mp);
      const double pe1 = frame_erasure_prob(pud, bits);
      AttemptState s = solve_fixed_point(n1, n2, pe1, mp);
      const double lhs = s.tau1 * (1.0 - s.pf1) *
                         std::pow(1.0 - pud, bits) * x1u;
      const double rhs = against_up2
                             ? s.tau2 * (1.0 - s.pf2) * sol.x2_up
                             : s.tau0 * (1.0 - s.pf0) * sol.e1_down;
      return std::make_pair(lhs - rhs, s);
    };
    const double ref_payload = against_up2 ? sol.x2_up : sol.e1_down;
    double lo = 1.0, hi = std::max(l, 4.0 * ref_payload);
    const auto [glo, st_lo] = eval(lo);
    const auto [ghi, st_hi] = eval(hi);
    if (glo > 0.0 && ghi > 0.0)
      throw InfeasibleError("uplink fairness has no solution in bracket");
    if ((glo < 0.0) == (ghi < 0.0)) {
      // The erasure exponent is a staircase in x1u; scan for a sign change.
      bool found = false;
      double prev_x = lo, prev_g = glo;
      for (int i = 1; i <= 64; ++i) {
        const double x = lo + (hi - lo) * i / 64.0;
        const double gx = eval(x).first;
        if ((prev_g < 0.0) != (gx < 0.0)) {
          lo = prev_x;
          hi = x;
          found = true;
          break;
        }
        prev_x = x;
        prev_g = gx;
      }
      if (!found)
        throw InfeasibleError("uplink fairness has no solution in bracket");
    }
    const bool lo_negative = glo < 0.0;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      if ((eval(mid).first < 0.0) == lo_negative)
        lo = mid;
      else
        hi = mid;
    }
    sol.x1_up = 0.5 * (lo + hi);
    const auto [gfin, st_fin] = eval(sol.x1_up);
    st = st_fin;
    const double rhs = against_up2
                           ? st.tau2 * (1.0 - st.pf2) * sol.x2_up
                           : st.tau0 * (1.0 - st.pf0) * sol.e1_down;
    if (rhs > 0.0 && std::abs(gfin) / rhs > 1e-6)
      throw InfeasibleError("uplink fairness residual above tolerance");
    sol.e1_up =
        sol.x1_up * std::pow(1.0 - pud, uplink_bits(sol.x1_up, rate_mbps, mp));
  }

  const double t_ap = tx_duration_us(l, rate_mbps, mp) +
                      frame_overheads_us(mp, /*aggregated=*/true);
  const double oh = frame_overheads_us(mp, /*aggregated=*/false);
  double t1 = n1 > 0 ? tx_duration_us(sol.x1_up, rate_mbps, mp) + oh : 0.0;
  const double t2 = n2 > 0 ? tx_duration_us(sol.x2_up, rate_mbps, mp) + oh : 0.0;
  if (n1 == 0) t1 = t2;
  finish_solution(sol, sc, st, t_ap, t1, t2);
  return sol;
}

SchemeSolution size_timesharing(const Scenario& sc, double rate_mbps) {
  sc.validate();
  const MacParams& mp = sc.params;
  const double sub = mp.sub_overhead_bytes();
  const double l = sc.frame_budget_l;
  const int n1 = sc.n1, n2 = sc.n2;
  const double p = sc.channel.crossover_at(sc.rssi_class1, rate_mbps);
  const double cap = bsc_capacity(p);
  if (n1 > 0 && cap <= 1e-9)
    throw InfeasibleError("class-1 channel capacity is zero");

  const double x = n1 == 0 ? l / n2 - sub : l / (n1 / cap + n2) - sub;
  if (x <= 0.0) throw InfeasibleError("no payload fits the frame budget");

  SchemeSolution sol;
  sol.scheme = Scheme::TimeSharing;
  sol.phy_rate_down = sol.phy_rate_down_class2 = rate_mbps;
  sol.x1_down = sol.e1_down = sol.x1_up = sol.e1_up = n1 > 0 ? x : 0.0;
  sol.x2_down = sol.e2_down = sol.x2_up = sol.e2_up = n2 > 0 ? x : 0.0;

  const AttemptState st = solve_fixed_point(n1, n2, 0.0, mp);
  const double t_ap =
      tx_duration_us(l, rate_mbps, mp) + frame_overheads_us(mp, true);
  const double oh = frame_overheads_us(mp, false);
  // Class-1 uplink is capacity-coded for its own channel: x/cap bytes on air.
  double t1 = n1 > 0 ? tx_duration_us(x / cap, rate_mbps, mp) + oh : 0.0;
  double t2 = n2 > 0 ? tx_duration_us(x, rate_mbps, mp) + oh : 0.0;
  if (n1 == 0) t1 = t2;
  if (n2 == 0) t2 = t1;
  finish_solution(sol, sc, st, t_ap, std::max(t1, t2), std::min(t1, t2));
  return sol;
}

SchemeSolution size_superposition(const Scenario& sc, double rate_mbps) {
  sc.validate();
  if (sc.n1 == 0 || sc.n2 == 0) {
    // One class absent: superposition degenerates to time sharing.
    SchemeSolution sol = size_timesharing(sc, rate_mbps);
    sol.scheme = Scheme::Superposition;
    return sol;
  }
  const MacParams& mp = sc.params;
  const double sub = mp.sub_overhead_bytes();
  const double l = sc.frame_budget_l;
  const int n1 = sc.n1, n2 = sc.n2;
  const double p = sc.channel.crossover_at(sc.rssi_class1, rate_mbps);
  if (bsc_capacity(p) <= 1e-9)
    throw InfeasibleError("class-1 channel capacity is zero");

  const double beta = solve_beta(n1, n2, p);
  SchemeSolution sol;
  sol.scheme = Scheme::Superposition;
  sol.phy_rate_down = sol.phy_rate_down_class2 = rate_mbps;
  sol.beta = beta;
  sol.x1_down =
      (l / n1) * (1.0 - binary_entropy(effective_crossover(p, beta))) - sub;
  sol.x2_down = (l / n2) * binary_entropy(beta) - sub;
  if (sol.x1_down <= 0.0 || sol.x2_down <= 0.0)
    throw InfeasibleError("no payload fits the frame budget");
  sol.e1_down = sol.x1_down;
  sol.e2_down = sol.x2_down;
  const double xu = sol.x2_down;
  sol.x1_up = sol.x2_up = sol.e1_up = sol.e2_up = xu;

  const AttemptState st = solve_fixed_point(n1, n2, 0.0, mp);
  const double t_ap =
      tx_duration_us(l, rate_mbps, mp) + frame_overheads_us(mp, true);
  const double oh = frame_overheads_us(mp, false);
  const double t1 =
      tx_duration_us(xu / (1.0 - binary_entropy(p)), rate_mbps, mp) + oh;
  const double t2 = tx_duration_us(xu, rate_mbps, mp) + oh;
  finish_solution(sol, sc, st, t_ap, std::max(t1, t2), std::min(t1, t2));
  return sol;
}

SchemeSolution size_timesharing_multirate(const Scenario& sc,
                                          double rate_class1_mbps) {
  sc.validate();
  const MacParams& mp = sc.params;
  const double sub = mp.sub_overhead_bytes();
  const double l = sc.frame_budget_l;
  const int n1 = sc.n1, n2 = sc.n2;
  const double kClass2Rate = 54.0;
  const double p = sc.channel.crossover_at(sc.rssi_class1, rate_class1_mbps);
  const double cap = bsc_capacity(p);
  if (n1 > 0 && cap <= 1e-9)
    throw InfeasibleError("class-1 channel capacity is zero");

  // The budget is the airtime of l bytes at the class-1 rate; class-2
  // segments ride at 54 Mbps, shrinking their byte cost by the symbol ratio.
  const double symbol_ratio =
      static_cast<double>(mp.dbps_for(rate_class1_mbps)) /
      static_cast<double>(mp.dbps_for(kClass2Rate));
  const double x = n1 == 0 ? l / (n2 * symbol_ratio) - sub
                           : l / (n1 / cap + n2 * symbol_ratio) - sub;
  if (x <= 0.0) throw InfeasibleError("no payload fits the frame budget");

  SchemeSolution sol;
  sol.scheme = Scheme::TimeSharingMultiRate;
  sol.phy_rate_down = rate_class1_mbps;
  sol.phy_rate_down_class2 = kClass2Rate;
  sol.x1_down = sol.e1_down = sol.x1_up = sol.e1_up = n1 > 0 ? x : 0.0;
  sol.x2_down = sol.e2_down = sol.x2_up = sol.e2_up = n2 > 0 ? x : 0.0;

  const AttemptState st = solve_fixed_point(n1, n2, 0.0, mp);
  const double t_ap = tx_duration_us(l, rate_class1_mbps, mp) +
                      frame_overheads_us(mp, true);
  const double oh = frame_overheads_us(mp, false);
  double t1 = n1 > 0 ? tx_duration_us(x / cap, rate_class1_mbps, mp) + oh : 0.0;
  double t2 = n2 > 0 ? tx_duration_us(x, kClass2Rate, mp) + oh : 0.0;
  if (n1 == 0) t1 = t2;
  if (n2 == 0) t2 = t1;
  finish_solution(sol, sc, st, t_ap, std::max(t1, t2), std::min(t1, t2));
  return sol;
}

SchemeSolution size_scheme(const Scenario& sc, double rate_mbps) {
  switch (sc.scheme) {
    case Scheme::Uncoded:
      return size_uncoded(sc, rate_mbps);
    case Scheme::TimeSharing:
      return size_timesharing(sc, rate_mbps);
    case Scheme::Superposition:
      return size_superposition(sc, rate_mbps);
    case Scheme::TimeSharingMultiRate:
      return size_timesharing_multirate(sc, rate_mbps);
  }
  throw std::invalid_argument("size_scheme: unknown scheme");
}

MulticastThroughput multicast_throughput(const Scenario& sc, double rate_mbps,
                                         Scheme scheme) {
  const MacParams& mp = sc.params;
  const double sub = mp.sub_overhead_bytes();
  const double l = sc.frame_budget_l;
  if (sc.n1 < 0 || sc.n2 < 0)
    throw std::invalid_argument("multicast: station counts must be >= 0");
  if (sc.channel.empty())
    throw std::invalid_argument("multicast: channel table is empty");
  if (l <= 2.0 * sub)
    throw InfeasibleError("frame budget below sub-frame overhead");

  double delivered = 0.0;  // per-group expected payload bytes per frame
  if (scheme == Scheme::Uncoded) {
    const double pud =
        sc.channel.first_event_error_at(sc.rssi_class1, rate_mbps);
    auto q8 = [&](double x) { return std::pow(1.0 - pud, 8.0 * (x + sub)); };
    auto budget_gap = [&](double x1) {
      return (x1 + sub) + (x1 * q8(x1) + sub) - l;
    };
    double lo = 0.0, hi = l - 2.0 * sub;
    if (budget_gap(hi) < 0.0)
      throw InfeasibleError("frame budget exceeded at maximal payload");
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (budget_gap(mid) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    const double x1 = 0.5 * (lo + hi);
    delivered = x1 * q8(x1);
  } else if (scheme == Scheme::TimeSharing) {
    const double p = sc.channel.crossover_at(sc.rssi_class1, rate_mbps);
    const double cap = bsc_capacity(p);
    if (cap <= 1e-9)
      throw InfeasibleError("class-1 channel capacity is zero");
    const double x = l / (1.0 / cap + 1.0) - sub;
    if (x <= 0.0) throw InfeasibleError("no payload fits the frame budget");
    delivered = x;
  } else {
    throw std::invalid_argument(
        "multicast: only uncoded and timesharing apply");
  }

  // The AP is the only contender: tau0 at zero failure probability, slots are
  // either idle or carry one aggregate frame.
  const double tau0 = bianchi_tau(0.0, mp);
  const double t_ap =
      tx_duration_us(l, rate_mbps, mp) + frame_overheads_us(mp, true);
  const double et = (1.0 - tau0) * mp.idle_slot_sigma_us + tau0 * t_ap;
  const double s = 8.0 * tau0 * delivered / et;
  MulticastThroughput out;
  out.per_station_class1_mbps = s;
  out.per_station_class2_mbps = s;
  out.sum_mbps = (sc.n1 + sc.n2) * s;
  out.phy_rate = rate_mbps;
  return out;
}

RateOptimum optimize_rate(const Scenario& sc) {
  RateOptimum out;
  bool have_best = false;
  for (double rate : sc.channel.rates()) {
    RateSweepEntry entry;
    entry.rate_mbps = rate;
    try {
      SchemeSolution sol = size_scheme(sc, rate);
      entry.feasible = true;
      entry.throughput_mbps = sol.network_throughput_mbps;
      if (!have_best ||
          sol.network_throughput_mbps >= out.best.network_throughput_mbps) {
        out.best = std::move(sol);
        have_best = true;
      }
    } catch (const InfeasibleError& e) {
      entry.feasible = false;
      entry.reason = e.constraint();
    }
    out.sweep.push_back(std::move(entry));
  }
  if (!have_best)
    throw InfeasibleError("every phy rate is infeasible for this scenario");
  return out;
}

MulticastOptimum optimize_rate_multicast(const Scenario& sc, Scheme scheme) {
  MulticastOptimum out;
  bool have_best = false;
  for (double rate : sc.channel.rates()) {
    RateSweepEntry entry;
    entry.rate_mbps = rate;
    try {
      MulticastThroughput mt = multicast_throughput(sc, rate, scheme);
      entry.feasible = true;
      entry.throughput_mbps = mt.per_station_class1_mbps;
      if (!have_best ||
          mt.per_station_class1_mbps >= out.best.per_station_class1_mbps) {
        out.best = mt;
        have_best = true;
      }
    } catch (const InfeasibleError& e) {
      entry.feasible = false;
      entry.reason = e.constraint();
    }
    out.sweep.push_back(std::move(entry));
  }
  if (!have_best)
    throw InfeasibleError("every phy rate is infeasible for this scenario");
  return out;
}

}  // namespace mdagg
