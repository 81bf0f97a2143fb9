// SPDX-License-Identifier: Apache-2.0
#include "mdagg/mac_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mdagg/channel.hpp"
#include "mdagg/errors.hpp"

namespace mdagg {

int MacParams::backoff_stages() const {
  if (cw_min < 1 || cw_max < cw_min)
    throw std::invalid_argument("MacParams: need 1 <= cw_min <= cw_max");
  int stages = 0;
  long w = cw_min;
  while (w < cw_max) {
    w *= 2;
    ++stages;
  }
  return stages;
}

int MacParams::dbps_for(double rate_mbps) const {
  for (const auto& [rate, dbps] : rate_table)
    if (std::abs(rate - rate_mbps) < 1e-9) return dbps;
  std::ostringstream msg;
  msg << "unknown phy rate " << rate_mbps << " Mbps; available rates:";
  for (const auto& [rate, dbps] : rate_table) msg << ' ' << rate;
  throw std::invalid_argument(msg.str());
}

MacParams MacParams::from_config(const KeyValueConfig& cfg,
                                 const std::string& prefix) {
  MacParams p;
  p.t_sifs_us = cfg.get_double(prefix + "t_sifs", p.t_sifs_us);
  p.t_phyhdr_us = cfg.get_double(prefix + "t_phyhdr", p.t_phyhdr_us);
  p.t_phyhdr1_us = cfg.get_double(prefix + "t_phyhdr1", p.t_phyhdr1_us);
  p.t_ack_us = cfg.get_double(prefix + "t_ack", p.t_ack_us);
  p.t_difs_us = cfg.get_double(prefix + "t_difs", p.t_difs_us);
  p.idle_slot_sigma_us =
      cfg.get_double(prefix + "idle_slot_sigma", p.idle_slot_sigma_us);
  p.l_subhdr_bytes = cfg.get_double(prefix + "l_subhdr", p.l_subhdr_bytes);
  p.l_fcs_bytes = cfg.get_double(prefix + "l_fcs", p.l_fcs_bytes);
  p.l_machdr_bytes = cfg.get_double(prefix + "l_machdr", p.l_machdr_bytes);
  p.cw_min = static_cast<int>(cfg.get_int(prefix + "cw_min", p.cw_min));
  p.cw_max = static_cast<int>(cfg.get_int(prefix + "cw_max", p.cw_max));
  p.retry_limit_m =
      static_cast<int>(cfg.get_int(prefix + "retry_limit", p.retry_limit_m));
  if (cfg.has(prefix + "rate_table")) {
    std::map<double, int> table;
    std::istringstream in(cfg.get_string(prefix + "rate_table"));
    std::string pair;
    while (std::getline(in, pair, ',')) {
      std::size_t colon = pair.find(':');
      if (colon == std::string::npos)
        throw ConfigError("mac rate_table entries must be rate:dbps, got '" +
                          pair + "'");
      table[std::stod(pair.substr(0, colon))] =
          std::stoi(pair.substr(colon + 1));
    }
    if (table.empty()) throw ConfigError("mac rate_table is empty");
    p.rate_table = std::move(table);
  }
  return p;
}

namespace {

// Raw attempt-probability expression; the removable singularity at pf = 1 is
// clamped just inside the domain, the one at pf = 0.5 is handled by the
// caller.
double bianchi_raw(double pf, double w, int m, int mprime) {
  pf = std::min(pf, 1.0 - 1e-12);
  const double num = 2.0 * (1.0 - 2.0 * pf) * (1.0 - std::pow(pf, m + 1));
  const double base = (1.0 - pf) * w * (1.0 - std::pow(2.0 * pf, m + 1)) +
                      (1.0 - 2.0 * pf) * (1.0 - std::pow(pf, m + 1));
  double den = base;
  if (m > mprime)
    den += w * std::pow(2.0, mprime) * std::pow(pf, mprime + 1) *
           (1.0 - 2.0 * pf) * (1.0 - std::pow(pf, m - mprime));
  return num / den;
}

}  // namespace

double bianchi_tau(double pf, const MacParams& params) {
  if (!(pf >= 0.0 && pf <= 1.0))
    throw std::domain_error("bianchi_tau: pf must lie in [0,1]");
  const int m = params.retry_limit_m;
  const int mprime = params.backoff_stages();
  const double w = static_cast<double>(params.cw_min);
  if (std::abs(pf - 0.5) < 1e-9)
    return 0.5 * (bianchi_raw(0.5 - 1e-9, w, m, mprime) +
                  bianchi_raw(0.5 + 1e-9, w, m, mprime));
  return bianchi_raw(pf, w, m, mprime);
}

FailureProbs failure_probs(double tau0, double tau1, double tau2, int n1,
                           int n2, double pe1_up) {
  if (n1 < 0 || n2 < 0)
    throw std::invalid_argument("failure_probs: populations must be >= 0");
  const double s1 = std::pow(1.0 - tau1, n1);
  const double s2 = std::pow(1.0 - tau2, n2);
  FailureProbs f;
  f.pf0 = 1.0 - s1 * s2;
  if (n1 > 0) {
    const double pc1 =
        1.0 - std::pow(1.0 - tau1, n1 - 1) * s2 * (1.0 - tau0);
    f.pf1 = 1.0 - (1.0 - pc1) * (1.0 - pe1_up);
  } else {
    f.pf1 = 0.0;
  }
  if (n2 > 0)
    f.pf2 = 1.0 - s1 * std::pow(1.0 - tau2, n2 - 1) * (1.0 - tau0);
  else
    f.pf2 = f.pf0;
  return f;
}

std::vector<double> failure_probs_general(
    const std::vector<double>& taus, const std::vector<double>& frame_bits,
    const std::vector<double>& pus) {
  const std::size_t n = taus.size();
  if (frame_bits.size() != n || pus.size() != n)
    throw std::invalid_argument(
        "failure_probs_general: taus, frame_bits, and pus must have equal "
        "length");
  std::vector<double> pf(n);
  for (std::size_t i = 0; i < n; ++i) {
    double clear = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) clear *= 1.0 - taus[j];
    const double pc = 1.0 - clear;
    const double pe = frame_erasure_prob(pus[i], frame_bits[i]);
    pf[i] = 1.0 - (1.0 - pc) * (1.0 - pe);
  }
  return pf;
}

AttemptState solve_fixed_point(int n1, int n2, double pe1_up,
                               const MacParams& params) {
  if (n1 < 0 || n2 < 0)
    throw std::invalid_argument("solve_fixed_point: populations must be >= 0");
  if (!(pe1_up >= 0.0 && pe1_up <= 1.0))
    throw std::domain_error("solve_fixed_point: pe1_up must lie in [0,1]");

  AttemptState st;
  if (pe1_up == 0.0 || n1 == 0) {
    // All contenders are statistically identical: reduce to the scalar
    // equation t = tau(1 - (1-t)^k) with k others per node, and bisect.
    // g is negative at 0 and positive at tau(0) because tau is decreasing.
    const int k = n1 + n2;
    double lo = 0.0;
    double hi = bianchi_tau(0.0, params);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double g =
          mid - bianchi_tau(1.0 - std::pow(1.0 - mid, k), params);
      if (g > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    const double tau = 0.5 * (lo + hi);
    st.tau0 = st.tau2 = tau;
    st.tau1 = n1 > 0 ? tau : bianchi_tau(0.0, params);
    st.iterations = 200;
    const FailureProbs f = failure_probs(st.tau0, st.tau1, st.tau2, n1, n2,
                                         n1 > 0 ? pe1_up : 0.0);
    st.pf0 = f.pf0;
    st.pf1 = f.pf1;
    st.pf2 = f.pf2;
    st.residual = std::max(
        {std::abs(st.tau0 - bianchi_tau(f.pf0, params)),
         n1 > 0 ? std::abs(st.tau1 - bianchi_tau(f.pf1, params)) : 0.0,
         std::abs(st.tau2 - bianchi_tau(f.pf2, params))});
    return st;
  }

  // Damped simultaneous iteration for the asymmetric system.
  constexpr double kTol = 1e-10;
  constexpr int kMaxIters = 10000;
  constexpr double kAlpha = 0.5;
  double tau0 = 0.02, tau1 = 0.02, tau2 = 0.02;
  double residual = 1.0;
  int it = 0;
  FailureProbs f;
  while (it < kMaxIters) {
    ++it;
    f = failure_probs(tau0, tau1, tau2, n1, n2, pe1_up);
    const double nt0 = bianchi_tau(f.pf0, params);
    const double nt1 = bianchi_tau(f.pf1, params);
    const double nt2 = bianchi_tau(f.pf2, params);
    residual = std::max({std::abs(nt0 - tau0), std::abs(nt1 - tau1),
                         std::abs(nt2 - tau2)});
    if (residual < kTol) break;
    tau0 = (1.0 - kAlpha) * tau0 + kAlpha * nt0;
    tau1 = (1.0 - kAlpha) * tau1 + kAlpha * nt1;
    tau2 = (1.0 - kAlpha) * tau2 + kAlpha * nt2;
  }
  if (residual >= kTol)
    throw ConvergenceError(
        "attempt-probability fixed point did not converge within " +
        std::to_string(kMaxIters) + " iterations",
        residual);
  st.tau0 = tau0;
  st.tau1 = tau1;
  st.tau2 = tau2;
  st.pf0 = f.pf0;
  st.pf1 = f.pf1;
  st.pf2 = f.pf2;
  st.iterations = it;
  st.residual = residual;
  return st;
}

AttemptState solve_fixed_point(
    int n1, int n2, const std::function<double(double)>& pe_of_payload,
    double payload_bytes, const MacParams& params) {
  if (!pe_of_payload)
    throw std::invalid_argument("solve_fixed_point: pe_of_payload is empty");
  return solve_fixed_point(n1, n2, pe_of_payload(payload_bytes), params);
}

double tx_duration_us(double payload_bytes, double rate_mbps,
                      const MacParams& params) {
  if (!(payload_bytes >= 0.0))
    throw std::invalid_argument("tx_duration_us: payload_bytes must be >= 0");
  const int dbps = params.dbps_for(rate_mbps);
  const double bits =
      (payload_bytes + params.l_machdr_bytes + params.l_fcs_bytes) * 8.0 +
      22.0;  // 16 service bits + 6 tail bits
  return 4.0 * std::ceil(bits / static_cast<double>(dbps));
}

double frame_overheads_us(const MacParams& params, bool aggregated) {
  double oh = params.t_difs_us + 2.0 * params.t_phyhdr_us + params.t_sifs_us +
              params.t_ack_us;
  if (aggregated) oh += params.t_phyhdr1_us - params.t_phyhdr_us;
  return oh;
}

SlotTiming slot_timing(const AttemptState& state, int n1, int n2, double t_ap,
                       double t1, double t2, const MacParams& params) {
  if (!(t_ap >= t1 && t1 >= t2))
    throw std::invalid_argument(
        "slot_timing: durations must satisfy t_ap >= t1 >= t2 so each busy "
        "slot is keyed by its longest participant");
  const double s1 = std::pow(1.0 - state.tau1, n1);
  const double s2 = std::pow(1.0 - state.tau2, n2);
  SlotTiming t;
  t.t_ap_us = t_ap;
  t.t_class1_us = t1;
  t.t_class2_us = t2;
  t.p_ap = state.tau0;
  t.p_t1 = (1.0 - s1) * (1.0 - state.tau0);
  t.p_t2 = (1.0 - s2) * (1.0 - state.tau0) * s1;
  t.p_idle = (1.0 - state.tau0) * s1 * s2;
  t.expected_slot_us = t.p_idle * params.idle_slot_sigma_us +
                       t.p_ap * t_ap + t.p_t1 * t1 + t.p_t2 * t2;
  return t;
}

}  // namespace mdagg
