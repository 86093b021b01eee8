#pragma once

// Band/time shares per SBS and spectral efficiencies per link.
//
// Access links use a*W, backhaul links (1-a)*W; each is split in three
// reuse subbands and then equally among the M SBSs of a macrocell. Uplink
// gets T1/T of the coherence block, downlink the rest. Noise is taken over the
// per-SBS subband of the link, so SNR does not depend on the fractions that
// multiply the rate afterwards.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mecassoc/common.hpp"
#include "mecassoc/content.hpp"
#include "mecassoc/scenario.hpp"

namespace mecassoc {

/// Which link classes carry traffic. A degenerate split (a or T1/T at 0 or 1)
/// is only an error for a class that is used.
struct LinkUsage {
  bool downlink = true;
  bool uplink = true;
  bool backhaul = true;
};

inline LinkUsage link_usage(const Scenario& s, const DemandProfile& d) {
  LinkUsage u;
  u.downlink = s.n_hrd() > 0;
  u.uplink = s.n_csd() > 0;
  u.backhaul = false;
  for (std::size_t k = 0; k < d.request.rows() && !u.backhaul; ++k)
    for (std::size_t i = 0; i < d.request.cols() && !u.backhaul; ++i)
      if (d.request(k, i))
        for (std::size_t n = 0; n < d.cache.rows(); ++n)
          if (!d.cache(n, i)) {
            u.backhaul = true;
            break;
          }
  return u;
}

struct RateTable {
  double access_fraction = 0.5;
  std::vector<double> s_dl;  // Hz
  std::vector<double> s_ul;
  std::vector<double> s_bh;
  std::vector<double> noise_access_mw;
  std::vector<double> noise_backhaul_mw;
  Matrix<double> r_dl;       // [sbs][hrd], bit/s/Hz
  Matrix<double> r_ul;       // [sbs][csd]
  std::vector<double> r_bh;  // [sbs]
  Matrix<double> theta_lb;   // [sbs][hrd]: a r_dl / ((1-a) r_bh)

  int n_sbs() const { return static_cast<int>(s_dl.size()); }
};

inline double spectral_efficiency(double p_mw, double gain, double noise_mw) {
  return std::log2(1.0 + p_mw * gain / noise_mw);
}

inline RateTable build_rate_table(const Scenario& s, LinkUsage usage = {}) {
  const SystemParams& p = s.params;
  p.validate();
  const double a = p.access_fraction;
  const double up = p.uplink_time_fraction;
  const double down = 1.0 - up;
  if ((a == 0.0 && (usage.downlink || usage.uplink)) || (a == 1.0 && usage.backhaul))
    throw InfeasibleError("degenerate partition: frequency split leaves a used link class without band");
  if ((up == 0.0 && usage.uplink) || (up == 1.0 && (usage.downlink || usage.backhaul)))
    throw InfeasibleError("degenerate partition: time split leaves a used link class without slots");

  const int n_sbs = s.n_sbs();
  const int n_hrd = s.n_hrd();
  const int n_csd = s.n_csd();
  const double psd_mw = dbm_to_mw(p.noise_psd_dbm_hz);
  const double p_sbs = dbm_to_mw(p.p_sbs_dbm);
  const double p_md = dbm_to_mw(p.p_md_dbm);
  const double p_mbs = dbm_to_mw(p.p_mbs_dbm);

  RateTable t;
  t.access_fraction = a;
  t.r_dl = Matrix<double>(static_cast<std::size_t>(n_sbs), static_cast<std::size_t>(n_hrd));
  t.r_ul = Matrix<double>(static_cast<std::size_t>(n_sbs), static_cast<std::size_t>(n_csd));
  t.theta_lb = Matrix<double>(static_cast<std::size_t>(n_sbs), static_cast<std::size_t>(n_hrd));
  for (int n = 0; n < n_sbs; ++n) {
    const double m = s.cell_size(n);
    const double access_band = a * p.bandwidth_hz / (3.0 * m);
    const double backhaul_band = (1.0 - a) * p.bandwidth_hz / (3.0 * m);
    t.s_dl.push_back(access_band * down);
    t.s_ul.push_back(access_band * up);
    t.s_bh.push_back(backhaul_band * down);
    const double noise_acc = psd_mw * access_band;
    const double noise_bh = psd_mw * backhaul_band;
    t.noise_access_mw.push_back(noise_acc);
    t.noise_backhaul_mw.push_back(noise_bh);
    // Unused degenerate classes keep zero efficiency.
    const double r_bh = noise_bh > 0.0 ? spectral_efficiency(p_mbs, s.gain_mbs_sbs[static_cast<std::size_t>(n)], noise_bh) : 0.0;
    t.r_bh.push_back(r_bh);
    for (int k = 0; k < n_hrd; ++k) {
      t.r_dl(n, k) = noise_acc > 0.0 ? spectral_efficiency(p_sbs, s.gain_sbs_hrd(n, k), noise_acc) : 0.0;
      t.theta_lb(n, k) = (1.0 - a) * r_bh > 0.0 ? a * t.r_dl(n, k) / ((1.0 - a) * r_bh)
                                                 : std::numeric_limits<double>::infinity();
    }
    for (int k = 0; k < n_csd; ++k)
      t.r_ul(n, k) = noise_acc > 0.0 ? spectral_efficiency(p_md, s.gain_sbs_csd(n, k), noise_acc) : 0.0;
  }
  return t;
}

inline RateTable build_rate_table(const Scenario& s, const DemandProfile& d) {
  return build_rate_table(s, link_usage(s, d));
}

/// Downlink access rate (bit/s) of HRD k at SBS n with band fraction beta.
inline double rate_dl(const RateTable& t, int n, int k, double beta) {
  return beta * t.s_dl[static_cast<std::size_t>(n)] * t.r_dl(n, k);
}

inline double rate_ul(const RateTable& t, int n, int k, double alpha) {
  return alpha * t.s_ul[static_cast<std::size_t>(n)] * t.r_ul(n, k);
}

/// Downlink backhaul rate (bit/s) through SBS n with band fraction eta.
inline double rate_bh(const RateTable& t, int n, double eta) {
  return eta * t.s_bh[static_cast<std::size_t>(n)] * t.r_bh[static_cast<std::size_t>(n)];
}

}  // namespace mecassoc
