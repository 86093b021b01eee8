#pragma once

// Delay components of HRDs and CSDs and the weighted objective F.
//
// File and task sizes are configured in bytes (decimal units) and converted to
// bits before any rate arithmetic.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecassoc/common.hpp"
#include "mecassoc/content.hpp"
#include "mecassoc/radio.hpp"
#include "mecassoc/scenario.hpp"

namespace mecassoc {

/// Scenario, demand and the derived rate table, bundled for evaluation.
struct Instance {
  Scenario scenario;
  DemandProfile demand;
  RateTable rates;

  int n_sbs() const { return scenario.n_sbs(); }
  int n_hrd() const { return scenario.n_hrd(); }
  int n_csd() const { return scenario.n_csd(); }
  int n_files() const { return demand.catalog.n_files; }
  /// Index of the virtual coalition that groups locally computing CSDs.
  int local_index() const { return n_sbs(); }
};

inline Instance make_instance(Scenario scenario, DemandProfile demand) {
  demand.validate(scenario.n_sbs(), scenario.n_hrd(), scenario.n_csd());
  RateTable rates = build_rate_table(scenario, demand);
  return {std::move(scenario), std::move(demand), std::move(rates)};
}

/// Single-association structure of both MD classes. csd_sbs[k] == n_sbs
/// means CSD k computes locally (virtual coalition).
struct Partition {
  int n_sbs = 0;
  std::vector<int> hrd_sbs;
  std::vector<int> csd_sbs;

  bool csd_is_local(int k) const { return csd_sbs[static_cast<std::size_t>(k)] == n_sbs; }

  std::vector<std::vector<int>> hrd_coalitions() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n_sbs));
    for (std::size_t k = 0; k < hrd_sbs.size(); ++k) out[static_cast<std::size_t>(hrd_sbs[k])].push_back(static_cast<int>(k));
    return out;
  }

  /// n_sbs + 1 coalitions; the last one is the virtual (local) coalition.
  std::vector<std::vector<int>> csd_coalitions() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n_sbs) + 1);
    for (std::size_t k = 0; k < csd_sbs.size(); ++k) out[static_cast<std::size_t>(csd_sbs[k])].push_back(static_cast<int>(k));
    return out;
  }

  void validate(int n_hrd, int n_csd) const {
    if (hrd_sbs.size() != static_cast<std::size_t>(n_hrd) || csd_sbs.size() != static_cast<std::size_t>(n_csd))
      throw std::invalid_argument("partition does not cover the MD universe");
    for (int n : hrd_sbs)
      if (n < 0 || n >= n_sbs) throw std::invalid_argument("HRD associated with an unknown SBS");
    for (int n : csd_sbs)
      if (n < 0 || n > n_sbs) throw std::invalid_argument("CSD associated with an unknown SBS");
  }

  bool operator==(const Partition&) const = default;
};

/// Resource fractions. Every entry that is not in use holds kUnallocated.
struct Allocation {
  Matrix<double> alpha;  // [sbs][csd] uplink band
  Matrix<double> gamma;  // [sbs][csd] edge CPU
  Tensor3<double> beta;  // [sbs][hrd][file] downlink access band
  Tensor3<double> eta;   // [sbs][hrd][file] downlink backhaul band

  static Allocation unallocated(int n_sbs, int n_hrd, int n_csd, int n_files) {
    const auto ns = static_cast<std::size_t>(n_sbs);
    return {Matrix<double>(ns, static_cast<std::size_t>(n_csd), kUnallocated),
            Matrix<double>(ns, static_cast<std::size_t>(n_csd), kUnallocated),
            Tensor3<double>(ns, static_cast<std::size_t>(n_hrd), static_cast<std::size_t>(n_files), kUnallocated),
            Tensor3<double>(ns, static_cast<std::size_t>(n_hrd), static_cast<std::size_t>(n_files), kUnallocated)};
  }

  static Allocation unallocated(const Instance& inst) {
    return unallocated(inst.n_sbs(), inst.n_hrd(), inst.n_csd(), inst.n_files());
  }

  bool operator==(const Allocation&) const = default;
};

struct HrdDelay {
  double t_dl = 0.0;
  double t_bh = 0.0;  // zero when the file is cached
  double t_hr = 0.0;
};

/// Delivery delay of file i to HRD k through SBS n.
inline HrdDelay hrd_delay(const RateTable& rates, const DemandProfile& demand, int n, int k, int i, double beta,
                          double eta) {
  HrdDelay d;
  const double bits = demand.file_bits();
  d.t_dl = bits / rate_dl(rates, n, k, beta);
  if (!demand.cache(n, i)) d.t_bh = bits / rate_bh(rates, n, eta);
  d.t_hr = d.t_dl + d.t_bh;
  return d;
}

struct CsdDelay {
  double t_ul = 0.0;
  double t_ed = 0.0;
  double t_lc = 0.0;
  double t_cs = 0.0;
};

/// Completion delay of CSD k, offloaded to `sbs` or computed locally when
/// `sbs` is empty.
inline CsdDelay csd_delay(const RateTable& rates, const DemandProfile& demand, std::optional<int> sbs, int k,
                          double alpha, double gamma) {
  CsdDelay d;
  const auto kk = static_cast<std::size_t>(k);
  d.t_lc = demand.task_cycles[kk] / demand.local_cps[kk];
  if (sbs) {
    d.t_ul = 8.0 * demand.task_input_bytes[kk] / rate_ul(rates, *sbs, k, alpha);
    d.t_ed = demand.task_cycles[kk] / (gamma * demand.edge_cps[static_cast<std::size_t>(*sbs)]);
    d.t_cs = d.t_ul + d.t_ed;
  } else {
    d.t_cs = d.t_lc;
  }
  return d;
}

struct FileDelayRecord {
  int hrd = 0;
  int file = 0;
  int sbs = 0;
  bool cached = false;
  HrdDelay delay;
};

struct CsdDelayRecord {
  int csd = 0;
  int sbs = -1;  // -1 for local computing
  CsdDelay delay;
};

struct DelayReport {
  std::vector<FileDelayRecord> files;
  std::vector<double> hrd_time;  // t_hr summed over each HRD's files
  std::vector<CsdDelayRecord> csds;

  double hrd_total_s = 0.0;
  double hrd_backhaul_s = 0.0;
  double csd_total_s = 0.0;
  double csd_local_s = 0.0;
  double csd_offload_s = 0.0;
  int n_local_csd = 0;
  int n_edge_csd = 0;
  int n_backhauled_files = 0;
  int n_cached_hits = 0;

  double objective = 0.0;  // weighted sum F
};

namespace detail {

inline void check_entry(std::ostringstream& err, const char* name, int n, int k, int i, double v, bool active) {
  const bool ok = active ? (v >= kUnallocated * (1.0 - 1e-12) && v <= 1.0 + kFeasibilityTol) : v == kUnallocated;
  if (!ok) {
    err << ' ' << name << "(n=" << n << ",k=" << k;
    if (i >= 0) err << ",i=" << i;
    err << ")=" << v << (active ? " out of [theta,1]" : " should be theta");
  }
}

}  // namespace detail

/// Throws std::invalid_argument listing every offending (n, k, i) when the
/// allocation is not consistent with the partition.
inline void check_consistency(const Instance& inst, const Partition& part, const Allocation& alloc) {
  part.validate(inst.n_hrd(), inst.n_csd());
  std::ostringstream err;
  const int ns = inst.n_sbs(), nh = inst.n_hrd(), nc = inst.n_csd(), nf = inst.n_files();
  for (int n = 0; n < ns; ++n) {
    for (int k = 0; k < nc; ++k) {
      const bool active = part.csd_sbs[static_cast<std::size_t>(k)] == n;
      detail::check_entry(err, "alpha", n, k, -1, alloc.alpha(n, k), active);
      detail::check_entry(err, "gamma", n, k, -1, alloc.gamma(n, k), active);
    }
    for (int k = 0; k < nh; ++k)
      for (int i = 0; i < nf; ++i) {
        const bool requested = part.hrd_sbs[static_cast<std::size_t>(k)] == n && inst.demand.request(k, i);
        detail::check_entry(err, "beta", n, k, i, alloc.beta(n, k, i), requested);
        detail::check_entry(err, "eta", n, k, i, alloc.eta(n, k, i), requested && !inst.demand.cache(n, i));
      }
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("inconsistent partition/allocation:" + msg);
}

/// Evaluates every delay component and F for one association + allocation.
inline DelayReport objective(const Instance& inst, const Partition& part, const Allocation& alloc) {
  check_consistency(inst, part, alloc);
  const DemandProfile& dem = inst.demand;
  DelayReport rep;
  rep.hrd_time.assign(static_cast<std::size_t>(inst.n_hrd()), 0.0);
  for (int k = 0; k < inst.n_hrd(); ++k) {
    const int n = part.hrd_sbs[static_cast<std::size_t>(k)];
    for (int i = 0; i < inst.n_files(); ++i) {
      if (!dem.request(k, i)) continue;
      FileDelayRecord rec{k, i, n, dem.cache(n, i) != 0,
                          hrd_delay(inst.rates, dem, n, k, i, alloc.beta(n, k, i), alloc.eta(n, k, i))};
      rep.hrd_time[static_cast<std::size_t>(k)] += rec.delay.t_hr;
      rep.hrd_total_s += rec.delay.t_hr;
      rep.hrd_backhaul_s += rec.delay.t_bh;
      if (rec.cached)
        ++rep.n_cached_hits;
      else
        ++rep.n_backhauled_files;
      rep.objective += dem.hrd_weight[static_cast<std::size_t>(k)] * rec.delay.t_hr;
      rep.files.push_back(rec);
    }
  }
  for (int k = 0; k < inst.n_csd(); ++k) {
    CsdDelayRecord rec;
    rec.csd = k;
    if (part.csd_is_local(k)) {
      rec.delay = csd_delay(inst.rates, dem, std::nullopt, k, 0.0, 0.0);
      rep.csd_local_s += rec.delay.t_cs;
      ++rep.n_local_csd;
    } else {
      rec.sbs = part.csd_sbs[static_cast<std::size_t>(k)];
      rec.delay = csd_delay(inst.rates, dem, rec.sbs, k, alloc.alpha(rec.sbs, k), alloc.gamma(rec.sbs, k));
      rep.csd_offload_s += rec.delay.t_cs;
      ++rep.n_edge_csd;
    }
    rep.csd_total_s += rec.delay.t_cs;
    rep.objective += dem.csd_weight[static_cast<std::size_t>(k)] * rec.delay.t_cs;
    rep.csds.push_back(rec);
  }
  return rep;
}

/// F in the rearranged form: association term with t_lc subtracted for
/// offloaded CSDs, plus the sum of every CSD's weighted local delay.
inline double objective_rearranged(const Instance& inst, const Partition& part, const Allocation& alloc) {
  check_consistency(inst, part, alloc);
  const DemandProfile& dem = inst.demand;
  double hrd = 0.0, assoc = 0.0, local = 0.0;
  for (int n = 0; n < inst.n_sbs(); ++n) {
    for (int k = 0; k < inst.n_hrd(); ++k) {
      if (part.hrd_sbs[static_cast<std::size_t>(k)] != n) continue;
      for (int i = 0; i < inst.n_files(); ++i) {
        if (!dem.request(k, i)) continue;
        const HrdDelay d = hrd_delay(inst.rates, dem, n, k, i, alloc.beta(n, k, i), alloc.eta(n, k, i));
        const double b = dem.cache(n, i);
        hrd += dem.hrd_weight[static_cast<std::size_t>(k)] * ((1.0 - b) * (d.t_dl + d.t_bh) + b * d.t_dl);
      }
    }
    for (int k = 0; k < inst.n_csd(); ++k) {
      if (part.csd_sbs[static_cast<std::size_t>(k)] != n) continue;
      const CsdDelay d = csd_delay(inst.rates, dem, n, k, alloc.alpha(n, k), alloc.gamma(n, k));
      assoc += dem.csd_weight[static_cast<std::size_t>(k)] * (d.t_ul + d.t_ed - d.t_lc);
    }
  }
  for (int k = 0; k < inst.n_csd(); ++k)
    local += dem.csd_weight[static_cast<std::size_t>(k)] * dem.task_cycles[static_cast<std::size_t>(k)] /
             dem.local_cps[static_cast<std::size_t>(k)];
  return hrd + assoc + local;
}

}  // namespace mecassoc
