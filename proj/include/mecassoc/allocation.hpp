#pragma once

// Per-coalition resource allocation.
//
// Within one SBS the allocation problem separates into four independent
// blocks (uplink band, edge CPU, downlink access band, backhaul band), each of
// the form
//
//     minimize  sum_j z_j / x_j   s.t.  sum_j x_j <= 1,  lo_j <= x_j <= 1.
//
// Without active lower bounds the KKT point is x_j = sqrt(z_j) / sum sqrt(z),
// which is the closed form used here. The backhaul block carries the lower
// bound x_j >= theta_lb (access rate never above backhaul rate); the closed
// form clamps into [theta_lb, 1] and reports the coalition infeasible if the
// clamped fractions overrun the band. An independent bisection solver on the
// block multiplier is provided as a reference.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mecassoc/common.hpp"
#include "mecassoc/delaymodel.hpp"

namespace mecassoc {

struct CsdAllocInput {
  int sbs = 0;
  std::vector<int> members;
  std::vector<double> z_ul;  // w d_k / (S_ul r_ul)
  std::vector<double> z_ed;  // w C_k / C_ED
};

struct HrdPair {
  int hrd = 0;
  int file = 0;
  bool cached = false;
  double z_dl = 0.0;      // w L / (S_dl r_dl)
  double z_bh = 0.0;      // w L / (S_bh r_bh)
  double theta_lb = 0.0;  // minimum backhaul fraction
};

struct HrdAllocInput {
  int sbs = 0;
  std::vector<HrdPair> pairs;  // one per requested (member, file)
};

struct CsdFractions {
  std::vector<double> alpha;
  std::vector<double> gamma;
};

struct HrdFractions {
  std::vector<double> beta;
  std::vector<double> eta;  // kUnallocated for cached pairs
  bool feasible = true;
  bool clamped = false;  // some theta_lb exceeded the unclamped share
};

/// sqrt-weighted shares of a unit budget, capped at 1.
inline std::vector<double> sqrt_shares(std::span<const double> z) {
  double total = 0.0;
  for (double v : z) total += std::sqrt(v);
  std::vector<double> x;
  x.reserve(z.size());
  for (double v : z) x.push_back(std::min(std::sqrt(v) / total, 1.0));
  return x;
}

inline double block_cost(std::span<const double> z, std::span<const double> x) {
  double c = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) c += z[j] / x[j];
  return c;
}

inline CsdFractions allocate_csd(const CsdAllocInput& in) {
  if (in.members.empty()) return {};
  return {sqrt_shares(in.z_ul), sqrt_shares(in.z_ed)};
}

inline HrdFractions allocate_hrd(const HrdAllocInput& in) {
  HrdFractions out;
  if (in.pairs.empty()) return out;
  std::vector<double> z_dl, z_bh;
  for (const HrdPair& p : in.pairs) {
    z_dl.push_back(p.z_dl);
    if (!p.cached) z_bh.push_back(p.z_bh);
  }
  out.beta = sqrt_shares(z_dl);
  const std::vector<double> share = z_bh.empty() ? std::vector<double>{} : sqrt_shares(z_bh);
  double eta_sum = 0.0;
  std::size_t j = 0;
  for (const HrdPair& p : in.pairs) {
    if (p.cached) {
      out.eta.push_back(kUnallocated);
      continue;
    }
    const double s = share[j++];
    if (p.theta_lb > s) out.clamped = true;
    if (p.theta_lb > 1.0) out.feasible = false;
    const double eta = std::min(std::max(s, p.theta_lb), 1.0);
    out.eta.push_back(eta);
    eta_sum += eta;
  }
  if (eta_sum > 1.0 + kFeasibilityTol) out.feasible = false;
  return out;
}

inline double hrd_cost(const HrdAllocInput& in, const HrdFractions& f) {
  double c = 0.0;
  for (std::size_t j = 0; j < in.pairs.size(); ++j) {
    c += in.pairs[j].z_dl / f.beta[j];
    if (!in.pairs[j].cached) c += in.pairs[j].z_bh / f.eta[j];
  }
  return c;
}

inline double csd_cost(const CsdAllocInput& in, const CsdFractions& f) {
  return block_cost(in.z_ul, f.alpha) + block_cost(in.z_ed, f.gamma);
}

// ---------------------------------------------------------------------------
// Reference solver.

struct BlockSolution {
  std::vector<double> x;
  double objective = 0.0;
  double multiplier = 0.0;
  double residual = 0.0;  // |sum x - 1| (0 when the budget is slack)
  int iterations = 0;
  bool feasible = true;
};

/// Solves one block by bisection on the budget multiplier: for a multiplier
/// lambda the stationary point is x_j = clamp(sqrt(z_j / lambda), lo_j, 1),
/// and lambda is chosen so the budget is met with equality. Bisection runs on
/// log(lambda) over [min z, max z / theta^2].
inline BlockSolution oracle_solve_block(std::span<const double> z, std::span<const double> lower, double tol = 1e-12,
                                        int max_iterations = 500) {
  BlockSolution out;
  const std::size_t m = z.size();
  if (m == 0) return out;
  std::vector<double> lo(m);
  for (std::size_t j = 0; j < m; ++j) lo[j] = std::max(lower[j], kUnallocated);
  const double lo_sum = std::accumulate(lo.begin(), lo.end(), 0.0);
  auto fill = [&](double lambda) {
    out.x.resize(m);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out.x[j] = std::clamp(std::sqrt(z[j] / lambda), lo[j], 1.0);
      s += out.x[j];
    }
    return s;
  };
  if (std::any_of(lo.begin(), lo.end(), [](double v) { return v > 1.0; }) || lo_sum > 1.0 + kFeasibilityTol) {
    out.x = lo;
    out.feasible = false;
    out.objective = block_cost(z, out.x);
    return out;
  }
  if (m == 1) {
    out.x = {1.0};
    out.objective = z[0];
    out.multiplier = z[0];
    return out;
  }
  double log_lo = std::log(*std::min_element(z.begin(), z.end()));
  double log_hi = std::log(*std::max_element(z.begin(), z.end()) / (kUnallocated * kUnallocated));
  double lambda = std::exp(log_hi);
  double sum = fill(lambda);
  while (out.iterations < max_iterations) {
    ++out.iterations;
    const double mid = 0.5 * (log_lo + log_hi);
    lambda = std::exp(mid);
    sum = fill(lambda);
    if (std::abs(sum - 1.0) <= tol) break;
    if (sum > 1.0)
      log_lo = mid;
    else
      log_hi = mid;
    if (log_hi - log_lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
  }
  out.multiplier = lambda;
  out.residual = std::abs(sum - 1.0);
  if (out.residual > tol) {
    std::ostringstream os;
    os << "oracle bisection did not converge: residual " << out.residual << " after " << out.iterations
       << " iterations";
    throw InfeasibleError(os.str());
  }
  out.objective = block_cost(z, out.x);
  return out;
}

struct HrdOracleResult {
  std::vector<double> beta;
  std::vector<double> eta;  // kUnallocated for cached pairs
  double objective = 0.0;
  double residual = 0.0;
  bool feasible = true;
};

struct CsdOracleResult {
  std::vector<double> alpha;
  std::vector<double> gamma;
  double objective = 0.0;
  double residual = 0.0;
};

inline HrdOracleResult oracle_solve_p3(const HrdAllocInput& in, double tol = 1e-12) {
  HrdOracleResult out;
  std::vector<double> z_dl, z_bh, lo_dl, lo_bh;
  for (const HrdPair& p : in.pairs) {
    z_dl.push_back(p.z_dl);
    lo_dl.push_back(kUnallocated);
    if (!p.cached) {
      z_bh.push_back(p.z_bh);
      lo_bh.push_back(p.theta_lb);
    }
  }
  const BlockSolution access = oracle_solve_block(z_dl, lo_dl, tol);
  const BlockSolution backhaul = oracle_solve_block(z_bh, lo_bh, tol);
  out.beta = access.x;
  std::size_t j = 0;
  for (const HrdPair& p : in.pairs) out.eta.push_back(p.cached ? kUnallocated : backhaul.x[j++]);
  out.objective = access.objective + backhaul.objective;
  out.residual = std::max(access.residual, backhaul.residual);
  out.feasible = access.feasible && backhaul.feasible;
  return out;
}

inline CsdOracleResult oracle_solve_p3(const CsdAllocInput& in, double tol = 1e-12) {
  const std::vector<double> lo(in.z_ul.size(), kUnallocated);
  const BlockSolution up = oracle_solve_block(in.z_ul, lo, tol);
  const BlockSolution cpu = oracle_solve_block(in.z_ed, lo, tol);
  return {up.x, cpu.x, up.objective + cpu.objective, std::max(up.residual, cpu.residual)};
}

// ---------------------------------------------------------------------------
// Coalition utilities.

enum class AllocRule { closed_form, equal_share };

inline const char* to_string(AllocRule r) { return r == AllocRule::closed_form ? "closed_form" : "equal_share"; }

inline HrdAllocInput make_hrd_input(const Instance& inst, int n, std::span<const int> members) {
  HrdAllocInput in;
  in.sbs = n;
  const DemandProfile& d = inst.demand;
  const RateTable& r = inst.rates;
  const double bits = d.file_bits();
  const double bh_rate = r.s_bh[static_cast<std::size_t>(n)] * r.r_bh[static_cast<std::size_t>(n)];
  for (int k : members) {
    const double w = d.hrd_weight[static_cast<std::size_t>(k)];
    const double dl_rate = r.s_dl[static_cast<std::size_t>(n)] * r.r_dl(n, k);
    for (int i = 0; i < inst.n_files(); ++i) {
      if (!d.request(k, i)) continue;
      in.pairs.push_back({k, i, d.cache(n, i) != 0, w * bits / dl_rate, w * bits / bh_rate, r.theta_lb(n, k)});
    }
  }
  return in;
}

inline CsdAllocInput make_csd_input(const Instance& inst, int n, std::span<const int> members) {
  CsdAllocInput in;
  in.sbs = n;
  const DemandProfile& d = inst.demand;
  const RateTable& r = inst.rates;
  for (int k : members) {
    const auto kk = static_cast<std::size_t>(k);
    const double w = d.csd_weight[kk];
    in.members.push_back(k);
    in.z_ul.push_back(w * 8.0 * d.task_input_bytes[kk] / (r.s_ul[static_cast<std::size_t>(n)] * r.r_ul(n, k)));
    in.z_ed.push_back(w * d.task_cycles[kk] / d.edge_cps[static_cast<std::size_t>(n)]);
  }
  return in;
}

inline HrdFractions equal_share_hrd(const HrdAllocInput& in) {
  HrdFractions f;
  const auto backhauled = std::count_if(in.pairs.begin(), in.pairs.end(), [](const HrdPair& p) { return !p.cached; });
  for (const HrdPair& p : in.pairs) {
    f.beta.push_back(1.0 / static_cast<double>(in.pairs.size()));
    f.eta.push_back(p.cached ? kUnallocated : 1.0 / static_cast<double>(backhauled));
  }
  return f;
}

inline CsdFractions equal_share_csd(const CsdAllocInput& in) {
  const double share = in.members.empty() ? 0.0 : 1.0 / static_cast<double>(in.members.size());
  return {std::vector<double>(in.members.size(), share), std::vector<double>(in.members.size(), share)};
}

/// Weighted delay of one coalition under the allocation produced by `rule`,
/// with the feasibility verdict of that allocation.
struct CoalitionUtility {
  MdClass kind = MdClass::hrd;
  int sbs = 0;
  bool local = false;  // virtual coalition of locally computing CSDs
  std::vector<int> members;
  double value = 0.0;
  bool feasible = true;
  HrdAllocInput hrd_input;
  HrdFractions hrd;
  CsdAllocInput csd_input;
  CsdFractions csd;
};

inline bool hrd_fractions_feasible(const HrdAllocInput& in, const HrdFractions& f) {
  double sum_beta = 0.0, sum_eta = 0.0;
  for (std::size_t j = 0; j < in.pairs.size(); ++j) {
    const double b = f.beta[j], e = f.eta[j];
    if (b < 0.0 || b > 1.0 + kFeasibilityTol) return false;
    sum_beta += b;
    if (in.pairs[j].cached) continue;
    if (e < 0.0 || e > 1.0 + kFeasibilityTol) return false;
    sum_eta += e;
    // access rate <= backhaul rate  <=>  eta >= theta_lb * beta
    const double need = in.pairs[j].theta_lb * b;
    if (need - e > kFeasibilityTol * std::max(need, e)) return false;
  }
  return sum_beta <= 1.0 + kFeasibilityTol && sum_eta <= 1.0 + kFeasibilityTol;
}

inline CoalitionUtility coalition_utility(const Instance& inst, MdClass kind, int sbs, std::span<const int> members,
                                          AllocRule rule = AllocRule::closed_form) {
  CoalitionUtility u;
  u.kind = kind;
  u.sbs = sbs;
  u.members.assign(members.begin(), members.end());
  if (members.empty()) return u;
  const DemandProfile& d = inst.demand;
  if (kind == MdClass::hrd) {
    u.hrd_input = make_hrd_input(inst, sbs, members);
    u.hrd = rule == AllocRule::closed_form ? allocate_hrd(u.hrd_input) : equal_share_hrd(u.hrd_input);
    u.feasible = u.hrd.feasible && hrd_fractions_feasible(u.hrd_input, u.hrd);
    u.value = hrd_cost(u.hrd_input, u.hrd);
    return u;
  }
  if (sbs == inst.local_index()) {
    u.local = true;
    for (int k : members)
      u.value += d.csd_weight[static_cast<std::size_t>(k)] * d.task_cycles[static_cast<std::size_t>(k)] /
                 d.local_cps[static_cast<std::size_t>(k)];
    return u;
  }
  u.csd_input = make_csd_input(inst, sbs, members);
  u.csd = rule == AllocRule::closed_form ? allocate_csd(u.csd_input) : equal_share_csd(u.csd_input);
  u.value = csd_cost(u.csd_input, u.csd);
  const double sum_alpha = std::accumulate(u.csd.alpha.begin(), u.csd.alpha.end(), 0.0);
  const double sum_gamma = std::accumulate(u.csd.gamma.begin(), u.csd.gamma.end(), 0.0);
  double stored = d.cached_bytes(sbs);
  for (int k : members) stored += d.task_input_bytes[static_cast<std::size_t>(k)];
  u.feasible = sum_alpha <= 1.0 + kFeasibilityTol && sum_gamma <= 1.0 + kFeasibilityTol &&
               stored <= d.storage_bytes[static_cast<std::size_t>(sbs)] * (1.0 + kFeasibilityTol);
  return u;
}

/// Resets the entries of `members` at SBS `sbs` to kUnallocated.
inline void clear_allocation(const Instance& inst, Allocation& alloc, MdClass kind, int sbs,
                             std::span<const int> members) {
  if (kind == MdClass::csd) {
    if (sbs == inst.local_index()) return;
    for (int k : members) alloc.alpha(sbs, k) = alloc.gamma(sbs, k) = kUnallocated;
    return;
  }
  for (int k : members)
    for (int i = 0; i < inst.n_files(); ++i) alloc.beta(sbs, k, i) = alloc.eta(sbs, k, i) = kUnallocated;
}

/// Writes a coalition's fractions into the global allocation.
inline void write_allocation(Allocation& alloc, const CoalitionUtility& u) {
  if (u.kind == MdClass::csd) {
    if (u.local) return;
    for (std::size_t j = 0; j < u.csd_input.members.size(); ++j) {
      alloc.alpha(u.sbs, u.csd_input.members[j]) = u.csd.alpha[j];
      alloc.gamma(u.sbs, u.csd_input.members[j]) = u.csd.gamma[j];
    }
    return;
  }
  for (std::size_t j = 0; j < u.hrd_input.pairs.size(); ++j) {
    const HrdPair& p = u.hrd_input.pairs[j];
    alloc.beta(u.sbs, p.hrd, p.file) = u.hrd.beta[j];
    alloc.eta(u.sbs, p.hrd, p.file) = u.hrd.eta[j];
  }
}

}  // namespace mecassoc
