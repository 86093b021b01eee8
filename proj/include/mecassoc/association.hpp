#pragma once

// MD association: best-channel-gain initialisation (ABCG), the coalition
// game over HRD and CSD partitions, and the alternating driver (AMND) that
// interleaves the games with per-coalition reallocation.

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecassoc/allocation.hpp"
#include "mecassoc/common.hpp"
#include "mecassoc/delaymodel.hpp"
#include "mecassoc/rng.hpp"

namespace mecassoc {

struct GameOptions {
  int outer_iterations = 3;     // T1
  int game_iterations = 20000;  // T2
  int patience = -1;            // consecutive rejections; < 0 selects 50 * (#HRD + #CSD)
  bool exhaustive_finish = true;
  AllocRule move_rule = AllocRule::closed_form;
  bool alt_offload_rule = false;
  bool record_moves = false;
  std::uint64_t seed = 1;

  int effective_patience(const Instance& inst) const {
    return patience >= 0 ? patience : 50 * (inst.n_hrd() + inst.n_csd());
  }
};

enum class MoveKind { transfer, swap };

inline const char* to_string(MoveKind k) { return k == MoveKind::transfer ? "transfer" : "swap"; }

/// A transfer moves `md_from_m` from coalition m into coalition n. A swap also
/// moves `md_from_n` from n into m.
struct MoveProposal {
  MdClass md_class = MdClass::hrd;
  MoveKind kind = MoveKind::transfer;
  int m = 0;
  int n = 0;
  int md_from_m = -1;
  int md_from_n = -1;
};

struct MoveEvaluation {
  MoveProposal proposal;
  CoalitionUtility new_m;
  CoalitionUtility new_n;
  double old_value = 0.0;
  double new_value = 0.0;
  bool feasible = false;
  bool improving = false;  // feasible and strictly better by the margin

  double delta() const { return new_value - old_value; }
};

struct MoveRecord {
  int iteration = 0;
  MoveProposal proposal;
  bool accepted = false;
  std::string reason;  // "accepted", "infeasible", "not improving"
  double delta_v = 0.0;
  double objective = 0.0;
};

struct GameState {
  Partition partition;
  Allocation allocation;
  std::vector<CoalitionUtility> hrd_coalitions;  // one per SBS
  std::vector<CoalitionUtility> csd_coalitions;  // one per SBS plus the local coalition
  double objective = 0.0;
  std::vector<double> trace;
  std::vector<MoveRecord> moves;
  std::vector<int> fallback_hrds;  // HRDs that failed the ABCG rate filter
  int accepted_moves = 0;
  int outer_iteration = 0;  // t1
  int game_iteration = 0;   // t2 of the last game
  bool record_moves = false;
  Rng rng;

  std::vector<CoalitionUtility>& coalitions(MdClass c) { return c == MdClass::hrd ? hrd_coalitions : csd_coalitions; }
  const std::vector<CoalitionUtility>& coalitions(MdClass c) const {
    return c == MdClass::hrd ? hrd_coalitions : csd_coalitions;
  }

  /// Sum of the cached coalition utilities.
  double utility_sum() const {
    double s = 0.0;
    for (const auto& u : hrd_coalitions) s += u.value;
    for (const auto& u : csd_coalitions) s += u.value;
    return s;
  }

  bool all_feasible() const {
    for (const auto& u : hrd_coalitions)
      if (!u.feasible) return false;
    for (const auto& u : csd_coalitions)
      if (!u.feasible) return false;
    return true;
  }
};

/// Called with every state the driver exposes: after initialisation, after
/// each accepted move and after each reallocation.
using StateObserver = std::function<void(const GameState&, const char* stage)>;

namespace detail {

inline int strongest_sbs(const Matrix<double>& gain, int k, const std::vector<int>& candidates) {
  int best = -1;
  for (int n : candidates)
    if (best < 0 || gain(n, k) > gain(best, k)) best = n;
  return best;
}

inline void install(const Instance& inst, GameState& s, CoalitionUtility u) {
  auto& slot = s.coalitions(u.kind)[static_cast<std::size_t>(u.sbs)];
  clear_allocation(inst, s.allocation, u.kind, u.sbs, slot.members);
  write_allocation(s.allocation, u);
  slot = std::move(u);
}

inline void push_state(GameState& s, const StateObserver& observer, const char* stage) {
  s.objective = s.utility_sum();
  s.trace.push_back(s.objective);
  if (observer) observer(s, stage);
}

}  // namespace detail

/// Best-channel-gain association with equal resource shares.
inline GameState abcg_init(const Instance& inst, const GameOptions& opt = {}, const StateObserver& observer = {}) {
  const int ns = inst.n_sbs();
  if (ns < 1) throw std::invalid_argument("abcg_init: no SBS to associate with");
  const DemandProfile& d = inst.demand;
  GameState s;
  s.rng = Rng(derive_seed(opt.seed, Stream::game));
  s.record_moves = opt.record_moves;
  s.partition.n_sbs = ns;
  s.allocation = Allocation::unallocated(inst);

  std::vector<int> all(static_cast<std::size_t>(ns));
  for (int n = 0; n < ns; ++n) all[static_cast<std::size_t>(n)] = n;
  for (int k = 0; k < inst.n_hrd(); ++k) {
    std::vector<int> ok;
    for (int n = 0; n < ns; ++n)
      if (inst.rates.theta_lb(n, k) <= 1.0) ok.push_back(n);
    if (ok.empty()) {
      s.fallback_hrds.push_back(k);
      ok = all;
    }
    s.partition.hrd_sbs.push_back(detail::strongest_sbs(inst.scenario.gain_sbs_hrd, k, ok));
  }
  for (int k = 0; k < inst.n_csd(); ++k)
    s.partition.csd_sbs.push_back(detail::strongest_sbs(inst.scenario.gain_sbs_csd, k, all));

  // Offload decision against the initial equal shares.
  const auto initial = s.partition.csd_coalitions();
  std::vector<double> stored(static_cast<std::size_t>(ns));
  for (int n = 0; n < ns; ++n) stored[static_cast<std::size_t>(n)] = d.cached_bytes(n);
  for (int k = 0; k < inst.n_csd(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const int n = s.partition.csd_sbs[kk];
    const auto& members = initial[static_cast<std::size_t>(n)];
    const double share = 1.0 / static_cast<double>(members.size());
    const CsdDelay cd = csd_delay(inst.rates, d, n, k, share, share);
    const double cap = d.storage_bytes[static_cast<std::size_t>(n)] * (1.0 + kFeasibilityTol);
    bool local = false;
    if (opt.alt_offload_rule) {
      double all_inputs = d.cached_bytes(n);
      for (int j : members) all_inputs += d.task_input_bytes[static_cast<std::size_t>(j)];
      local = cd.t_ul + cd.t_ed > cd.t_lc && all_inputs <= cap;
    } else {
      const bool fits = stored[static_cast<std::size_t>(n)] + d.task_input_bytes[kk] <= cap;
      local = !(cd.t_ul + cd.t_ed <= cd.t_lc && fits);
    }
    if (local)
      s.partition.csd_sbs[kk] = ns;
    else
      stored[static_cast<std::size_t>(n)] += d.task_input_bytes[kk];
  }

  const auto hrd = s.partition.hrd_coalitions();
  const auto csd = s.partition.csd_coalitions();
  s.hrd_coalitions.resize(static_cast<std::size_t>(ns));
  s.csd_coalitions.resize(static_cast<std::size_t>(ns) + 1);
  for (int n = 0; n < ns; ++n)
    detail::install(inst, s, coalition_utility(inst, MdClass::hrd, n, hrd[static_cast<std::size_t>(n)],
                                               AllocRule::equal_share));
  for (int n = 0; n <= ns; ++n)
    detail::install(inst, s, coalition_utility(inst, MdClass::csd, n, csd[static_cast<std::size_t>(n)],
                                               AllocRule::equal_share));
  detail::push_state(s, observer, "init");
  return s;
}

/// Draws two distinct coalitions uniformly (empty ones included). Transfers a
/// uniform member when one side is empty, swaps one member each otherwise.
/// Returns nothing when every draw in the retry budget hit two empty sets.
inline std::optional<MoveProposal> propose_move(const GameState& s, MdClass kind, Rng& rng, int max_retries = 1000) {
  const auto& co = s.coalitions(kind);
  const std::size_t count = co.size();
  if (count < 2) throw std::invalid_argument("propose_move: need at least two coalitions");
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const std::size_t a = rng.index(count);
    std::size_t b = rng.index(count - 1);
    if (b >= a) ++b;
    const auto& ma = co[a].members;
    const auto& mb = co[b].members;
    if (ma.empty() && mb.empty()) continue;
    MoveProposal p;
    p.md_class = kind;
    if (ma.empty() || mb.empty()) {
      p.kind = MoveKind::transfer;
      p.m = static_cast<int>(ma.empty() ? b : a);
      p.n = static_cast<int>(ma.empty() ? a : b);
      const auto& src = co[static_cast<std::size_t>(p.m)].members;
      p.md_from_m = src[rng.index(src.size())];
    } else {
      p.kind = MoveKind::swap;
      p.m = static_cast<int>(a);
      p.n = static_cast<int>(b);
      p.md_from_m = ma[rng.index(ma.size())];
      p.md_from_n = mb[rng.index(mb.size())];
    }
    return p;
  }
  return std::nullopt;
}

inline MoveEvaluation evaluate_move(const Instance& inst, const GameState& s, const MoveProposal& p,
                                    AllocRule rule = AllocRule::closed_form) {
  const auto& co = s.coalitions(p.md_class);
  const CoalitionUtility& um = co[static_cast<std::size_t>(p.m)];
  const CoalitionUtility& un = co[static_cast<std::size_t>(p.n)];
  std::vector<int> new_m, new_n = un.members;
  for (int k : um.members)
    if (k != p.md_from_m) new_m.push_back(k);
  new_n.push_back(p.md_from_m);
  if (p.kind == MoveKind::swap) {
    new_n.erase(std::find(new_n.begin(), new_n.end(), p.md_from_n));
    new_m.push_back(p.md_from_n);
  }
  std::sort(new_m.begin(), new_m.end());
  std::sort(new_n.begin(), new_n.end());
  MoveEvaluation e;
  e.proposal = p;
  e.new_m = coalition_utility(inst, p.md_class, p.m, new_m, rule);
  e.new_n = coalition_utility(inst, p.md_class, p.n, new_n, rule);
  e.old_value = um.value + un.value;
  e.new_value = e.new_m.value + e.new_n.value;
  e.feasible = e.new_m.feasible && e.new_n.feasible;
  e.improving = e.feasible && e.new_value < e.old_value - kImprovementMargin;
  return e;
}

inline void apply_move(const Instance& inst, GameState& s, MoveEvaluation e) {
  const MoveProposal& p = e.proposal;
  auto& assoc = p.md_class == MdClass::hrd ? s.partition.hrd_sbs : s.partition.csd_sbs;
  assoc[static_cast<std::size_t>(p.md_from_m)] = p.n;
  if (p.kind == MoveKind::swap) assoc[static_cast<std::size_t>(p.md_from_n)] = p.m;
  detail::install(inst, s, std::move(e.new_m));
  detail::install(inst, s, std::move(e.new_n));
  ++s.accepted_moves;
}

/// Evaluates a proposal and applies it when both tentative coalitions are
/// feasible and strictly better. Returns whether the move was accepted.
inline bool evaluate_and_apply(const Instance& inst, GameState& s, const MoveProposal& p,
                               AllocRule rule = AllocRule::closed_form, const StateObserver& observer = {}) {
  MoveEvaluation e = evaluate_move(inst, s, p, rule);
  const bool accept = e.improving;
  const bool feasible = e.feasible;
  const double delta = e.delta();
  if (accept) {
    apply_move(inst, s, std::move(e));
    detail::push_state(s, observer, p.md_class == MdClass::hrd ? "hrd_move" : "csd_move");
  }
  if (s.record_moves)
    s.moves.push_back({s.game_iteration, p, accept, accept ? "accepted" : (feasible ? "not improving" : "infeasible"),
                       delta, s.objective});
  return accept;
}

/// Every single-MD transfer (to any other coalition) and every swap between
/// MDs of the class in different coalitions, in canonical order.
inline std::vector<MoveProposal> enumerate_moves(const GameState& s, MdClass kind) {
  std::vector<MoveProposal> out;
  const auto& assoc = kind == MdClass::hrd ? s.partition.hrd_sbs : s.partition.csd_sbs;
  const int count = static_cast<int>(s.coalitions(kind).size());
  const int k_max = static_cast<int>(assoc.size());
  for (int k = 0; k < k_max; ++k)
    for (int n = 0; n < count; ++n)
      if (n != assoc[static_cast<std::size_t>(k)]) out.push_back({kind, MoveKind::transfer, assoc[static_cast<std::size_t>(k)], n, k, -1});
  for (int a = 0; a < k_max; ++a)
    for (int b = a + 1; b < k_max; ++b)
      if (assoc[static_cast<std::size_t>(a)] != assoc[static_cast<std::size_t>(b)])
        out.push_back({kind, MoveKind::swap, assoc[static_cast<std::size_t>(a)], assoc[static_cast<std::size_t>(b)], a, b});
  return out;
}

inline std::optional<MoveEvaluation> find_improving_move(const Instance& inst, const GameState& s, MdClass kind,
                                                         AllocRule rule = AllocRule::closed_form) {
  for (const MoveProposal& p : enumerate_moves(s, kind)) {
    MoveEvaluation e = evaluate_move(inst, s, p, rule);
    if (e.improving) return e;
  }
  return std::nullopt;
}

struct StabilityAudit {
  int transfers_checked = 0;
  int swaps_checked = 0;
  std::vector<MoveEvaluation> improving;

  bool stable() const { return improving.empty(); }
};

/// Exhaustive scan of both MD classes for feasible, strictly improving moves.
inline StabilityAudit audit_nash_stability(const Instance& inst, const GameState& s,
                                           AllocRule rule = AllocRule::closed_form) {
  StabilityAudit out;
  for (MdClass kind : {MdClass::csd, MdClass::hrd})
    for (const MoveProposal& p : enumerate_moves(s, kind)) {
      (p.kind == MoveKind::transfer ? out.transfers_checked : out.swaps_checked)++;
      MoveEvaluation e = evaluate_move(inst, s, p, rule);
      if (e.improving) out.improving.push_back(std::move(e));
    }
  return out;
}

/// Random-move phase until `patience` consecutive rejections, then (when
/// enabled) repeated exhaustive scans until no improving move is left. Every
/// proposal and every scan counts against the T2 budget.
inline void run_coalition_game(const Instance& inst, GameState& s, MdClass kind, const GameOptions& opt,
                               const StateObserver& observer = {}) {
  if (opt.game_iterations < 1) throw std::invalid_argument("run_coalition_game: T2 must be at least 1");
  if (s.coalitions(kind).size() < 2) return;
  const int patience = opt.effective_patience(inst);
  int rejected = 0;
  s.game_iteration = 0;
  while (s.game_iteration < opt.game_iterations && rejected < patience) {
    ++s.game_iteration;
    const auto p = propose_move(s, kind, s.rng);
    if (!p) break;
    if (evaluate_and_apply(inst, s, *p, opt.move_rule, observer))
      rejected = 0;
    else
      ++rejected;
  }
  if (!opt.exhaustive_finish) return;
  while (s.game_iteration < opt.game_iterations) {
    ++s.game_iteration;
    auto e = find_improving_move(inst, s, kind, opt.move_rule);
    if (!e) break;
    const MoveProposal p = e->proposal;
    const double delta = e->delta();
    apply_move(inst, s, std::move(*e));
    detail::push_state(s, observer, kind == MdClass::hrd ? "hrd_move" : "csd_move");
    if (s.record_moves) s.moves.push_back({s.game_iteration, p, true, "accepted", delta, s.objective});
  }
}

/// Replaces each coalition's allocation by the closed form when that is
/// feasible and no worse than the current one.
inline void reallocate(const Instance& inst, GameState& s, const StateObserver& observer = {}) {
  for (MdClass kind : {MdClass::csd, MdClass::hrd}) {
    const auto count = s.coalitions(kind).size();
    for (std::size_t n = 0; n < count; ++n) {
      const CoalitionUtility& cur = s.coalitions(kind)[n];
      CoalitionUtility u = coalition_utility(inst, kind, static_cast<int>(n), cur.members, AllocRule::closed_form);
      if (u.feasible && u.value <= cur.value) detail::install(inst, s, std::move(u));
    }
  }
  detail::push_state(s, observer, "reallocate");
}

/// ABCG followed by T1 rounds of (CSD game, HRD game, reallocation).
inline GameState run_amnd(const Instance& inst, const GameOptions& opt = {}, const StateObserver& observer = {}) {
  if (opt.outer_iterations < 1) throw std::invalid_argument("run_amnd: T1 must be at least 1");
  if (opt.game_iterations < 1) throw std::invalid_argument("run_amnd: T2 must be at least 1");
  GameState s = abcg_init(inst, opt, observer);
  for (s.outer_iteration = 1; s.outer_iteration <= opt.outer_iterations; ++s.outer_iteration) {
    run_coalition_game(inst, s, MdClass::csd, opt, observer);
    run_coalition_game(inst, s, MdClass::hrd, opt, observer);
    reallocate(inst, s, observer);
  }
  s.outer_iteration = opt.outer_iterations;
  return s;
}

}  // namespace mecassoc
