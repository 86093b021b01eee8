// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mecassoc/mecassoc.hpp"
#include "support/oracles.hpp"

using namespace mecassoc;

namespace {

// Tolerances.
constexpr double kFractionRelTol = 1e-8;
constexpr double kObjectiveRelTol = 1e-9;
constexpr double kClosedFormBudgetS = 2.0;
constexpr int kOracleInstances = 200;
constexpr int kMaxMembers = 10;
constexpr int kDominanceRuns = 100;
constexpr double kDominanceTol = 1e-9;
constexpr double kDominanceBudgetS = 60.0;
constexpr double kTraceTol = 1e-12;
constexpr int kStabilityRuns = 20;
constexpr int kTinyInstances = 10;
constexpr int kTrendsRequired = 7;
constexpr double kAuditTol = 1e-9;
constexpr double kZipfTol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 6) { return format_double(v, digits); }

struct Report {
  int failed = 0;

  void criterion(bool pass, const std::string& name) {
    std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", name.c_str());
    if (!pass) ++failed;
  }
  void detail(const std::string& line) { std::printf("       %s\n", line.c_str()); }
};

// Audits every state the drivers expose.
struct StateAuditor {
  long states = 0;
  long violations = 0;
  std::string first;

  void audit(const Instance& inst, const GameState& s, const char* stage) {
    ++states;
    const ConstraintAudit a = audit_constraints(inst, s.partition, s.allocation, kAuditTol);
    if (!a.ok()) {
      ++violations;
      if (first.empty()) first = std::string(stage) + ": " + a.summary();
    }
  }

  StateObserver observer_for(const Instance& inst) {
    return [this, &inst](const GameState& s, const char* stage) { audit(inst, s, stage); };
  }

  SweepObserver sweep_observer() {
    return [this](const Instance& inst, const GameState& s, const char* stage) { audit(inst, s, stage); };
  }
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<double>::min()); }

void closed_form_vs_oracle(Report& rep) {
  Rng rng(20240601);
  double max_frac = 0.0, max_obj = 0.0;
  int hrd_cases = 0, csd_cases = 0, cached_pairs = 0, backhaul_pairs = 0;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < kOracleInstances; ++trial) {
    const int members = 1 + static_cast<int>(rng.index(kMaxMembers));
    if (trial % 2 == 0) {
      // Lower bounds below the unclamped share, so no clamp binds.
      const HrdAllocInput in = oracle::random_hrd_input(rng, members, 0.4, 0.95);
      const HrdFractions f = allocate_hrd(in);
      if (f.clamped) throw std::logic_error("generator produced a clamped instance");
      const HrdOracleResult o = oracle_solve_p3(in);
      for (std::size_t j = 0; j < in.pairs.size(); ++j) {
        max_frac = std::max(max_frac, rel_err(f.beta[j], o.beta[j]));
        if (!in.pairs[j].cached) max_frac = std::max(max_frac, rel_err(f.eta[j], o.eta[j]));
        (in.pairs[j].cached ? cached_pairs : backhaul_pairs)++;
      }
      max_obj = std::max(max_obj, rel_err(hrd_cost(in, f), o.objective));
      ++hrd_cases;
    } else {
      const CsdAllocInput in = oracle::random_csd_input(rng, members);
      const CsdFractions f = allocate_csd(in);
      const CsdOracleResult o = oracle_solve_p3(in);
      for (std::size_t j = 0; j < in.members.size(); ++j) {
        max_frac = std::max(max_frac, rel_err(f.alpha[j], o.alpha[j]));
        max_frac = std::max(max_frac, rel_err(f.gamma[j], o.gamma[j]));
      }
      max_obj = std::max(max_obj, rel_err(csd_cost(in, f), o.objective));
      ++csd_cases;
    }
  }
  const double elapsed = seconds_since(t0);

  // Instances where some lower bound exceeds its unclamped share.
  int clamped = 0, cf_infeasible = 0, oracle_infeasible = 0, ordered = 0;
  double raw_gap_sum = 0.0, both_gap_sum = 0.0;
  int both = 0;
  while (clamped < kOracleInstances) {
    const int members = 2 + static_cast<int>(rng.index(kMaxMembers - 1));
    const HrdAllocInput in = oracle::random_hrd_input(rng, members, 0.3, 3.0);
    const HrdFractions f = allocate_hrd(in);
    if (!f.clamped) continue;
    ++clamped;
    const HrdOracleResult o = oracle_solve_p3(in);
    const double inf = std::numeric_limits<double>::infinity();
    const double cf_value = f.feasible ? hrd_cost(in, f) : inf;
    const double or_value = o.feasible ? o.objective : inf;
    cf_infeasible += !f.feasible;
    oracle_infeasible += !o.feasible;
    if (cf_value >= or_value * (1.0 - kObjectiveRelTol) || (std::isinf(cf_value) && std::isinf(or_value))) ++ordered;
    if (o.feasible) raw_gap_sum += (hrd_cost(in, f) - o.objective) / o.objective;
    if (f.feasible && o.feasible) {
      both_gap_sum += (cf_value - or_value) / or_value;
      ++both;
    }
  }
  const int oracle_feasible = clamped - oracle_infeasible;

  const bool pass = max_frac <= kFractionRelTol && max_obj <= kObjectiveRelTol && elapsed < kClosedFormBudgetS &&
                    ordered == clamped;
  rep.criterion(pass, "1 closed-form allocation matches the reference solver");
  rep.detail("unclamped: " + std::to_string(hrd_cases) + " HRD + " + std::to_string(csd_cases) + " CSD instances, " +
             std::to_string(cached_pairs) + " cached / " + std::to_string(backhaul_pairs) + " backhauled pairs");
  rep.detail("max fraction rel err " + num(max_frac, 3) + " (tol " + num(kFractionRelTol, 1) + "), max objective rel gap " +
             num(max_obj, 3) + " (tol " + num(kObjectiveRelTol, 1) + "), " + num(elapsed, 3) + " s (budget " +
             num(kClosedFormBudgetS, 2) + " s)");
  rep.detail("clamped: " + std::to_string(clamped) + " instances, closed form infeasible on " +
             std::to_string(cf_infeasible) + ", reference infeasible on " + std::to_string(oracle_infeasible));
  rep.detail("closed form >= reference (infeasible counted as +inf) on " + std::to_string(ordered) + "/" +
             std::to_string(clamped));
  rep.detail("mean raw gap of the clamped closed form vs reference: " +
             (oracle_feasible ? num(raw_gap_sum / oracle_feasible, 4) : std::string("n/a")) +
             " (over-budget fractions, can be negative)");
  rep.detail("mean gap where both are feasible: " + (both ? num(both_gap_sum / both, 4) : std::string("n/a")) + " over " +
             std::to_string(both) + " instances");
}

struct DominanceRun {
  std::uint64_t seed = 0;
  Instance inst;
  GameState amnd;
};

double table_or_tight_storage(std::uint64_t seed) { return seed <= 50 ? 2e9 : 27.5e6; }

void dominance_and_traces(Report& rep, StateAuditor& auditor, std::vector<DominanceRun>& keep) {
  int dominated = 0, strict = 0, monotone = 0, feasible = 0;
  double worst_step = -std::numeric_limits<double>::infinity();
  double gain_sum = 0.0;
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= kDominanceRuns; ++seed) {
    const Instance inst = oracle::default_instance(seed, table_or_tight_storage(seed));
    GameOptions opt;
    opt.seed = seed;
    const StateObserver obs = auditor.observer_for(inst);
    const GameState abcg = abcg_init(inst, opt, obs);
    GameState amnd = run_amnd(inst, opt, obs);
    dominated += amnd.objective <= abcg.objective + kDominanceTol;
    strict += amnd.objective < abcg.objective - kDominanceTol;
    gain_sum += (abcg.objective - amnd.objective) / abcg.objective;
    feasible += amnd.all_feasible();
    bool ok = true;
    for (std::size_t j = 1; j < amnd.trace.size(); ++j) {
      worst_step = std::max(worst_step, amnd.trace[j] - amnd.trace[j - 1]);
      ok &= amnd.trace[j] <= amnd.trace[j - 1] + kTraceTol;
    }
    monotone += ok;
    if ((seed <= kStabilityRuns / 2) || (seed > 50 && seed <= 50 + kStabilityRuns / 2))
      keep.push_back({seed, inst, std::move(amnd)});
  }
  const double elapsed = seconds_since(t0);
  rep.criterion(dominated == kDominanceRuns && elapsed < kDominanceBudgetS, "2 AMND never worse than ABCG");
  rep.detail(std::to_string(dominated) + "/" + std::to_string(kDominanceRuns) + " runs with F_AMND <= F_ABCG + " +
             num(kDominanceTol, 1) + ", strictly better on " + std::to_string(strict) + ", mean relative reduction " +
             num(gain_sum / kDominanceRuns, 4));
  rep.detail("seeds 1-50 use 2e9 B storage, 51-100 use 27.5e6 B; " + std::to_string(feasible) +
             " final states feasible; " + num(elapsed, 3) + " s (budget " + num(kDominanceBudgetS, 3) +
             " s, constraint audit included)");
  rep.criterion(monotone == kDominanceRuns, "3 AMND objective traces are nonincreasing");
  rep.detail(std::to_string(monotone) + "/" + std::to_string(kDominanceRuns) + " traces within " + num(kTraceTol, 1) +
             " per step; largest step " + num(worst_step, 4));
}

void nash_stability(Report& rep, const std::vector<DominanceRun>& runs) {
  int stable = 0;
  long transfers = 0, swaps = 0;
  std::string first;
  for (const DominanceRun& r : runs) {
    const StabilityAudit a = audit_nash_stability(r.inst, r.amnd);
    transfers += a.transfers_checked;
    swaps += a.swaps_checked;
    if (a.stable())
      ++stable;
    else if (first.empty())
      first = "seed " + std::to_string(r.seed) + ": " + std::to_string(a.improving.size()) + " improving moves";
  }
  rep.criterion(stable == static_cast<int>(runs.size()) && runs.size() == kStabilityRuns,
                "4 converged partitions are Nash-stable");
  rep.detail(std::to_string(stable) + "/" + std::to_string(runs.size()) + " runs with no feasible move improving by more than " +
             num(kImprovementMargin, 1) + "; " + std::to_string(transfers) + " transfers and " + std::to_string(swaps) +
             " swaps checked");
  if (!first.empty()) rep.detail(first);
}

void brute_force_floor(Report& rep, StateAuditor& auditor) {
  int above = 0, feasibility_match = 0, optimal = 0;
  double gap_sum = 0.0, worst_gap = 0.0;
  long partitions = 0;
  for (std::uint64_t seed = 1; seed <= kTinyInstances; ++seed) {
    const double storage = seed <= kTinyInstances / 2 ? 2e9 : 25.5e6;
    const Instance inst = oracle::tiny_instance(seed, 2, 3, 3, storage);
    GameOptions opt;
    opt.seed = seed;
    const GameState s = run_amnd(inst, opt, auditor.observer_for(inst));
    const oracle::EnumeratedOptimum best = oracle::enumerate_optimum(inst);
    partitions += best.partitions;
    const double f_opt = best.objective();
    feasibility_match += s.all_feasible() == std::isfinite(f_opt);
    above += s.objective >= f_opt * (1.0 - 1e-12);
    const double gap = (s.objective - f_opt) / f_opt;
    gap_sum += gap;
    worst_gap = std::max(worst_gap, gap);
    optimal += gap <= 1e-9;
  }
  rep.criterion(above == kTinyInstances && feasibility_match == kTinyInstances,
                "5 AMND is bounded below by the enumerated optimum");
  rep.detail(std::to_string(above) + "/" + std::to_string(kTinyInstances) + " with F_AMND >= F_opt; feasibility agrees on " +
             std::to_string(feasibility_match) + "; " + std::to_string(partitions) + " partitions enumerated");
  rep.detail("mean relative gap " + num(gap_sum / kTinyInstances, 4) + ", worst " + num(worst_gap, 4) + ", optimal on " +
             std::to_string(optimal) + "/" + std::to_string(kTinyInstances));
}

void trends(Report& rep, StateAuditor& auditor) {
  ExperimentConfig c = trend_config();
  c.algorithms = {Algorithm::abcg, Algorithm::amnd};
  const long before = auditor.states;
  const auto t0 = Clock::now();
  const TrendSuite suite = run_trend_suite(c, auditor.sweep_observer());
  const double elapsed = seconds_since(t0);
  const long states = auditor.states - before;

  const int passed = suite.passed();
  rep.criterion(passed >= kTrendsRequired, "6 delay trends against a, T1/T and delta (" + std::to_string(passed) + "/8, need " +
                                               std::to_string(kTrendsRequired) + ")");
  rep.detail(std::to_string(c.seeds.size()) + " seeds, storage " + num(c.demand.storage_bytes, 4) +
             " B per SBS, AMND rows averaged over seeds and delta in {0.6, 1.0, 1.4}; " + num(elapsed, 3) + " s, " +
             std::to_string(states) + " states");
  for (const TrendCriterion& k : suite.criteria) {
    rep.detail(std::string(k.pass() ? "ok   " : "miss ") + k.label);
    for (const TrendResult& t : k.trends) {
      rep.detail("       " + t.spec.metric + ": " + t.detail);
      rep.detail("       " + format_series(t));
      const std::vector<SweepRow>& rows = &k == &suite.criteria.back() ? suite.delta_rows
                                          : (k.label.find("T1/T") != std::string::npos ? suite.t1_rows : suite.a_rows);
      const TrendResult b = trend_check(rows, {t.spec.metric, t.spec.shape, "ABCG"});
      rep.detail("       ABCG for comparison: " + b.detail);
    }
  }
}

void zipf(Report& rep) {
  double worst = 0.0;
  bool uniform = true;
  int cases = 0;
  for (int n : {1, 2, 3, 10, 20, 100, 1000, 10000})
    for (double d = 0.0; d <= 10.0 + 1e-12; d += 0.25) {
      const auto p = zipf_popularity(n, d);
      worst = std::max(worst, std::abs(accurate_sum(p) - 1.0));
      ++cases;
      if (d == 0.0)
        for (double v : p) uniform &= v == 1.0 / n;
    }
  rep.criterion(worst <= kZipfTol && uniform, "8 Zipf popularity is normalised");
  rep.detail(std::to_string(cases) + " (I, delta) pairs, I <= 1e4, delta in [0, 10]: max |sum - 1| = " + num(worst, 3) +
             " (tol " + num(kZipfTol, 1) + "); delta = 0 exactly uniform: " + (uniform ? "yes" : "no"));
}

}  // namespace

int main() {
  Report rep;
  StateAuditor auditor;
  std::vector<DominanceRun> stability_runs;
  closed_form_vs_oracle(rep);
  dominance_and_traces(rep, auditor, stability_runs);
  nash_stability(rep, stability_runs);
  brute_force_floor(rep, auditor);
  trends(rep, auditor);
  rep.criterion(auditor.violations == 0 && auditor.states > 0, "7 constraints hold at every exposed state");
  rep.detail(std::to_string(auditor.states) + " states audited within " + num(kAuditTol, 1) + ", " +
             std::to_string(auditor.violations) + " with violations");
  if (!auditor.first.empty()) rep.detail(auditor.first);
  zipf(rep);
  std::printf("%d criteria failed\n", rep.failed);
  return rep.failed == 0 ? 0 : 1;
}
