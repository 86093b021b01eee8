#include <gtest/gtest.h>

#include <cmath>

#include "mecassoc/mecassoc.hpp"
#include "support/oracles.hpp"

using namespace mecassoc;

namespace {

// Random association with equal shares inside each coalition.
struct RandomState {
  Partition part;
  Allocation alloc;
};

RandomState random_state(const Instance& inst, Rng& rng) {
  RandomState s;
  s.part.n_sbs = inst.n_sbs();
  for (int k = 0; k < inst.n_hrd(); ++k) s.part.hrd_sbs.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(inst.n_sbs()))));
  for (int k = 0; k < inst.n_csd(); ++k)
    s.part.csd_sbs.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(inst.n_sbs()) + 1)));
  s.alloc = Allocation::unallocated(inst);
  const auto hrd = s.part.hrd_coalitions();
  const auto csd = s.part.csd_coalitions();
  for (int n = 0; n < inst.n_sbs(); ++n) {
    write_allocation(s.alloc, coalition_utility(inst, MdClass::hrd, n, hrd[static_cast<std::size_t>(n)], AllocRule::equal_share));
    write_allocation(s.alloc, coalition_utility(inst, MdClass::csd, n, csd[static_cast<std::size_t>(n)], AllocRule::equal_share));
  }
  return s;
}

}  // namespace

TEST(HrdDelay, CachedFileHasNoBackhaulTerm) {
  const Instance inst = oracle::default_instance(1);
  const HrdDelay d = hrd_delay(inst.rates, inst.demand, 0, 0, 0, 0.5, 0.5);
  EXPECT_EQ(d.t_bh, 0.0);
  EXPECT_EQ(d.t_hr, d.t_dl);
}

TEST(HrdDelay, DirectSubstitution) {
  RateTable t;
  t.s_dl = {1e6};
  t.s_bh = {1e6};
  t.r_dl = Matrix<double>(1, 1, 4.0);
  t.r_bh = {4.0};
  DemandProfile d;
  d.catalog = Catalog::make(1, 5e6, 1.0);  // 4e7 bits
  d.cache = BinaryMatrix(1, 1, 0);
  const HrdDelay h = hrd_delay(t, d, 0, 0, 0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(h.t_dl, 10.0);
  EXPECT_DOUBLE_EQ(h.t_bh, 10.0);
  EXPECT_DOUBLE_EQ(hrd_delay(t, d, 0, 0, 0, 0.5, 1.0).t_dl, 20.0);
}

TEST(CsdDelay, TableValues) {
  const Instance inst = oracle::default_instance(1);
  const CsdDelay local = csd_delay(inst.rates, inst.demand, std::nullopt, 0, 0.3, 0.3);
  EXPECT_NEAR(local.t_lc, 1e9 / 1.4e9, 1e-15);
  EXPECT_NEAR(local.t_lc, 0.7142857, 1e-7);
  EXPECT_EQ(local.t_cs, local.t_lc);
  EXPECT_EQ(local.t_cs, csd_delay(inst.rates, inst.demand, std::nullopt, 0, 0.9, 0.1).t_cs);
  const CsdDelay edge = csd_delay(inst.rates, inst.demand, 0, 0, 1.0, 1.0);
  EXPECT_NEAR(edge.t_ed, 1e9 / 6e10, 1e-15);
  EXPECT_NEAR(edge.t_ul, 8e5 / (inst.rates.s_ul[0] * inst.rates.r_ul(0, 0)), 1e-12);
}

TEST(Objective, AllLocalNoHrds) {
  SystemParams p;
  const Scenario s = generate_scenario(p, Counts{5, 0, 6});
  const Instance inst = make_instance(s, generate_demand(s, DemandParams{}));
  Partition part{inst.n_sbs(), {}, std::vector<int>(6, inst.n_sbs())};
  const DelayReport r = objective(inst, part, Allocation::unallocated(inst));
  EXPECT_NEAR(r.objective, 6 * 1e9 / 1.4e9, 1e-12);
  EXPECT_EQ(r.n_local_csd, 6);
}

TEST(Objective, SingleCachedHrd) {
  SystemParams p;
  p.n_mbs = 1;
  const Scenario s = generate_scenario(p, Counts{1, 1, 0});
  const Instance inst = make_instance(s, generate_demand(s, DemandParams{}));
  Partition part{1, {0}, {}};
  Allocation alloc = Allocation::unallocated(inst);
  int file = 0;
  while (!inst.demand.request(0, file)) ++file;
  alloc.beta(0, 0, file) = 1.0;
  const DelayReport r = objective(inst, part, alloc);
  EXPECT_NEAR(r.objective, 4e7 / (inst.rates.s_dl[0] * inst.rates.r_dl(0, 0)), 1e-9);
  EXPECT_EQ(r.hrd_backhaul_s, 0.0);
}

TEST(Objective, MatchesNaiveResummation) {
  Rng rng(99);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = oracle::default_instance(seed, 27.5e6, 0.3 + 0.04 * seed, 0.6);
    const RandomState st = random_state(inst, rng);
    const double f = objective(inst, st.part, st.alloc).objective;
    EXPECT_NEAR(f, oracle::naive_objective(inst.scenario, inst.demand, st.part, st.alloc), 1e-9 * f);
  }
}

TEST(Objective, RearrangedFormAgrees) {
  Rng rng(5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance inst = oracle::default_instance(seed, 27.5e6);
    const RandomState st = random_state(inst, rng);
    const double f = objective(inst, st.part, st.alloc).objective;
    EXPECT_NEAR(objective_rearranged(inst, st.part, st.alloc), f, 1e-9 * f);
  }
}

TEST(Objective, EqualsSumOfCoalitionUtilities) {
  Rng rng(8);
  const Instance inst = oracle::default_instance(3, 27.5e6);
  const RandomState st = random_state(inst, rng);
  double v = 0.0;
  const auto hrd = st.part.hrd_coalitions();
  const auto csd = st.part.csd_coalitions();
  for (int n = 0; n < inst.n_sbs(); ++n)
    v += coalition_utility(inst, MdClass::hrd, n, hrd[static_cast<std::size_t>(n)], AllocRule::equal_share).value;
  for (int n = 0; n <= inst.n_sbs(); ++n)
    v += coalition_utility(inst, MdClass::csd, n, csd[static_cast<std::size_t>(n)], AllocRule::equal_share).value;
  const double f = objective(inst, st.part, st.alloc).objective;
  EXPECT_NEAR(v, f, 1e-9 * f);
}

TEST(Objective, ReportAggregatesAddUp) {
  Rng rng(2);
  const Instance inst = oracle::default_instance(4, 27.5e6);
  const RandomState st = random_state(inst, rng);
  const DelayReport r = objective(inst, st.part, st.alloc);
  EXPECT_NEAR(r.csd_total_s, r.csd_local_s + r.csd_offload_s, 1e-9);
  EXPECT_EQ(r.n_local_csd + r.n_edge_csd, inst.n_csd());
  EXPECT_EQ(r.n_backhauled_files + r.n_cached_hits, static_cast<int>(r.files.size()));
  EXPECT_NEAR(r.objective, r.hrd_total_s + r.csd_total_s, 1e-9 * r.objective);  // unit weights
}

TEST(Objective, IncreasingAFractionNeverIncreasesF) {
  Rng rng(21);
  const Instance inst = oracle::default_instance(6, 27.5e6);
  RandomState st = random_state(inst, rng);
  const double f0 = objective(inst, st.part, st.alloc).objective;
  for (int k = 0; k < inst.n_hrd(); ++k) {
    const int n = st.part.hrd_sbs[static_cast<std::size_t>(k)];
    for (int i = 0; i < inst.n_files(); ++i)
      if (inst.demand.request(k, i)) {
        Allocation a = st.alloc;
        a.beta(n, k, i) = std::min(1.0, a.beta(n, k, i) * 1.5);
        EXPECT_LE(objective(inst, st.part, a).objective, f0);
      }
  }
}

TEST(Objective, InconsistentAllocationListsOffenders) {
  const Instance inst = oracle::default_instance(1);
  Rng rng(1);
  RandomState st = random_state(inst, rng);
  const int n = st.part.hrd_sbs[0] == 0 ? 1 : 0;
  st.alloc.beta(n, 0, 0) = 0.5;
  try {
    objective(inst, st.part, st.alloc);
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("beta(n=" + std::to_string(n) + ",k=0,i=0)"), std::string::npos) << e.what();
  }
}

TEST(Objective, SeparableAcrossCoalitions) {
  // Moving one HRD between two SBSs changes F by the change of those two utilities.
  const Instance inst = oracle::default_instance(2, 27.5e6);
  Rng rng(4);
  RandomState st = random_state(inst, rng);
  const int k = 0, from = st.part.hrd_sbs[0], to = (from + 1) % inst.n_sbs();
  auto hrd = st.part.hrd_coalitions();
  const double before = coalition_utility(inst, MdClass::hrd, from, hrd[static_cast<std::size_t>(from)], AllocRule::equal_share).value +
                        coalition_utility(inst, MdClass::hrd, to, hrd[static_cast<std::size_t>(to)], AllocRule::equal_share).value;
  const double f0 = objective(inst, st.part, st.alloc).objective;
  clear_allocation(inst, st.alloc, MdClass::hrd, from, hrd[static_cast<std::size_t>(from)]);
  clear_allocation(inst, st.alloc, MdClass::hrd, to, hrd[static_cast<std::size_t>(to)]);
  st.part.hrd_sbs[0] = to;
  hrd = st.part.hrd_coalitions();
  const auto um = coalition_utility(inst, MdClass::hrd, from, hrd[static_cast<std::size_t>(from)], AllocRule::equal_share);
  const auto un = coalition_utility(inst, MdClass::hrd, to, hrd[static_cast<std::size_t>(to)], AllocRule::equal_share);
  write_allocation(st.alloc, um);
  write_allocation(st.alloc, un);
  const double f1 = objective(inst, st.part, st.alloc).objective;
  EXPECT_NEAR(f1 - f0, um.value + un.value - before, 1e-9 * f0);
  (void)k;
}

TEST(Constraints, AuditFlagsOverfullBand) {
  const Instance inst = oracle::default_instance(1);
  Rng rng(3);
  RandomState st = random_state(inst, rng);
  EXPECT_EQ(audit_constraints(inst, st.part, st.alloc).summary().find("C3"), std::string::npos);
  for (int k = 0; k < inst.n_csd(); ++k)
    if (!st.part.csd_is_local(k)) {
      const int n = st.part.csd_sbs[static_cast<std::size_t>(k)];
      st.alloc.alpha(n, k) = 1.0;
      st.alloc.gamma(n, k) = 1.0;
    }
  const ConstraintAudit a = audit_constraints(inst, st.part, st.alloc);
  EXPECT_FALSE(a.ok());
  EXPECT_NE(a.summary().find("C3"), std::string::npos);
}

TEST(Constraints, AuditFlagsStorageAndRateOrdering) {
  Instance inst = oracle::default_instance(1, 27.5e6);
  Rng rng(3);
  RandomState st = random_state(inst, rng);
  inst.demand.storage_bytes.assign(inst.demand.storage_bytes.size(), 25e6);
  bool any_edge = false;
  for (int k = 0; k < inst.n_csd(); ++k) any_edge |= !st.part.csd_is_local(k);
  const ConstraintAudit a = audit_constraints(inst, st.part, st.alloc);
  if (any_edge) {
    EXPECT_NE(a.summary().find("C6"), std::string::npos);
  }
  // Starve one backhauled pair.
  for (int k = 0; k < inst.n_hrd(); ++k) {
    const int n = st.part.hrd_sbs[static_cast<std::size_t>(k)];
    for (int i = 0; i < inst.n_files(); ++i)
      if (inst.demand.request(k, i) && !inst.demand.cache(n, i)) {
        st.alloc.eta(n, k, i) = 1e-6;
        EXPECT_NE(audit_constraints(inst, st.part, st.alloc).summary().find("C8"), std::string::npos);
        return;
      }
  }
}
