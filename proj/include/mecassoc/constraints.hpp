#pragma once

// Audit of the full constraint set C1-C14 on an association + allocation.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "mecassoc/common.hpp"
#include "mecassoc/delaymodel.hpp"

namespace mecassoc {

struct ConstraintViolation {
  std::string constraint;  // "C1" .. "C14"
  std::string detail;
};

struct ConstraintAudit {
  std::vector<ConstraintViolation> violations;
  bool ok() const { return violations.empty(); }

  std::string summary() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.constraint << ": " << v.detail << '\n';
    return os.str();
  }
};

inline ConstraintAudit audit_constraints(const Instance& inst, const Partition& part, const Allocation& alloc,
                                         double tol = kFeasibilityTol) {
  ConstraintAudit out;
  auto fail = [&](const char* c, const std::string& what) { out.violations.push_back({c, what}); };
  const DemandProfile& dem = inst.demand;
  const int ns = inst.n_sbs(), nh = inst.n_hrd(), nc = inst.n_csd(), nf = inst.n_files();

  // C1/C9: each CSD on at most one SBS (or local); C2/C10: each HRD on exactly one.
  if (part.csd_sbs.size() != static_cast<std::size_t>(nc)) fail("C1", "CSD association vector has wrong size");
  for (int k = 0; k < nc && part.csd_sbs.size() == static_cast<std::size_t>(nc); ++k) {
    const int n = part.csd_sbs[static_cast<std::size_t>(k)];
    if (n < 0 || n > ns) fail("C9", "CSD " + std::to_string(k) + " has no valid association index");
  }
  if (part.hrd_sbs.size() != static_cast<std::size_t>(nh)) fail("C2", "HRD association vector has wrong size");
  for (int k = 0; k < nh && part.hrd_sbs.size() == static_cast<std::size_t>(nh); ++k) {
    const int n = part.hrd_sbs[static_cast<std::size_t>(k)];
    if (n < 0 || n >= ns) fail("C10", "HRD " + std::to_string(k) + " is not associated with exactly one SBS");
  }
  if (!out.ok()) return out;

  auto box = [&](const char* c, const char* name, double v, int n, int k, int i) {
    if (v < -tol || v > 1.0 + tol || !std::isfinite(v))
      fail(c, std::string(name) + "(" + std::to_string(n) + "," + std::to_string(k) +
                  (i >= 0 ? "," + std::to_string(i) : std::string()) + ")=" + format_double(v, 17));
  };

  for (int n = 0; n < ns; ++n) {
    double c3 = 0.0, c4 = 0.0, c5 = 0.0, c7 = 0.0, c6 = dem.cached_bytes(n);
    for (int k = 0; k < nc; ++k) {
      box("C11", "alpha", alloc.alpha(n, k), n, k, -1);
      box("C12", "gamma", alloc.gamma(n, k), n, k, -1);
      if (part.csd_sbs[static_cast<std::size_t>(k)] == n) {
        c3 += alloc.alpha(n, k);
        c7 += alloc.gamma(n, k);
        c6 += dem.task_input_bytes[static_cast<std::size_t>(k)];
      }
    }
    for (int k = 0; k < nh; ++k) {
      const bool assoc = part.hrd_sbs[static_cast<std::size_t>(k)] == n;
      for (int i = 0; i < nf; ++i) {
        box("C13", "beta", alloc.beta(n, k, i), n, k, i);
        box("C14", "eta", alloc.eta(n, k, i), n, k, i);
        if (!assoc || !dem.request(k, i)) continue;
        c4 += alloc.beta(n, k, i);
        if (dem.cache(n, i)) continue;
        c5 += alloc.eta(n, k, i);
        const double r_access = rate_dl(inst.rates, n, k, alloc.beta(n, k, i));
        const double r_backhaul = rate_bh(inst.rates, n, alloc.eta(n, k, i));
        if (r_access - r_backhaul > tol * std::max(r_access, r_backhaul))
          fail("C8", "SBS " + std::to_string(n) + " HRD " + std::to_string(k) + " file " + std::to_string(i) +
                         ": access rate " + format_double(r_access, 12) + " exceeds backhaul rate " +
                         format_double(r_backhaul, 12));
      }
    }
    const std::string at = "SBS " + std::to_string(n) + " sum=";
    if (c3 > 1.0 + tol) fail("C3", at + format_double(c3, 17));
    if (c4 > 1.0 + tol) fail("C4", at + format_double(c4, 17));
    if (c5 > 1.0 + tol) fail("C5", at + format_double(c5, 17));
    if (c7 > 1.0 + tol) fail("C7", at + format_double(c7, 17));
    const double cap = dem.storage_bytes[static_cast<std::size_t>(n)];
    if (c6 > cap * (1.0 + tol)) fail("C6", "SBS " + std::to_string(n) + " stores " + format_double(c6, 17) + " bytes");
  }
  return out;
}

}  // namespace mecassoc
