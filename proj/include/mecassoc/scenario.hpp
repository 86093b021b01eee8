#pragma once

// Network deployment and quasi-static channel snapshot.
//
// MBSs sit on a hexagonal lattice; SBSs and both MD classes are dropped
// uniformly into a disc of radius isd/2 around the MBS of their macrocell.
// Every link gets one LOS draw and one shadowing draw at generation time and
// keeps them for the lifetime of the scenario.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "mecassoc/common.hpp"
#include "mecassoc/rng.hpp"

namespace mecassoc {

struct SystemParams {
  double bandwidth_hz = 20e6;         // W
  double access_fraction = 0.5;       // a: share of W for access links
  double uplink_time_fraction = 0.5;  // T1/T; downlink gets 1 - T1/T
  int n_mbs = 3;
  double isd_m = 1000.0;
  double p_mbs_dbm = 46.0;
  double p_sbs_dbm = 24.0;
  double p_md_dbm = 23.0;
  double noise_psd_dbm_hz = -174.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz))
      throw std::invalid_argument("bandwidth_hz must be positive and finite");
    if (!(access_fraction >= 0.0 && access_fraction <= 1.0))
      throw std::invalid_argument("access_fraction must lie in [0, 1]");
    if (!(uplink_time_fraction >= 0.0 && uplink_time_fraction <= 1.0))
      throw std::invalid_argument("uplink_time_fraction must lie in [0, 1]");
    if (n_mbs < 1) throw std::invalid_argument("n_mbs must be at least 1");
    if (!(isd_m > 0.0) || !std::isfinite(isd_m)) throw std::invalid_argument("isd_m must be positive");
    for (double p : {p_mbs_dbm, p_sbs_dbm, p_md_dbm, noise_psd_dbm_hz})
      if (!std::isfinite(p)) throw std::invalid_argument("powers and noise PSD must be finite");
  }

  bool operator==(const SystemParams&) const = default;
};

struct Counts {
  int sbs_per_cell = 5;  // M
  int n_hrd = 20;
  int n_csd = 20;

  bool operator==(const Counts&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class LinkClass { mbs_md, mbs_sbs, sbs_md };

/// Pathloss, LOS probability and shadowing parameters of one link class.
struct LinkModel {
  LinkClass link_class = LinkClass::sbs_md;
  double los_intercept_db = 0.0;
  double los_slope_db = 0.0;
  double nlos_intercept_db = 0.0;
  double nlos_slope_db = 0.0;
  double shadow_std_los_db = 0.0;
  double shadow_std_nlos_db = 0.0;

  static LinkModel for_class(LinkClass c) {
    switch (c) {
      case LinkClass::mbs_md:
        return {c, 30.8, 24.2, 2.7, 42.8, 6.0, 6.0};
      case LinkClass::mbs_sbs:
        return {c, 30.2, 23.5, 16.3, 36.3, 6.0, 6.0};
      case LinkClass::sbs_md:
        return {c, 41.1, 20.9, 32.9, 37.5, 6.0, 4.0};
    }
    throw std::invalid_argument("unknown link class");
  }
};

/// Pathloss in dB. Distances below 1 m are clamped to 1 m.
inline double pathloss_db(const LinkModel& model, double d, bool los) {
  const double dc = std::max(d, 1.0);
  const double lg = std::log10(dc);
  return los ? model.los_intercept_db + model.los_slope_db * lg
             : model.nlos_intercept_db + model.nlos_slope_db * lg;
}

inline double los_probability(const LinkModel& model, double d) {
  if (!(d > 0.0)) return 1.0;
  switch (model.link_class) {
    case LinkClass::mbs_md: {
      const double e = std::exp(-d / 63.0);
      return (1.0 - e) * std::min(18.0 / d, 1.0) + e;
    }
    case LinkClass::mbs_sbs: {
      const double e = std::exp(-d / 72.0);
      return (1.0 - e) * std::min(18.0 / d, 1.0) + e;
    }
    case LinkClass::sbs_md:
      return 0.5 - std::min(0.5, 5.0 * std::exp(-156.0 / d)) + std::min(0.5, 5.0 * std::exp(-d / 30.0));
  }
  return 1.0;
}

/// The two random numbers consumed by one link.
struct LinkDraws {
  double los_uniform = 0.0;         // U[0,1); LOS iff below the LOS probability
  double shadow_std_normal = 0.0;   // N(0,1); scaled by the class shadowing std
};

struct LinkRealization {
  bool los = false;
  double pathloss_db = 0.0;
  double shadow_db = 0.0;
  double gain = 0.0;  // linear
};

inline LinkRealization realize_link(const LinkModel& model, double d, LinkDraws draws) {
  LinkRealization out;
  out.los = draws.los_uniform < los_probability(model, d);
  out.pathloss_db = pathloss_db(model, d, out.los);
  out.shadow_db = (out.los ? model.shadow_std_los_db : model.shadow_std_nlos_db) * draws.shadow_std_normal;
  out.gain = std::pow(10.0, -(out.pathloss_db + out.shadow_db) / 10.0);
  return out;
}

inline double channel_gain(const LinkModel& model, double d, LinkDraws draws) {
  return realize_link(model, d, draws).gain;
}

struct Scenario {
  SystemParams params;
  Counts counts;
  std::vector<Point> mbs_pos;
  std::vector<Point> sbs_pos;
  std::vector<Point> hrd_pos;
  std::vector<Point> csd_pos;
  std::vector<int> sbs_cell;      // MBS whose disc generated the SBS
  std::vector<int> backhaul_mbs;  // nearest MBS (s_n)
  Matrix<double> gain_sbs_hrd;    // [n][k]
  Matrix<double> gain_sbs_csd;    // [n][k]
  std::vector<double> gain_mbs_sbs;  // [n], to backhaul_mbs[n]

  int n_sbs() const { return static_cast<int>(sbs_pos.size()); }
  int n_hrd() const { return static_cast<int>(hrd_pos.size()); }
  int n_csd() const { return static_cast<int>(csd_pos.size()); }

  /// Number of SBSs in the macrocell of SBS n.
  int cell_size(int n) const {
    return static_cast<int>(std::count(sbs_cell.begin(), sbs_cell.end(), sbs_cell[static_cast<std::size_t>(n)]));
  }

  bool operator==(const Scenario&) const = default;
};

/// First n points of a hexagonal lattice with spacing isd, ordered by ring and
/// then by angle, starting at the origin.
inline std::vector<Point> hex_lattice(int n, double isd) {
  int radius = 0;
  while (1 + 3 * radius * (radius + 1) < n) ++radius;
  struct Cand {
    int ring;
    double angle;
    Point p;
  };
  std::vector<Cand> cands;
  for (int q = -radius; q <= radius; ++q) {
    for (int r = -radius; r <= radius; ++r) {
      const int ring = std::max({std::abs(q), std::abs(r), std::abs(q + r)});
      if (ring > radius) continue;
      const Point p{isd * (q + 0.5 * r), isd * (std::sqrt(3.0) / 2.0) * r};
      double angle = std::atan2(p.y, p.x);
      if (angle < -1e-12) angle += 2.0 * std::numbers::pi;
      if (ring == 0) angle = 0.0;
      cands.push_back({ring, angle, p});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(a.ring, a.angle) < std::tie(b.ring, b.angle);
  });
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) out.push_back(cands[static_cast<std::size_t>(i)].p);
  return out;
}

namespace detail {

inline constexpr double kMinSeparationM = 1.0;
inline constexpr int kMaxPlacementRetries = 1000;

inline Point sample_disc(Point centre, double radius, Rng& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {centre.x + r * std::cos(phi), centre.y + r * std::sin(phi)};
}

// Resamples until the point keeps kMinSeparationM from every avoided node.
inline Point place(Point centre, double radius, const std::vector<Point>& avoid, Rng& rng, const char* what) {
  for (int attempt = 0; attempt < kMaxPlacementRetries; ++attempt) {
    const Point p = sample_disc(centre, radius, rng);
    const bool clear = std::all_of(avoid.begin(), avoid.end(),
                                   [&](Point q) { return distance(p, q) >= kMinSeparationM; });
    if (clear) return p;
  }
  throw std::runtime_error(std::string("could not place ") + what + " without collocating another node");
}

}  // namespace detail

inline Scenario generate_scenario(const SystemParams& params, const Counts& counts) {
  params.validate();
  if (counts.sbs_per_cell < 1) throw std::invalid_argument("sbs_per_cell must be at least 1");
  if (counts.n_hrd < 0 || counts.n_csd < 0) throw std::invalid_argument("MD counts must be non-negative");

  Scenario s;
  s.params = params;
  s.counts = counts;
  s.mbs_pos = hex_lattice(params.n_mbs, params.isd_m);
  const double radius = params.isd_m / 2.0;

  Rng deploy(derive_seed(params.seed, Stream::deployment));
  for (int c = 0; c < params.n_mbs; ++c) {
    const Point centre = s.mbs_pos[static_cast<std::size_t>(c)];
    for (int j = 0; j < counts.sbs_per_cell; ++j) {
      std::vector<Point> avoid = s.sbs_pos;
      avoid.push_back(centre);
      s.sbs_pos.push_back(detail::place(centre, radius, avoid, deploy, "SBS"));
      s.sbs_cell.push_back(c);
    }
  }
  // MD k lives in macrocell k mod n_mbs.
  auto drop_mds = [&](int count, std::vector<Point>& out, const char* what) {
    for (int k = 0; k < count; ++k) {
      const Point centre = s.mbs_pos[static_cast<std::size_t>(k % params.n_mbs)];
      out.push_back(detail::place(centre, radius, s.sbs_pos, deploy, what));
    }
  };
  drop_mds(counts.n_hrd, s.hrd_pos, "HRD");
  drop_mds(counts.n_csd, s.csd_pos, "CSD");

  for (const Point& sbs : s.sbs_pos) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < params.n_mbs; ++m) {
      const double d = distance(sbs, s.mbs_pos[static_cast<std::size_t>(m)]);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    s.backhaul_mbs.push_back(best);
  }

  Rng los_rng(derive_seed(params.seed, Stream::los));
  Rng shadow_rng(derive_seed(params.seed, Stream::shadowing));
  auto draw = [&] { return LinkDraws{los_rng.uniform(), shadow_rng.normal()}; };

  const LinkModel backhaul = LinkModel::for_class(LinkClass::mbs_sbs);
  const LinkModel access = LinkModel::for_class(LinkClass::sbs_md);
  const int n_sbs = s.n_sbs();
  for (int n = 0; n < n_sbs; ++n) {
    const Point mbs = s.mbs_pos[static_cast<std::size_t>(s.backhaul_mbs[static_cast<std::size_t>(n)])];
    s.gain_mbs_sbs.push_back(channel_gain(backhaul, distance(mbs, s.sbs_pos[static_cast<std::size_t>(n)]), draw()));
  }
  s.gain_sbs_hrd = Matrix<double>(static_cast<std::size_t>(n_sbs), static_cast<std::size_t>(counts.n_hrd));
  s.gain_sbs_csd = Matrix<double>(static_cast<std::size_t>(n_sbs), static_cast<std::size_t>(counts.n_csd));
  for (int n = 0; n < n_sbs; ++n) {
    const Point sbs = s.sbs_pos[static_cast<std::size_t>(n)];
    for (int k = 0; k < counts.n_hrd; ++k)
      s.gain_sbs_hrd(n, k) = channel_gain(access, distance(sbs, s.hrd_pos[static_cast<std::size_t>(k)]), draw());
    for (int k = 0; k < counts.n_csd; ++k)
      s.gain_sbs_csd(n, k) = channel_gain(access, distance(sbs, s.csd_pos[static_cast<std::size_t>(k)]), draw());
  }
  return s;
}

/// Copy of a scenario with different band/time split factors. Geometry and
/// channel draws are untouched, which is what parameter sweeps need.
inline Scenario with_split(const Scenario& base, double access_fraction, double uplink_time_fraction) {
  Scenario s = base;
  s.params.access_fraction = access_fraction;
  s.params.uplink_time_fraction = uplink_time_fraction;
  s.params.validate();
  return s;
}

}  // namespace mecassoc
