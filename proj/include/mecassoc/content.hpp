#pragma once

// File popularity, HRD requests, SBS cache placement and the remaining
// per-device demand quantities (task sizes, CPU capabilities, storage, weights).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mecassoc/common.hpp"
#include "mecassoc/rng.hpp"
#include "mecassoc/scenario.hpp"

namespace mecassoc {

enum class CachePolicy { popular_first, sampled };

inline const char* to_string(CachePolicy p) { return p == CachePolicy::popular_first ? "popular_first" : "sampled"; }

/// Compensated (Neumaier) sum.
inline double accurate_sum(const std::vector<double>& v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

/// Zipf popularity: Pr_i proportional to 1 / i^delta, i = 1..I.
inline std::vector<double> zipf_popularity(int n_files, double delta) {
  if (n_files < 1) throw std::invalid_argument("zipf_popularity: need at least one file");
  if (!(delta >= 0.0)) throw std::invalid_argument("zipf_popularity: delta must be non-negative");
  std::vector<double> w(static_cast<std::size_t>(n_files));
  for (int i = 0; i < n_files; ++i) w[static_cast<std::size_t>(i)] = delta == 0.0 ? 1.0 : std::pow(i + 1.0, -delta);
  const double total = accurate_sum(w);
  for (double& x : w) x /= total;
  return w;
}

struct Catalog {
  int n_files = 20;
  double file_size_bytes = 5e6;  // L; every file has the same size
  double delta = 1.0;
  std::vector<double> popularity;

  static Catalog make(int n_files, double file_size_bytes, double delta) {
    if (!(file_size_bytes > 0.0)) throw std::invalid_argument("file size must be positive");
    return {n_files, file_size_bytes, delta, zipf_popularity(n_files, delta)};
  }

  bool operator==(const Catalog&) const = default;
};

namespace detail {

// Draws `count` distinct indices, each round proportional to the remaining weights.
inline std::vector<int> sample_without_replacement(const std::vector<double>& weights, int count, Rng& rng) {
  std::vector<double> w = weights;
  std::vector<int> picked;
  for (int draw = 0; draw < count; ++draw) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    int chosen = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        acc += w[i];
        chosen = static_cast<int>(i);
        if (target < acc) break;
      }
    }
    if (chosen < 0) {
      // Remaining mass underflowed (very large delta): take the lowest unpicked index.
      for (std::size_t i = 0; i < w.size(); ++i)
        if (std::find(picked.begin(), picked.end(), static_cast<int>(i)) == picked.end()) {
          chosen = static_cast<int>(i);
          break;
        }
    }
    picked.push_back(chosen);
    w[static_cast<std::size_t>(chosen)] = 0.0;
  }
  return picked;
}

}  // namespace detail

/// request(k, i) = 1 iff HRD k requests file i. Each HRD draws
/// `requests_per_hrd` distinct files proportional to popularity.
inline BinaryMatrix draw_requests(const Catalog& catalog, int n_hrd, int requests_per_hrd, Rng& rng) {
  if (requests_per_hrd < 1 || requests_per_hrd > catalog.n_files)
    throw std::invalid_argument("requests_per_hrd must lie in [1, n_files]");
  BinaryMatrix req(static_cast<std::size_t>(n_hrd), static_cast<std::size_t>(catalog.n_files), 0);
  for (int k = 0; k < n_hrd; ++k)
    for (int i : detail::sample_without_replacement(catalog.popularity, requests_per_hrd, rng)) req(k, i) = 1;
  return req;
}

/// cache(n, i) = 1 iff SBS n stores file i; never exceeds storage_bytes[n].
inline BinaryMatrix place_cache(const Catalog& catalog, const std::vector<double>& storage_bytes, CachePolicy policy,
                                Rng& rng) {
  const std::size_t n_sbs = storage_bytes.size();
  BinaryMatrix cache(n_sbs, static_cast<std::size_t>(catalog.n_files), 0);
  for (std::size_t n = 0; n < n_sbs; ++n) {
    const double cap = storage_bytes[n];
    int fit = 0;
    while (fit < catalog.n_files && (fit + 1) * catalog.file_size_bytes <= cap) ++fit;
    if (policy == CachePolicy::popular_first) {
      std::vector<int> order(static_cast<std::size_t>(catalog.n_files));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return catalog.popularity[static_cast<std::size_t>(a)] > catalog.popularity[static_cast<std::size_t>(b)];
      });
      for (int j = 0; j < fit; ++j) cache(n, order[static_cast<std::size_t>(j)]) = 1;
    } else {
      for (int i : detail::sample_without_replacement(catalog.popularity, fit, rng)) cache(n, i) = 1;
    }
  }
  return cache;
}

struct DemandParams {
  int n_files = 20;
  double file_size_bytes = 5e6;
  double delta = 1.0;
  int requests_per_hrd = 1;
  CachePolicy cache_policy = CachePolicy::popular_first;
  double storage_bytes = 2e9;      // D_n
  double task_input_bytes = 1e5;   // d_k
  double task_cycles = 1e9;        // C_k
  double local_cps = 1.4e9;        // C_k^LC
  double edge_cps = 6e10;          // C_n^ED
  double weight = 1.0;             // w_k

  bool operator==(const DemandParams&) const = default;
};

struct DemandProfile {
  Catalog catalog;
  BinaryMatrix request;  // [hrd][file]
  BinaryMatrix cache;    // [sbs][file]
  std::vector<double> task_input_bytes;  // per CSD
  std::vector<double> task_cycles;       // per CSD
  std::vector<double> local_cps;         // per CSD
  std::vector<double> edge_cps;          // per SBS
  std::vector<double> storage_bytes;     // per SBS
  std::vector<double> hrd_weight;
  std::vector<double> csd_weight;

  double file_bits() const { return 8.0 * catalog.file_size_bytes; }

  /// Bytes of SBS n's storage occupied by cached files.
  double cached_bytes(int n) const {
    int files = 0;
    for (std::size_t i = 0; i < cache.cols(); ++i) files += cache(static_cast<std::size_t>(n), i);
    return files * catalog.file_size_bytes;
  }

  void validate(int n_sbs, int n_hrd, int n_csd) const {
    auto check = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("invalid demand profile: ") + what);
    };
    check(request.rows() == static_cast<std::size_t>(n_hrd), "request rows");
    check(cache.rows() == static_cast<std::size_t>(n_sbs), "cache rows");
    check(task_input_bytes.size() == static_cast<std::size_t>(n_csd), "task_input size");
    check(storage_bytes.size() == static_cast<std::size_t>(n_sbs), "storage size");
    for (int n = 0; n < n_sbs; ++n)
      check(cached_bytes(n) <= storage_bytes[static_cast<std::size_t>(n)], "cache exceeds storage");
    for (int k = 0; k < n_hrd; ++k) {
      int c = 0;
      for (std::size_t i = 0; i < request.cols(); ++i) c += request(static_cast<std::size_t>(k), i);
      check(c >= 1, "HRD without a request");
    }
    for (double w : hrd_weight) check(w > 0.0, "weights must be positive");
    for (double w : csd_weight) check(w > 0.0, "weights must be positive");
  }

  bool operator==(const DemandProfile&) const = default;
};

/// Demand for a scenario. Requests and cache sampling use their own streams
/// derived from the scenario seed.
inline DemandProfile generate_demand(const Scenario& scenario, const DemandParams& p) {
  const int n_sbs = scenario.n_sbs();
  const int n_hrd = scenario.n_hrd();
  const int n_csd = scenario.n_csd();
  DemandProfile d;
  d.catalog = Catalog::make(p.n_files, p.file_size_bytes, p.delta);
  Rng req_rng(derive_seed(scenario.params.seed, Stream::requests));
  Rng cache_rng(derive_seed(scenario.params.seed, Stream::cache));
  d.request = draw_requests(d.catalog, n_hrd, p.requests_per_hrd, req_rng);
  d.storage_bytes.assign(static_cast<std::size_t>(n_sbs), p.storage_bytes);
  d.cache = place_cache(d.catalog, d.storage_bytes, p.cache_policy, cache_rng);
  d.task_input_bytes.assign(static_cast<std::size_t>(n_csd), p.task_input_bytes);
  d.task_cycles.assign(static_cast<std::size_t>(n_csd), p.task_cycles);
  d.local_cps.assign(static_cast<std::size_t>(n_csd), p.local_cps);
  d.edge_cps.assign(static_cast<std::size_t>(n_sbs), p.edge_cps);
  d.hrd_weight.assign(static_cast<std::size_t>(n_hrd), p.weight);
  d.csd_weight.assign(static_cast<std::size_t>(n_csd), p.weight);
  d.validate(n_sbs, n_hrd, n_csd);
  return d;
}

}  // namespace mecassoc
