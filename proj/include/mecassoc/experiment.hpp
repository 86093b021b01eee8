#pragma once

// Seeded parameter sweeps, CSV emission and qualitative trend checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "mecassoc/association.hpp"
#include "mecassoc/common.hpp"
#include "mecassoc/content.hpp"
#include "mecassoc/delaymodel.hpp"
#include "mecassoc/scenario.hpp"

namespace mecassoc {

enum class SweepAxis { a, t1_frac, delta };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::a: return "a";
    case SweepAxis::t1_frac: return "t1_frac";
    case SweepAxis::delta: return "delta";
  }
  return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "a") return SweepAxis::a;
  if (s == "t1_frac") return SweepAxis::t1_frac;
  if (s == "delta") return SweepAxis::delta;
  throw std::invalid_argument("unknown sweep axis '" + s + "' (expected a, t1_frac or delta)");
}

enum class Algorithm { abcg, amnd };

inline const char* to_string(Algorithm a) { return a == Algorithm::abcg ? "ABCG" : "AMND"; }

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "ABCG" || s == "abcg") return Algorithm::abcg;
  if (s == "AMND" || s == "amnd") return Algorithm::amnd;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected ABCG or AMND)");
}

struct ExperimentConfig {
  SystemParams params;
  Counts counts;
  DemandParams demand;
  GameOptions game;
  SweepAxis axis = SweepAxis::a;
  std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> deltas = {0.6, 1.0, 1.4};
  std::vector<std::uint64_t> seeds = {1};
  std::vector<Algorithm> algorithms = {Algorithm::abcg, Algorithm::amnd};
  bool record_runtime = false;
  std::string output;

  void validate() const {
    params.validate();
    if (seeds.empty()) throw std::invalid_argument("config: at least one seed is required");
    if (grid.empty()) throw std::invalid_argument("config: sweep grid is empty");
    if (algorithms.empty()) throw std::invalid_argument("config: no algorithm selected");
    for (double v : grid) {
      const bool ok = axis == SweepAxis::delta ? (v >= 0.0 && std::isfinite(v)) : (v > 0.0 && v < 1.0);
      if (!ok) throw std::invalid_argument("config: grid value " + format_double(v, 12) + " outside the axis range");
    }
    if (axis != SweepAxis::delta) {
      if (deltas.empty()) throw std::invalid_argument("config: at least one delta is required");
      for (double d : deltas)
        if (!(d >= 0.0)) throw std::invalid_argument("config: delta must be non-negative");
    }
  }
};

/// Storage-limited variant used for the trend experiments: each SBS holds
/// five files plus room for every CSD's task input, so backhaul carries the
/// rest of the catalogue.
inline ExperimentConfig trend_config() {
  ExperimentConfig c;
  c.demand.storage_bytes = 5 * c.demand.file_size_bytes + c.counts.n_csd * c.demand.task_input_bytes * 1.25;
  c.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) c.seeds.push_back(s);
  c.algorithms = {Algorithm::amnd};
  return c;
}

// ---------------------------------------------------------------------------
// JSON config file.

inline constexpr const char* kConfigFormat = "mecassoc-experiment";
inline constexpr int kConfigVersion = 1;

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["format"] = kConfigFormat;
  j["version"] = kConfigVersion;
  const SystemParams& p = c.params;
  j["params"] = {{"bandwidth_hz", p.bandwidth_hz},       {"access_fraction", p.access_fraction},
                 {"uplink_time_fraction", p.uplink_time_fraction},
                 {"n_mbs", p.n_mbs},                     {"isd_m", p.isd_m},
                 {"p_mbs_dbm", p.p_mbs_dbm},             {"p_sbs_dbm", p.p_sbs_dbm},
                 {"p_md_dbm", p.p_md_dbm},               {"noise_psd_dbm_hz", p.noise_psd_dbm_hz}};
  j["counts"] = {{"sbs_per_cell", c.counts.sbs_per_cell}, {"n_hrd", c.counts.n_hrd}, {"n_csd", c.counts.n_csd}};
  const DemandParams& d = c.demand;
  j["demand"] = {{"n_files", d.n_files},
                 {"file_size_bytes", d.file_size_bytes},
                 {"delta", d.delta},
                 {"requests_per_hrd", d.requests_per_hrd},
                 {"cache_policy", to_string(d.cache_policy)},
                 {"storage_bytes", d.storage_bytes},
                 {"task_input_bytes", d.task_input_bytes},
                 {"task_cycles", d.task_cycles},
                 {"local_cps", d.local_cps},
                 {"edge_cps", d.edge_cps},
                 {"weight", d.weight}};
  const GameOptions& g = c.game;
  j["game"] = {{"outer_iterations", g.outer_iterations}, {"game_iterations", g.game_iterations},
               {"patience", g.patience},                 {"exhaustive_finish", g.exhaustive_finish},
               {"move_rule", to_string(g.move_rule)},    {"alt_offload_rule", g.alt_offload_rule}};
  j["axis"] = to_string(c.axis);
  j["grid"] = c.grid;
  j["deltas"] = c.deltas;
  j["seeds"] = c.seeds;
  std::vector<std::string> algs;
  for (Algorithm a : c.algorithms) algs.emplace_back(to_string(a));
  j["algorithms"] = algs;
  j["record_runtime"] = c.record_runtime;
  j["output"] = c.output;
  return j;
}

namespace detail {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline void check_keys(const nlohmann::json& obj, const char* where, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw std::invalid_argument(std::string("config: '") + where + "' must be an object");
  for (const auto& item : obj.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }))
      throw std::invalid_argument(std::string("config: unknown key '") + item.key() + "' in " + where);
}

}  // namespace detail

/// Fields missing from `j` keep the values already in `base`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  using detail::read_field;
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  if (j.value("format", std::string()) != kConfigFormat)
    throw std::invalid_argument(std::string("config: 'format' must be \"") + kConfigFormat + "\"");
  if (j.value("version", 0) != kConfigVersion) throw std::invalid_argument("config: unsupported version");
  ExperimentConfig c = std::move(base);
  using detail::check_keys;
  check_keys(j, "top level",
             {"format", "version", "params", "counts", "demand", "game", "axis", "grid", "deltas", "seeds",
              "algorithms", "record_runtime", "output"});
  try {
    if (j.contains("params")) {
      const auto& p = j.at("params");
      check_keys(p, "params",
                 {"bandwidth_hz", "access_fraction", "uplink_time_fraction", "n_mbs", "isd_m", "p_mbs_dbm",
                  "p_sbs_dbm", "p_md_dbm", "noise_psd_dbm_hz"});
      read_field(p, "bandwidth_hz", c.params.bandwidth_hz);
      read_field(p, "access_fraction", c.params.access_fraction);
      read_field(p, "uplink_time_fraction", c.params.uplink_time_fraction);
      read_field(p, "n_mbs", c.params.n_mbs);
      read_field(p, "isd_m", c.params.isd_m);
      read_field(p, "p_mbs_dbm", c.params.p_mbs_dbm);
      read_field(p, "p_sbs_dbm", c.params.p_sbs_dbm);
      read_field(p, "p_md_dbm", c.params.p_md_dbm);
      read_field(p, "noise_psd_dbm_hz", c.params.noise_psd_dbm_hz);
    }
    if (j.contains("counts")) {
      const auto& n = j.at("counts");
      check_keys(n, "counts", {"sbs_per_cell", "n_hrd", "n_csd"});
      read_field(n, "sbs_per_cell", c.counts.sbs_per_cell);
      read_field(n, "n_hrd", c.counts.n_hrd);
      read_field(n, "n_csd", c.counts.n_csd);
    }
    if (j.contains("demand")) {
      const auto& d = j.at("demand");
      check_keys(d, "demand",
                 {"n_files", "file_size_bytes", "delta", "requests_per_hrd", "cache_policy", "storage_bytes",
                  "task_input_bytes", "task_cycles", "local_cps", "edge_cps", "weight"});
      read_field(d, "n_files", c.demand.n_files);
      read_field(d, "file_size_bytes", c.demand.file_size_bytes);
      read_field(d, "delta", c.demand.delta);
      read_field(d, "requests_per_hrd", c.demand.requests_per_hrd);
      if (d.contains("cache_policy")) {
        const auto s = d.at("cache_policy").get<std::string>();
        if (s == "popular_first")
          c.demand.cache_policy = CachePolicy::popular_first;
        else if (s == "sampled")
          c.demand.cache_policy = CachePolicy::sampled;
        else
          throw std::invalid_argument("config: unknown cache_policy '" + s + "'");
      }
      read_field(d, "storage_bytes", c.demand.storage_bytes);
      read_field(d, "task_input_bytes", c.demand.task_input_bytes);
      read_field(d, "task_cycles", c.demand.task_cycles);
      read_field(d, "local_cps", c.demand.local_cps);
      read_field(d, "edge_cps", c.demand.edge_cps);
      read_field(d, "weight", c.demand.weight);
    }
    if (j.contains("game")) {
      const auto& g = j.at("game");
      check_keys(g, "game",
                 {"outer_iterations", "game_iterations", "patience", "exhaustive_finish", "move_rule",
                  "alt_offload_rule"});
      read_field(g, "outer_iterations", c.game.outer_iterations);
      read_field(g, "game_iterations", c.game.game_iterations);
      read_field(g, "patience", c.game.patience);
      read_field(g, "exhaustive_finish", c.game.exhaustive_finish);
      read_field(g, "alt_offload_rule", c.game.alt_offload_rule);
      if (g.contains("move_rule")) {
        const auto s = g.at("move_rule").get<std::string>();
        if (s == "closed_form")
          c.game.move_rule = AllocRule::closed_form;
        else if (s == "equal_share")
          c.game.move_rule = AllocRule::equal_share;
        else
          throw std::invalid_argument("config: unknown move_rule '" + s + "'");
      }
    }
    if (j.contains("axis")) c.axis = parse_axis(j.at("axis").get<std::string>());
    read_field(j, "grid", c.grid);
    read_field(j, "deltas", c.deltas);
    read_field(j, "seeds", c.seeds);
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    read_field(j, "record_runtime", c.record_runtime);
    read_field(j, "output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

inline void save_config(const std::string& path, const ExperimentConfig& c) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << to_json(c).dump(2) << '\n';
  if (!os) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepRow {
  std::string axis;
  double axis_value = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string algorithm;
  double F = 0.0;
  double hrd_total_s = 0.0;
  double hrd_backhaul_s = 0.0;
  double csd_total_s = 0.0;
  double csd_local_s = 0.0;
  double csd_offload_s = 0.0;
  int n_local_csd = 0;
  int n_edge_csd = 0;
  int n_backhauled_files = 0;
  int accepted_moves = 0;
  double runtime_ms = 0.0;
  int n_cached_hits = 0;  // not part of the CSV

  auto key() const { return std::tie(axis, axis_value, delta, seed, algorithm); }
};

inline double metric(const SweepRow& r, const std::string& name) {
  static const std::map<std::string, double SweepRow::*> fields = {
      {"F", &SweepRow::F},
      {"hrd_total_s", &SweepRow::hrd_total_s},
      {"hrd_backhaul_s", &SweepRow::hrd_backhaul_s},
      {"csd_total_s", &SweepRow::csd_total_s},
      {"csd_local_s", &SweepRow::csd_local_s},
      {"csd_offload_s", &SweepRow::csd_offload_s},
      {"runtime_ms", &SweepRow::runtime_ms}};
  auto it = fields.find(name);
  if (it != fields.end()) return r.*(it->second);
  if (name == "n_local_csd") return r.n_local_csd;
  if (name == "n_edge_csd") return r.n_edge_csd;
  if (name == "n_backhauled_files") return r.n_backhauled_files;
  if (name == "accepted_moves") return r.accepted_moves;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

/// Evaluates one algorithm on one instance.
struct RunResult {
  GameState state;
  DelayReport report;
};

inline RunResult run_algorithm(const Instance& inst, Algorithm alg, const GameOptions& opt,
                               const StateObserver& observer = {}) {
  RunResult r;
  r.state = alg == Algorithm::abcg ? abcg_init(inst, opt, observer) : run_amnd(inst, opt, observer);
  r.report = objective(inst, r.state.partition, r.state.allocation);
  return r;
}

inline Instance build_instance(const Scenario& base, const DemandParams& dp, double a, double t1, double delta) {
  Scenario s = with_split(base, a, t1);
  DemandParams d = dp;
  d.delta = delta;
  DemandProfile demand = generate_demand(s, d);
  return make_instance(std::move(s), std::move(demand));
}

inline SweepRow make_row(const ExperimentConfig& c, double axis_value, double delta, std::uint64_t seed,
                         Algorithm alg, const RunResult& r, double runtime_ms) {
  SweepRow row;
  row.axis = to_string(c.axis);
  row.axis_value = axis_value;
  row.delta = delta;
  row.seed = seed;
  row.algorithm = to_string(alg);
  const DelayReport& d = r.report;
  row.F = d.objective;
  row.hrd_total_s = d.hrd_total_s;
  row.hrd_backhaul_s = d.hrd_backhaul_s;
  row.csd_total_s = d.csd_total_s;
  row.csd_local_s = d.csd_local_s;
  row.csd_offload_s = d.csd_offload_s;
  row.n_local_csd = d.n_local_csd;
  row.n_edge_csd = d.n_edge_csd;
  row.n_backhauled_files = d.n_backhauled_files;
  row.n_cached_hits = d.n_cached_hits;
  row.accepted_moves = r.state.accepted_moves;
  row.runtime_ms = runtime_ms;
  return row;
}

/// Observer for sweeps: also receives the instance the state belongs to.
using SweepObserver = std::function<void(const Instance&, const GameState&, const char* stage)>;

/// One row per (grid point, delta, seed, algorithm). Deployment and channels
/// are drawn once per seed; each point gets its own game seed.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& c, const SweepObserver& observer = {}) {
  c.validate();
  std::vector<SweepRow> rows;
  const std::vector<double> overlay = c.axis == SweepAxis::delta ? std::vector<double>{0.0} : c.deltas;
  for (std::uint64_t seed : c.seeds) {
    SystemParams p = c.params;
    p.seed = seed;
    const Scenario base = generate_scenario(p, c.counts);
    for (std::size_t gi = 0; gi < c.grid.size(); ++gi) {
      for (std::size_t di = 0; di < overlay.size(); ++di) {
        const double x = c.grid[gi];
        double a = p.access_fraction, t1 = p.uplink_time_fraction, delta = overlay[di];
        if (c.axis == SweepAxis::a) a = x;
        if (c.axis == SweepAxis::t1_frac) t1 = x;
        if (c.axis == SweepAxis::delta) delta = x;
        const Instance inst = build_instance(base, c.demand, a, t1, delta);
        GameOptions opt = c.game;
        opt.seed = derive_seed(seed, 0x1000 + gi * 64 + di);
        for (Algorithm alg : c.algorithms) {
          const auto t0 = std::chrono::steady_clock::now();
          StateObserver obs;
          if (observer) obs = [&](const GameState& st, const char* stage) { observer(inst, st, stage); };
          RunResult r = run_algorithm(inst, alg, opt, obs);
          const double ms =
              c.record_runtime
                  ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()
                  : 0.0;
          rows.push_back(make_row(c, x, delta, seed, alg, r, ms));
        }
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& l, const SweepRow& r) { return l.key() < r.key(); });
  return rows;
}

// ---------------------------------------------------------------------------
// CSV.

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "axis",        "axis_value",    "delta",       "seed",       "algorithm",          "F",
      "hrd_total_s", "hrd_backhaul_s", "csd_total_s", "csd_local_s", "csd_offload_s",      "n_local_csd",
      "n_edge_csd",  "n_backhauled_files", "accepted_moves", "runtime_ms"};
  return cols;
}

inline void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("write_csv: no rows to emit");
  const auto& cols = csv_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) os << (j ? "," : "") << cols[j];
  os << '\n';
  auto f = [](double v) { return format_double(v, 12); };
  for (const SweepRow& r : rows)
    os << r.axis << ',' << f(r.axis_value) << ',' << f(r.delta) << ',' << r.seed << ',' << r.algorithm << ','
       << f(r.F) << ',' << f(r.hrd_total_s) << ',' << f(r.hrd_backhaul_s) << ',' << f(r.csd_total_s) << ','
       << f(r.csd_local_s) << ',' << f(r.csd_offload_s) << ',' << r.n_local_csd << ',' << r.n_edge_csd << ','
       << r.n_backhauled_files << ',' << r.accepted_moves << ',' << f(r.runtime_ms) << '\n';
}

inline void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows to emit");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_csv(os, rows);
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline std::vector<SweepRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header != csv_columns()) throw IoError("csv: unexpected header");
  std::vector<SweepRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> c;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    if (c.size() != header.size()) throw IoError("csv: line " + std::to_string(line_no) + " has the wrong width");
    try {
      SweepRow r;
      r.axis = c[0];
      r.axis_value = std::stod(c[1]);
      r.delta = std::stod(c[2]);
      r.seed = std::stoull(c[3]);
      r.algorithm = c[4];
      r.F = std::stod(c[5]);
      r.hrd_total_s = std::stod(c[6]);
      r.hrd_backhaul_s = std::stod(c[7]);
      r.csd_total_s = std::stod(c[8]);
      r.csd_local_s = std::stod(c[9]);
      r.csd_offload_s = std::stod(c[10]);
      r.n_local_csd = std::stoi(c[11]);
      r.n_edge_csd = std::stoi(c[12]);
      r.n_backhauled_files = std::stoi(c[13]);
      r.accepted_moves = std::stoi(c[14]);
      r.runtime_ms = std::stod(c[15]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw IoError("csv: line " + std::to_string(line_no) + " holds a malformed value");
    }
  }
  return rows;
}

inline std::vector<SweepRow> read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(is);
}

// ---------------------------------------------------------------------------
// Trend checks.

enum class TrendShape { u_shape, nonincreasing, nondecreasing };

inline const char* to_string(TrendShape s) {
  switch (s) {
    case TrendShape::u_shape: return "U-shape";
    case TrendShape::nonincreasing: return "nonincreasing";
    case TrendShape::nondecreasing: return "nondecreasing";
  }
  return "?";
}

struct TrendSpec {
  std::string metric;
  TrendShape shape = TrendShape::u_shape;
  std::string algorithm = "AMND";
};

struct TrendResult {
  TrendSpec spec;
  std::vector<double> x;
  std::vector<double> mean;  // metric averaged over seeds and deltas per grid point
  double statistic = 0.0;    // Spearman rho, or (min interior - max endpoint) for U-shapes
  bool pass = false;
  std::string detail;
};

/// Ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = r;
    i = j + 1;
  }
  return rank;
}

/// Pearson correlation of the average ranks; NaN when either side is constant.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    mx += rx[j];
    my += ry[j];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxy += (rx[j] - mx) * (ry[j] - my);
    sxx += (rx[j] - mx) * (rx[j] - mx);
    syy += (ry[j] - my) * (ry[j] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline TrendResult trend_check(const std::vector<SweepRow>& rows, const TrendSpec& spec) {
  TrendResult out;
  out.spec = spec;
  std::map<double, std::pair<double, int>> acc;
  for (const SweepRow& r : rows) {
    if (r.algorithm != spec.algorithm) continue;
    auto& a = acc[r.axis_value];
    a.first += metric(r, spec.metric);
    a.second += 1;
  }
  for (const auto& [x, a] : acc) {
    out.x.push_back(x);
    out.mean.push_back(a.first / a.second);
  }
  std::ostringstream os;
  if (out.x.size() < 5) {
    os << "need at least 5 grid points, got " << out.x.size();
    out.detail = os.str();
    return out;
  }
  if (spec.shape == TrendShape::u_shape) {
    const auto interior = std::min_element(out.mean.begin() + 1, out.mean.end() - 1);
    const double ends = std::min(out.mean.front(), out.mean.back());
    out.statistic = *interior - ends;
    out.pass = *interior < ends;
    os << "interior min " << format_double(*interior, 6) << " at x=" << out.x[static_cast<std::size_t>(interior - out.mean.begin())]
       << ", endpoints " << format_double(out.mean.front(), 6) << " / " << format_double(out.mean.back(), 6);
  } else {
    out.statistic = spearman(out.x, out.mean);
    out.pass = spec.shape == TrendShape::nondecreasing ? out.statistic >= 0.8 : out.statistic <= -0.8;
    os << "spearman rho " << format_double(out.statistic, 4);
  }
  out.detail = os.str();
  return out;
}

inline std::string format_series(const TrendResult& t) {
  std::ostringstream os;
  for (std::size_t j = 0; j < t.x.size(); ++j)
    os << (j ? " " : "") << format_double(t.x[j], 3) << ':' << format_double(t.mean[j], 6);
  return os.str();
}

/// One qualitative delay trend check; it passes when every
/// listed trend passes.
struct TrendCriterion {
  std::string label;
  std::vector<TrendResult> trends;

  bool pass() const {
    return !trends.empty() && std::all_of(trends.begin(), trends.end(), [](const TrendResult& t) { return t.pass; });
  }
};

struct TrendSuite {
  std::vector<SweepRow> a_rows;
  std::vector<SweepRow> t1_rows;
  std::vector<SweepRow> delta_rows;
  std::vector<TrendCriterion> criteria;

  int passed() const {
    return static_cast<int>(std::count_if(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass(); }));
  }
};

/// The eight delay trends against a, T1/T and delta. `base` supplies
/// everything except the axis and grid.
inline TrendSuite run_trend_suite(const ExperimentConfig& base, const SweepObserver& observer = {}) {
  TrendSuite s;
  ExperimentConfig c = base;
  c.axis = SweepAxis::a;
  c.grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  s.a_rows = run_sweep(c, observer);
  c.axis = SweepAxis::t1_frac;
  s.t1_rows = run_sweep(c, observer);
  c.axis = SweepAxis::delta;
  c.grid = {0.6, 0.8, 1.0, 1.2, 1.4};
  s.delta_rows = run_sweep(c, observer);

  const std::string alg = "AMND";
  auto check = [&](const std::vector<SweepRow>& rows, const char* m, TrendShape sh) {
    return trend_check(rows, {m, sh, alg});
  };
  using enum TrendShape;
  s.criteria = {
      {"(a) HRD total time vs a: U-shape", {check(s.a_rows, "hrd_total_s", u_shape)}},
      {"(b) HRD backhaul time vs a: U-shape", {check(s.a_rows, "hrd_backhaul_s", u_shape)}},
      {"(c) CSD local time vs a: nonincreasing", {check(s.a_rows, "csd_local_s", nonincreasing)}},
      {"(d) CSD offload time vs a: nondecreasing", {check(s.a_rows, "csd_offload_s", nondecreasing)}},
      {"(e) CSD total time vs a: nonincreasing", {check(s.a_rows, "csd_total_s", nonincreasing)}},
      {"(f) HRD backhaul and total time vs T1/T: nondecreasing",
       {check(s.t1_rows, "hrd_backhaul_s", nondecreasing), check(s.t1_rows, "hrd_total_s", nondecreasing)}},
      {"(g) CSD local/offload/total time vs T1/T: down/up/down",
       {check(s.t1_rows, "csd_local_s", nonincreasing), check(s.t1_rows, "csd_offload_s", nondecreasing),
        check(s.t1_rows, "csd_total_s", nonincreasing)}},
      {"(h) HRD total time vs delta: nonincreasing", {check(s.delta_rows, "hrd_total_s", nonincreasing)}},
  };
  return s;
}

}  // namespace mecassoc
