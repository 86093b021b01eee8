// mecassoc: scenario generation, single runs, sweeps, audits and trend checks.
//
// Exit codes: 0 success, 1 usage error, 2 infeasible or diverged, 3 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mecassoc/mecassoc.hpp"

namespace {

using namespace mecassoc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitIo = 3;

// Flag values; only flags the user actually passed override the config.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> a, t1_frac, delta, storage_bytes, file_size_bytes;
  std::optional<int> n_mbs, sbs_per_cell, n_hrd, n_csd, n_files, requests_per_hrd;
  std::optional<int> outer_iterations, game_iterations, patience;
  std::optional<std::string> move_rule, cache_policy;
  bool alt_offload_rule = false;
  bool no_exhaustive = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON experiment config (flags override it)");
    app.add_option("--seed", seed, "Scenario seed");
    app.add_option("--a", a, "Frequency partitioning factor (access share of W)");
    app.add_option("--t1", t1_frac, "Uplink time fraction T1/T");
    app.add_option("--delta", delta, "Zipf exponent");
    app.add_option("--storage", storage_bytes, "SBS storage D_n in bytes");
    app.add_option("--file-size", file_size_bytes, "File size L in bytes");
    app.add_option("--n-mbs", n_mbs, "Number of macrocells");
    app.add_option("--sbs-per-cell", sbs_per_cell, "SBSs per macrocell");
    app.add_option("--n-hrd", n_hrd, "Number of HRDs");
    app.add_option("--n-csd", n_csd, "Number of CSDs");
    app.add_option("--n-files", n_files, "Catalogue size I");
    app.add_option("--requests-per-hrd", requests_per_hrd, "Files requested by each HRD");
    app.add_option("--cache-policy", cache_policy, "popular_first or sampled");
    app.add_option("--T1", outer_iterations, "Outer AMND iterations");
    app.add_option("--T2", game_iterations, "Iteration cap of each coalition game");
    app.add_option("--patience", patience, "Consecutive rejections before the random phase stops");
    app.add_option("--move-rule", move_rule, "Allocation used to value tentative coalitions: closed_form or equal_share");
    app.add_flag("--alt-offload-rule", alt_offload_rule, "Alternative reading of the ABCG offload rule");
    app.add_flag("--no-exhaustive", no_exhaustive, "Skip the exhaustive finishing scan of the games");
  }

  ExperimentConfig resolve(ExperimentConfig c) const {
    if (!config_path.empty()) c = load_config(config_path, std::move(c));
    if (seed) c.params.seed = *seed;
    if (a) c.params.access_fraction = *a;
    if (t1_frac) c.params.uplink_time_fraction = *t1_frac;
    if (delta) c.demand.delta = *delta;
    if (storage_bytes) c.demand.storage_bytes = *storage_bytes;
    if (file_size_bytes) c.demand.file_size_bytes = *file_size_bytes;
    if (n_mbs) c.params.n_mbs = *n_mbs;
    if (sbs_per_cell) c.counts.sbs_per_cell = *sbs_per_cell;
    if (n_hrd) c.counts.n_hrd = *n_hrd;
    if (n_csd) c.counts.n_csd = *n_csd;
    if (n_files) c.demand.n_files = *n_files;
    if (requests_per_hrd) c.demand.requests_per_hrd = *requests_per_hrd;
    if (cache_policy) {
      if (*cache_policy == "popular_first")
        c.demand.cache_policy = CachePolicy::popular_first;
      else if (*cache_policy == "sampled")
        c.demand.cache_policy = CachePolicy::sampled;
      else
        throw std::invalid_argument("unknown cache policy '" + *cache_policy + "'");
    }
    if (outer_iterations) c.game.outer_iterations = *outer_iterations;
    if (game_iterations) c.game.game_iterations = *game_iterations;
    if (patience) c.game.patience = *patience;
    if (move_rule) {
      if (*move_rule == "closed_form")
        c.game.move_rule = AllocRule::closed_form;
      else if (*move_rule == "equal_share")
        c.game.move_rule = AllocRule::equal_share;
      else
        throw std::invalid_argument("unknown move rule '" + *move_rule + "'");
    }
    if (alt_offload_rule) c.game.alt_offload_rule = true;
    if (no_exhaustive) c.game.exhaustive_finish = false;
    return c;
  }
};

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("not a number: '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dash = tok.find('-');
    try {
      if (dash != std::string::npos) {
        const auto lo = std::stoull(tok.substr(0, dash)), hi = std::stoull(tok.substr(dash + 1));
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(std::stoull(tok));
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad seed list entry '" + tok + "'");
    }
  }
  return out;
}

Instance instance_for(const ExperimentConfig& c, const std::string& scenario_path) {
  if (!scenario_path.empty()) {
    ScenarioFile f = load_scenario(scenario_path);
    return make_instance(std::move(f.scenario), std::move(f.demand));
  }
  c.params.validate();
  Scenario s = generate_scenario(c.params, c.counts);
  DemandProfile d = generate_demand(s, c.demand);
  return make_instance(std::move(s), std::move(d));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("write to '" + path + "' failed");
}

void print_report(const Instance& inst, const GameState& s, const DelayReport& r, const char* alg) {
  std::printf("algorithm = %s\n", alg);
  std::printf("F = %s\n", format_double(r.objective, 12).c_str());
  std::printf("hrd_total_s = %s\n", format_double(r.hrd_total_s, 12).c_str());
  std::printf("hrd_backhaul_s = %s\n", format_double(r.hrd_backhaul_s, 12).c_str());
  std::printf("csd_total_s = %s\n", format_double(r.csd_total_s, 12).c_str());
  std::printf("csd_local_s = %s\n", format_double(r.csd_local_s, 12).c_str());
  std::printf("csd_offload_s = %s\n", format_double(r.csd_offload_s, 12).c_str());
  std::printf("n_local_csd = %d\nn_edge_csd = %d\n", r.n_local_csd, r.n_edge_csd);
  std::printf("n_backhauled_files = %d\nn_cached_hits = %d\n", r.n_backhauled_files, r.n_cached_hits);
  std::printf("accepted_moves = %d\n", s.accepted_moves);
  std::printf("fallback_hrds = %zu\n", s.fallback_hrds.size());
  std::printf("hrd_sbs =");
  for (int n : s.partition.hrd_sbs) std::printf(" %d", n);
  std::printf("\ncsd_sbs =");
  for (int n : s.partition.csd_sbs) std::printf(" %s", n == inst.local_index() ? "L" : std::to_string(n).c_str());
  std::printf("\n");
}

int cmd_gen(const Overrides& ov, const std::string& out, const std::string& rates) {
  const ExperimentConfig c = ov.resolve({});
  const Instance inst = instance_for(c, "");
  save_scenario(out, inst.scenario, inst.demand);
  if (!rates.empty()) {
    std::ostringstream os;
    write_rate_table_csv(os, inst.rates);
    write_text(rates, os.str());
  }
  std::printf("wrote %s (%d SBS, %d HRD, %d CSD)\n", out.c_str(), inst.n_sbs(), inst.n_hrd(), inst.n_csd());
  return kExitOk;
}

int cmd_run(const Overrides& ov, const std::string& scenario, const std::string& alg_name, const std::string& trace,
            const std::string& moves) {
  const ExperimentConfig c = ov.resolve({});
  const Algorithm alg = parse_algorithm(alg_name);
  const Instance inst = instance_for(c, scenario);
  GameOptions opt = c.game;
  opt.seed = c.params.seed;
  opt.record_moves = !moves.empty();
  const RunResult r = run_algorithm(inst, alg, opt);
  print_report(inst, r.state, r.report, to_string(alg));
  if (!trace.empty()) {
    std::ostringstream os;
    write_trace_csv(os, r.state.trace);
    write_text(trace, os.str());
  }
  if (!moves.empty()) {
    std::ostringstream os;
    write_move_log_csv(os, r.state.moves);
    write_text(moves, os.str());
  }
  return r.state.all_feasible() ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const Overrides& ov, const std::string& axis, const std::string& grid, const std::string& deltas,
              const std::string& seeds, const std::string& algs, const std::string& out, bool runtime) {
  ExperimentConfig c = ov.resolve({});
  if (!axis.empty()) c.axis = parse_axis(axis);
  if (!grid.empty()) c.grid = parse_doubles(grid);
  if (!deltas.empty()) c.deltas = parse_doubles(deltas);
  if (!seeds.empty()) c.seeds = parse_seeds(seeds);
  if (!algs.empty()) {
    c.algorithms.clear();
    std::stringstream ss(algs);
    std::string tok;
    while (std::getline(ss, tok, ',')) c.algorithms.push_back(parse_algorithm(tok));
  }
  if (!out.empty()) c.output = out;
  if (runtime) c.record_runtime = true;
  const auto rows = run_sweep(c);
  if (c.output.empty() || c.output == "-")
    write_csv(std::cout, rows);
  else
    emit_csv(rows, c.output);
  return kExitOk;
}

int cmd_audit(const Overrides& ov, const std::string& scenario) {
  const ExperimentConfig c = ov.resolve({});
  const Instance inst = instance_for(c, scenario);
  GameOptions opt = c.game;
  opt.seed = c.params.seed;
  int states = 0, violating = 0;
  std::string first;
  StateObserver obs = [&](const GameState& s, const char* stage) {
    ++states;
    const ConstraintAudit a = audit_constraints(inst, s.partition, s.allocation);
    if (!a.ok()) {
      if (first.empty()) first = std::string(stage) + ": " + a.summary();
      ++violating;
    }
  };
  const GameState s = run_amnd(inst, opt, obs);

  // Closed form against the bisection solver, coalition by coalition.
  double max_gap = 0.0;
  int clamped = 0;
  for (const auto& u : s.hrd_coalitions) {
    if (u.members.empty()) continue;
    const CoalitionUtility cf = coalition_utility(inst, MdClass::hrd, u.sbs, u.members);
    const HrdOracleResult o = oracle_solve_p3(cf.hrd_input);
    if (cf.hrd.clamped) ++clamped;
    if (cf.feasible && o.feasible) max_gap = std::max(max_gap, (cf.value - o.objective) / o.objective);
  }
  for (const auto& u : s.csd_coalitions) {
    if (u.members.empty() || u.local) continue;
    const CoalitionUtility cf = coalition_utility(inst, MdClass::csd, u.sbs, u.members);
    const CsdOracleResult o = oracle_solve_p3(cf.csd_input);
    max_gap = std::max(max_gap, (cf.value - o.objective) / o.objective);
  }
  const StabilityAudit st = audit_nash_stability(inst, s, opt.move_rule);
  const DelayReport r = objective(inst, s.partition, s.allocation);
  std::printf("F = %s\n", format_double(r.objective, 12).c_str());
  std::printf("states audited: %d, with violations: %d\n", states, violating);
  if (!first.empty()) std::printf("first violation at %s", first.c_str());
  std::printf("closed form vs oracle: max relative objective gap %s, clamped HRD coalitions %d\n",
              format_double(max_gap, 3).c_str(), clamped);
  std::printf("moves scanned: %d transfers, %d swaps; improving: %zu\n", st.transfers_checked, st.swaps_checked,
              st.improving.size());
  std::printf("nash-stable: %s\n", st.stable() ? "yes" : "no");
  return violating == 0 && st.stable() ? kExitOk : kExitInfeasible;
}

int cmd_trend(const Overrides& ov, const std::string& input, const std::string& metric_name,
              const std::string& shape, const std::string& alg) {
  if (!input.empty()) {
    if (metric_name.empty() || shape.empty()) throw std::invalid_argument("--metric and --shape are required with --input");
    TrendSpec spec{metric_name, TrendShape::u_shape, alg};
    if (shape == "u")
      spec.shape = TrendShape::u_shape;
    else if (shape == "down")
      spec.shape = TrendShape::nonincreasing;
    else if (shape == "up")
      spec.shape = TrendShape::nondecreasing;
    else
      throw std::invalid_argument("unknown shape '" + shape + "' (expected u, down or up)");
    const TrendResult t = trend_check(read_csv(input), spec);
    std::printf("%s %s %s: %s\n  %s\n", t.pass ? "PASS" : "FAIL", spec.metric.c_str(), to_string(spec.shape),
                t.detail.c_str(), format_series(t).c_str());
    return kExitOk;
  }
  const ExperimentConfig c = ov.resolve(trend_config());
  const TrendSuite s = run_trend_suite(c);
  for (const TrendCriterion& cr : s.criteria) {
    std::printf("%s %s\n", cr.pass() ? "PASS" : "FAIL", cr.label.c_str());
    for (const TrendResult& t : cr.trends)
      std::printf("    %s: %s | %s\n", t.spec.metric.c_str(), t.detail.c_str(), format_series(t).c_str());
  }
  std::printf("%d of %zu trends reproduced\n", s.passed(), s.criteria.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint MD association and resource allocation for small-cell edge networks"};
  app.require_subcommand(1);
  Overrides ov;

  std::string out, rates, scenario, alg = "AMND", trace, moves;
  std::string axis, grid, deltas, seeds, algs, input, metric_name, shape;
  bool runtime = false;

  auto* gen = app.add_subcommand("gen", "Generate a scenario file");
  ov.attach(*gen);
  gen->add_option("-o,--output", out, "Scenario file to write")->required();
  gen->add_option("--rates", rates, "Also write the rate table as CSV");

  auto* run = app.add_subcommand("run", "Run one algorithm and print its delay report");
  ov.attach(*run);
  run->add_option("--scenario", scenario, "Scenario file (otherwise generated from the seed)");
  run->add_option("--algorithm", alg, "ABCG or AMND");
  run->add_option("--trace", trace, "Write the objective trace as CSV");
  run->add_option("--moves", moves, "Write the move log as CSV");

  auto* sweep = app.add_subcommand("sweep", "Parameter sweep to CSV");
  ov.attach(*sweep);
  sweep->add_option("--axis", axis, "a, t1_frac or delta");
  sweep->add_option("--grid", grid, "Comma-separated axis values");
  sweep->add_option("--deltas", deltas, "Comma-separated delta overlay");
  sweep->add_option("--seeds", seeds, "Seeds, e.g. 1-20 or 1,4,9");
  sweep->add_option("--algorithms", algs, "Comma-separated subset of ABCG,AMND");
  sweep->add_option("-o,--output", out, "CSV path ('-' for stdout)");
  sweep->add_flag("--record-runtime", runtime, "Fill runtime_ms (makes the CSV non-deterministic)");

  auto* audit = app.add_subcommand("audit", "Oracle, constraint and Nash-stability checks on one run");
  ov.attach(*audit);
  audit->add_option("--scenario", scenario, "Scenario file (otherwise generated from the seed)");

  auto* trend = app.add_subcommand("trend", "Shape tests on sweep output, or the full trend suite");
  ov.attach(*trend);
  trend->add_option("--input", input, "Sweep CSV to test");
  trend->add_option("--metric", metric_name, "Column to test");
  trend->add_option("--shape", shape, "u, down or up");
  trend->add_option("--algorithm", alg, "Rows to use (ABCG or AMND)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(ov, out, rates);
    if (*run) return cmd_run(ov, scenario, alg, trace, moves);
    if (*sweep) return cmd_sweep(ov, axis, grid, deltas, seeds, algs, out, runtime);
    if (*audit) return cmd_audit(ov, scenario);
    if (*trend) return cmd_trend(ov, input, metric_name, shape, alg);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  }
  return kExitUsage;
}
