#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mecassoc/mecassoc.hpp"
#include "support/oracles.hpp"

using namespace mecassoc;

namespace {

std::pair<Scenario, DemandProfile> sample(std::uint64_t seed = 3) {
  SystemParams p;
  p.seed = seed;
  p.access_fraction = 0.37;
  Scenario s = generate_scenario(p, Counts{});
  DemandParams d;
  d.storage_bytes = 27.5e6;
  d.delta = 0.8;
  DemandProfile dem = generate_demand(s, d);
  return {std::move(s), std::move(dem)};
}

std::string serialise(const Scenario& s, const DemandProfile& d) {
  std::ostringstream os;
  write_scenario(os, s, d);
  return os.str();
}

}  // namespace

TEST(ScenarioFile, RoundTripIsBitIdentical) {
  const auto [s, d] = sample();
  std::istringstream is(serialise(s, d));
  const ScenarioFile back = read_scenario(is);
  EXPECT_EQ(back.scenario, s);
  EXPECT_EQ(back.demand, d);
  EXPECT_EQ(serialise(back.scenario, back.demand), serialise(s, d));
}

TEST(ScenarioFile, RoundTripThroughDisk) {
  const auto [s, d] = sample(11);
  const auto path = (std::filesystem::temp_directory_path() / "mecassoc_io_roundtrip.txt").string();
  save_scenario(path, s, d);
  const ScenarioFile back = load_scenario(path);
  EXPECT_EQ(back.scenario, s);
  EXPECT_EQ(back.demand, d);
  std::filesystem::remove(path);
}

TEST(ScenarioFile, ReloadedInstanceGivesTheSameObjective) {
  const auto [s, d] = sample(5);
  std::istringstream is(serialise(s, d));
  ScenarioFile back = read_scenario(is);
  const Instance a = make_instance(s, d);
  const Instance b = make_instance(std::move(back.scenario), std::move(back.demand));
  GameOptions o;
  o.outer_iterations = 1;
  o.game_iterations = 2000;
  EXPECT_EQ(run_amnd(a, o).trace, run_amnd(b, o).trace);
}

TEST(ScenarioFile, MissingFileIsAnIoError) {
  EXPECT_THROW(load_scenario("/nonexistent/dir/scenario.txt"), IoError);
}

TEST(ScenarioFile, WrongHeaderIsRejected) {
  std::istringstream is("not-a-scenario 1\nend\n");
  EXPECT_THROW(read_scenario(is), IoError);
}

TEST(ScenarioFile, TruncatedFileIsRejected) {
  const auto [s, d] = sample();
  const std::string text = serialise(s, d);
  std::istringstream is(text.substr(0, text.size() / 2));
  EXPECT_THROW(read_scenario(is), IoError);
}

TEST(ScenarioFile, MissingKeyIsRejected) {
  const auto [s, d] = sample();
  std::string text = serialise(s, d);
  const auto pos = text.find("params.isd_m");
  ASSERT_NE(pos, std::string::npos);
  text.erase(pos, text.find('\n', pos) - pos + 1);
  std::istringstream is(text);
  EXPECT_THROW(read_scenario(is), IoError);
}

TEST(ScenarioFile, InvalidDemandIsRejected) {
  auto [s, d] = sample();
  d.storage_bytes[0] = 1.0;
  std::istringstream is(serialise(s, d));
  EXPECT_THROW(read_scenario(is), IoError);
}

TEST(Csv, RoundTripToTwelveDigits) {
  ExperimentConfig c;
  c.grid = {0.3, 0.5};
  c.deltas = {1.0};
  c.game.outer_iterations = 1;
  c.game.game_iterations = 500;
  const auto rows = run_sweep(c);
  std::stringstream ss;
  write_csv(ss, rows);
  const auto back = read_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    EXPECT_EQ(back[j].key(), rows[j].key());
    EXPECT_NEAR(back[j].F, rows[j].F, 1e-11 * rows[j].F);
    EXPECT_NEAR(back[j].csd_local_s, rows[j].csd_local_s, 1e-11 * std::max(1.0, rows[j].csd_local_s));
    EXPECT_EQ(back[j].n_edge_csd, rows[j].n_edge_csd);
    EXPECT_EQ(back[j].accepted_moves, rows[j].accepted_moves);
  }
}

TEST(Csv, BadHeaderAndWidthAreRejected) {
  std::istringstream bad_header("a,b,c\n");
  EXPECT_THROW(read_csv(bad_header), IoError);
  std::ostringstream os;
  for (std::size_t j = 0; j < csv_columns().size(); ++j) os << (j ? "," : "") << csv_columns()[j];
  os << "\na,0.5,1\n";
  std::istringstream narrow(os.str());
  EXPECT_THROW(read_csv(narrow), IoError);
}

TEST(ConfigJson, RoundTrip) {
  ExperimentConfig c = trend_config();
  c.axis = SweepAxis::t1_frac;
  c.grid = {0.2, 0.4};
  c.game.patience = 17;
  c.game.alt_offload_rule = true;
  c.demand.cache_policy = CachePolicy::sampled;
  c.output = "out.csv";
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.seeds, c.seeds);
  EXPECT_EQ(back.demand, c.demand);
  EXPECT_EQ(back.game.patience, 17);
}

TEST(ConfigJson, PartialFileOverridesBase) {
  const nlohmann::json j = nlohmann::json::parse(R"({"format": "mecassoc-experiment", "version": 1,
                                                      "params": {"access_fraction": 0.3}})");
  const ExperimentConfig c = config_from_json(j);
  EXPECT_EQ(c.params.access_fraction, 0.3);
  EXPECT_EQ(c.params.uplink_time_fraction, 0.5);
  EXPECT_EQ(c.counts.n_hrd, 20);
}

TEST(ConfigJson, UnknownKeysAndBadVersionsAreRejected) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"format": "mecassoc-experiment", "version": 99})")),
               std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"format": "mecassoc-experiment", "version": 1, "bogus": 1})")),
               std::invalid_argument);
}

TEST(ConfigJson, DiskRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "mecassoc_cfg.json").string();
  ExperimentConfig c;
  c.seeds = {4, 5, 6};
  save_config(path, c);
  EXPECT_EQ(load_config(path).seeds, c.seeds);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), IoError);
}

TEST(AuxCsv, RateTableHasOneRowPerLink) {
  const Instance inst = oracle::default_instance(1);
  std::ostringstream os;
  write_rate_table_csv(os, inst.rates);
  const std::string text = os.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  EXPECT_EQ(lines, 1 + inst.n_sbs() * (1 + inst.n_hrd() + inst.n_csd()));
}

TEST(AuxCsv, MoveLogAndTrace) {
  const Instance inst = oracle::default_instance(2, 27.5e6);
  GameOptions o;
  o.outer_iterations = 1;
  o.game_iterations = 300;
  o.record_moves = true;
  const GameState s = run_amnd(inst, o);
  std::ostringstream moves, trace;
  write_move_log_csv(moves, s.moves);
  write_trace_csv(trace, s.trace);
  const std::string m = moves.str(), t = trace.str();
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), static_cast<long>(s.moves.size()) + 1);
  EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), static_cast<long>(s.trace.size()) + 1);
  EXPECT_EQ(m.rfind("iteration,class,kind", 0), 0u);
}
