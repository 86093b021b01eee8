#pragma once

// Text serialisation of scenarios (with their demand block), the rate table,
// and the game move log / objective trace.
//
// Scenario file layout:
//
//   mecassoc-scenario 1
//   <key> <value>                       scalar lines
//   array <name> <rows> <cols>          followed by rows*cols values, row-major
//   end
//
// Floating values are written with 17 significant digits so a read-back is
// bit-identical.

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mecassoc/association.hpp"
#include "mecassoc/common.hpp"
#include "mecassoc/content.hpp"
#include "mecassoc/radio.hpp"
#include "mecassoc/scenario.hpp"

namespace mecassoc {

inline constexpr const char* kScenarioMagic = "mecassoc-scenario";
inline constexpr int kScenarioVersion = 1;

namespace detail {

struct ArrayBlock {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

class ScenarioWriter {
 public:
  explicit ScenarioWriter(std::ostream& os) : os_(os) {}

  void scalar(const std::string& key, double v) { os_ << key << ' ' << format_double(v, 17) << '\n'; }
  void scalar(const std::string& key, const std::string& v) { os_ << key << ' ' << v << '\n'; }

  template <typename Getter>
  void array(const std::string& name, std::size_t rows, std::size_t cols, Getter get) {
    os_ << "array " << name << ' ' << rows << ' ' << cols << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) os_ << (c ? " " : "") << format_double(get(r, c), 17);
      os_ << '\n';
    }
  }

  void vector(const std::string& name, const std::vector<double>& v) {
    array(name, v.size(), 1, [&](std::size_t r, std::size_t) { return v[r]; });
  }

  void ivector(const std::string& name, const std::vector<int>& v) {
    array(name, v.size(), 1, [&](std::size_t r, std::size_t) { return static_cast<double>(v[r]); });
  }

  template <typename T>
  void matrix(const std::string& name, const Matrix<T>& m) {
    array(name, m.rows(), m.cols(), [&](std::size_t r, std::size_t c) { return static_cast<double>(m(r, c)); });
  }

  void points(const std::string& name, const std::vector<Point>& pts) {
    array(name, pts.size(), 2, [&](std::size_t r, std::size_t c) { return c == 0 ? pts[r].x : pts[r].y; });
  }

 private:
  std::ostream& os_;
};

struct ParsedFile {
  std::map<std::string, std::string> scalars;
  std::map<std::string, ArrayBlock> arrays;

  const std::string& scalar(const std::string& key) const {
    auto it = scalars.find(key);
    if (it == scalars.end()) throw IoError("scenario file: missing key '" + key + "'");
    return it->second;
  }
  double number(const std::string& key) const {
    try {
      return std::stod(scalar(key));
    } catch (const std::logic_error&) {
      throw IoError("scenario file: key '" + key + "' is not a number");
    }
  }
  const ArrayBlock& array(const std::string& name, std::size_t cols) const {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw IoError("scenario file: missing array '" + name + "'");
    if (it->second.cols != cols) throw IoError("scenario file: array '" + name + "' has the wrong width");
    return it->second;
  }
  std::vector<double> vector(const std::string& name) const { return array(name, 1).values; }
  std::vector<int> ivector(const std::string& name) const {
    std::vector<int> out;
    for (double v : vector(name)) out.push_back(static_cast<int>(v));
    return out;
  }
  template <typename T>
  Matrix<T> matrix(const std::string& name) const {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw IoError("scenario file: missing array '" + name + "'");
    Matrix<T> m(it->second.rows, it->second.cols);
    for (std::size_t j = 0; j < it->second.values.size(); ++j) m.data()[j] = static_cast<T>(it->second.values[j]);
    return m;
  }
  std::vector<Point> points(const std::string& name) const {
    const ArrayBlock& b = array(name, 2);
    std::vector<Point> out;
    for (std::size_t r = 0; r < b.rows; ++r) out.push_back({b.values[2 * r], b.values[2 * r + 1]});
    return out;
  }
};

inline ParsedFile parse_scenario_text(std::istream& is) {
  ParsedFile f;
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kScenarioMagic)
    throw IoError("scenario file: missing '" + std::string(kScenarioMagic) + "' header");
  if (version != kScenarioVersion) throw IoError("scenario file: unsupported version " + std::to_string(version));
  std::string key;
  while (is >> key) {
    if (key == "end") return f;
    if (key == "array") {
      std::string name;
      ArrayBlock b;
      if (!(is >> name >> b.rows >> b.cols)) throw IoError("scenario file: malformed array header");
      b.values.resize(b.rows * b.cols);
      for (double& v : b.values) {
        std::string tok;
        if (!(is >> tok)) throw IoError("scenario file: array '" + name + "' is truncated");
        try {
          v = std::stod(tok);
        } catch (const std::logic_error&) {
          throw IoError("scenario file: array '" + name + "' holds a non-number");
        }
      }
      f.arrays[name] = std::move(b);
      continue;
    }
    std::string value;
    if (!(is >> value)) throw IoError("scenario file: key '" + key + "' has no value");
    f.scalars[key] = value;
  }
  throw IoError("scenario file: missing 'end'");
}

}  // namespace detail

inline void write_scenario(std::ostream& os, const Scenario& s, const DemandProfile& d) {
  detail::ScenarioWriter w(os);
  os << kScenarioMagic << ' ' << kScenarioVersion << '\n';
  const SystemParams& p = s.params;
  w.scalar("params.bandwidth_hz", p.bandwidth_hz);
  w.scalar("params.access_fraction", p.access_fraction);
  w.scalar("params.uplink_time_fraction", p.uplink_time_fraction);
  w.scalar("params.n_mbs", p.n_mbs);
  w.scalar("params.isd_m", p.isd_m);
  w.scalar("params.p_mbs_dbm", p.p_mbs_dbm);
  w.scalar("params.p_sbs_dbm", p.p_sbs_dbm);
  w.scalar("params.p_md_dbm", p.p_md_dbm);
  w.scalar("params.noise_psd_dbm_hz", p.noise_psd_dbm_hz);
  w.scalar("params.seed", std::to_string(p.seed));
  w.scalar("counts.sbs_per_cell", s.counts.sbs_per_cell);
  w.scalar("counts.n_hrd", s.counts.n_hrd);
  w.scalar("counts.n_csd", s.counts.n_csd);
  w.points("mbs_pos", s.mbs_pos);
  w.points("sbs_pos", s.sbs_pos);
  w.points("hrd_pos", s.hrd_pos);
  w.points("csd_pos", s.csd_pos);
  w.ivector("sbs_cell", s.sbs_cell);
  w.ivector("backhaul_mbs", s.backhaul_mbs);
  w.matrix("gain_sbs_hrd", s.gain_sbs_hrd);
  w.matrix("gain_sbs_csd", s.gain_sbs_csd);
  w.vector("gain_mbs_sbs", s.gain_mbs_sbs);

  w.scalar("demand.n_files", d.catalog.n_files);
  w.scalar("demand.file_size_bytes", d.catalog.file_size_bytes);
  w.scalar("demand.delta", d.catalog.delta);
  w.vector("demand.popularity", d.catalog.popularity);
  w.matrix("demand.request", d.request);
  w.matrix("demand.cache", d.cache);
  w.vector("demand.task_input_bytes", d.task_input_bytes);
  w.vector("demand.task_cycles", d.task_cycles);
  w.vector("demand.local_cps", d.local_cps);
  w.vector("demand.edge_cps", d.edge_cps);
  w.vector("demand.storage_bytes", d.storage_bytes);
  w.vector("demand.hrd_weight", d.hrd_weight);
  w.vector("demand.csd_weight", d.csd_weight);
  os << "end\n";
}

struct ScenarioFile {
  Scenario scenario;
  DemandProfile demand;
};

inline ScenarioFile read_scenario(std::istream& is) {
  const detail::ParsedFile f = detail::parse_scenario_text(is);
  ScenarioFile out;
  Scenario& s = out.scenario;
  SystemParams& p = s.params;
  p.bandwidth_hz = f.number("params.bandwidth_hz");
  p.access_fraction = f.number("params.access_fraction");
  p.uplink_time_fraction = f.number("params.uplink_time_fraction");
  p.n_mbs = static_cast<int>(f.number("params.n_mbs"));
  p.isd_m = f.number("params.isd_m");
  p.p_mbs_dbm = f.number("params.p_mbs_dbm");
  p.p_sbs_dbm = f.number("params.p_sbs_dbm");
  p.p_md_dbm = f.number("params.p_md_dbm");
  p.noise_psd_dbm_hz = f.number("params.noise_psd_dbm_hz");
  p.seed = std::stoull(f.scalar("params.seed"));
  s.counts.sbs_per_cell = static_cast<int>(f.number("counts.sbs_per_cell"));
  s.counts.n_hrd = static_cast<int>(f.number("counts.n_hrd"));
  s.counts.n_csd = static_cast<int>(f.number("counts.n_csd"));
  s.mbs_pos = f.points("mbs_pos");
  s.sbs_pos = f.points("sbs_pos");
  s.hrd_pos = f.points("hrd_pos");
  s.csd_pos = f.points("csd_pos");
  s.sbs_cell = f.ivector("sbs_cell");
  s.backhaul_mbs = f.ivector("backhaul_mbs");
  s.gain_sbs_hrd = f.matrix<double>("gain_sbs_hrd");
  s.gain_sbs_csd = f.matrix<double>("gain_sbs_csd");
  s.gain_mbs_sbs = f.vector("gain_mbs_sbs");

  DemandProfile& d = out.demand;
  d.catalog.n_files = static_cast<int>(f.number("demand.n_files"));
  d.catalog.file_size_bytes = f.number("demand.file_size_bytes");
  d.catalog.delta = f.number("demand.delta");
  d.catalog.popularity = f.vector("demand.popularity");
  d.request = f.matrix<std::uint8_t>("demand.request");
  d.cache = f.matrix<std::uint8_t>("demand.cache");
  d.task_input_bytes = f.vector("demand.task_input_bytes");
  d.task_cycles = f.vector("demand.task_cycles");
  d.local_cps = f.vector("demand.local_cps");
  d.edge_cps = f.vector("demand.edge_cps");
  d.storage_bytes = f.vector("demand.storage_bytes");
  d.hrd_weight = f.vector("demand.hrd_weight");
  d.csd_weight = f.vector("demand.csd_weight");

  p.validate();
  if (s.sbs_cell.size() != s.sbs_pos.size() || s.backhaul_mbs.size() != s.sbs_pos.size() ||
      s.gain_sbs_hrd.rows() != s.sbs_pos.size() || s.gain_sbs_hrd.cols() != s.hrd_pos.size() ||
      s.gain_sbs_csd.rows() != s.sbs_pos.size() || s.gain_sbs_csd.cols() != s.csd_pos.size() ||
      s.gain_mbs_sbs.size() != s.sbs_pos.size())
    throw IoError("scenario file: array sizes do not match the node counts");
  try {
    d.validate(s.n_sbs(), s.n_hrd(), s.n_csd());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("scenario file: ") + e.what());
  }
  return out;
}

inline void save_scenario(const std::string& path, const Scenario& s, const DemandProfile& d) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_scenario(os, s, d);
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  try {
    return read_scenario(is);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

/// One row per (SBS, MD class, MD) with the S factor and spectral efficiency.
inline void write_rate_table_csv(std::ostream& os, const RateTable& t) {
  os << "sbs,link,md,s_hz,r_bps_hz,theta_lb\n";
  for (int n = 0; n < t.n_sbs(); ++n) {
    const auto nn = static_cast<std::size_t>(n);
    os << n << ",backhaul,-1," << format_double(t.s_bh[nn], 12) << ',' << format_double(t.r_bh[nn], 12) << ",\n";
    for (std::size_t k = 0; k < t.r_dl.cols(); ++k)
      os << n << ",downlink," << k << ',' << format_double(t.s_dl[nn], 12) << ',' << format_double(t.r_dl(nn, k), 12)
         << ',' << format_double(t.theta_lb(nn, k), 12) << '\n';
    for (std::size_t k = 0; k < t.r_ul.cols(); ++k)
      os << n << ",uplink," << k << ',' << format_double(t.s_ul[nn], 12) << ',' << format_double(t.r_ul(nn, k), 12)
         << ",\n";
  }
}

/// Move log: iteration, kind, accepted, delta V, F.
inline void write_move_log_csv(std::ostream& os, const std::vector<MoveRecord>& moves) {
  os << "iteration,class,kind,m,n,md_from_m,md_from_n,accepted,reason,delta_v,F\n";
  for (const MoveRecord& r : moves)
    os << r.iteration << ',' << to_string(r.proposal.md_class) << ',' << to_string(r.proposal.kind) << ','
       << r.proposal.m << ',' << r.proposal.n << ',' << r.proposal.md_from_m << ',' << r.proposal.md_from_n << ','
       << (r.accepted ? 1 : 0) << ',' << r.reason << ',' << format_double(r.delta_v, 12) << ','
       << format_double(r.objective, 12) << '\n';
}

inline void write_trace_csv(std::ostream& os, const std::vector<double>& trace) {
  os << "step,F\n";
  for (std::size_t j = 0; j < trace.size(); ++j) os << j << ',' << format_double(trace[j], 17) << '\n';
}

}  // namespace mecassoc
