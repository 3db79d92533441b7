#include "specsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace specsim {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json put(double v) { return std::isfinite(v) ? json(v) : json(); }

double take(const json& j, const char* what) {
  if (j.is_null()) return kNaN;
  if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number or null");
  return j.get<double>();
}

json put_vec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(put(x));
  return a;
}

std::vector<double> take_vec(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(take(e, what));
  return v;
}

std::vector<double> scalar_or_array(const json& j, std::size_t n, const char* what) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  const auto v = take_vec(j, what);
  if (v.size() != n) {
    throw ConfigError(std::string(what) + " must be a scalar or an array of length " +
                      std::to_string(n));
  }
  return v;
}

std::array<double, 2> take_pos(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(std::string(what) + " must be an [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json report_to_json(const DelayReport& r) {
  return json{{"lambda", put_vec(r.lambda)},
              {"rates", put_vec(r.rates)},
              {"sojourn", put_vec(r.t)},
              {"weighted", put(r.weighted)}};
}

DelayReport report_from_json(const json& j) {
  DelayReport r;
  r.lambda = take_vec(j.at("lambda"), "report.lambda");
  r.rates = take_vec(j.at("rates"), "report.rates");
  r.t = take_vec(j.at("sojourn"), "report.sojourn");
  r.weighted = take(j.at("weighted"), "report.weighted");
  return r;
}

json trace_to_json(const SolveTrace& t) {
  return json{{"iterations", t.iterations},
              {"kkt", put(t.kkt)},
              {"converged", t.converged},
              {"stalled", t.stalled},
              {"objective", put_vec(t.objective)},
              {"candidate_sizes", t.candidate_sizes},
              {"restart_agreement", put(t.restart_agreement)}};
}

SolveTrace trace_from_json(const json& j) {
  SolveTrace t;
  t.iterations = j.value("iterations", 0);
  t.kkt = take(j.value("kkt", json()), "trace.kkt");
  t.converged = j.value("converged", false);
  t.stalled = j.value("stalled", false);
  if (j.contains("objective")) t.objective = take_vec(j["objective"], "trace.objective");
  if (j.contains("candidate_sizes")) {
    t.candidate_sizes = j["candidate_sizes"].get<std::vector<int>>();
  }
  t.restart_agreement = take(j.value("restart_agreement", json(1.0)), "trace.restart_agreement");
  return t;
}

json bounds_to_json(const DelayBounds& b) {
  return json{{"lower1", put_vec(b.lower1)},
              {"lower2", put_vec(b.lower2)},
              {"upper2", put_vec(b.upper2)},
              {"upper1", put_vec(b.upper1)},
              {"weighted_lower1", put(b.weighted_lower1)},
              {"weighted_lower2", put(b.weighted_lower2)},
              {"weighted_upper2", put(b.weighted_upper2)},
              {"weighted_upper1", put(b.weighted_upper1)}};
}

DelayBounds bounds_from_json(const json& j) {
  DelayBounds b;
  b.lower1 = take_vec(j.at("lower1"), "bounds.lower1");
  b.lower2 = take_vec(j.at("lower2"), "bounds.lower2");
  b.upper2 = take_vec(j.at("upper2"), "bounds.upper2");
  b.upper1 = take_vec(j.at("upper1"), "bounds.upper1");
  b.weighted_lower1 = take(j.at("weighted_lower1"), "bounds");
  b.weighted_lower2 = take(j.at("weighted_lower2"), "bounds");
  b.weighted_upper2 = take(j.at("weighted_upper2"), "bounds");
  b.weighted_upper1 = take(j.at("weighted_upper1"), "bounds");
  return b;
}

}  // namespace

Experiment parse_experiment(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const std::string schema = j.value("schema", "");
  if (schema != kScenarioSchema) {
    throw ConfigError("expected schema '" + std::string(kScenarioSchema) + "', got '" +
                      schema + "'");
  }
  const json layout = j.value("layout", json::object());
  const json radio = j.value("radio", json::object());
  const std::string type = layout.value("type", "hex_drop");
  const std::string profile = radio.value("profile", "pico");
  if (profile != "pico" && profile != "macro-pico") {
    throw ConfigError("unknown radio profile '" + profile + "'");
  }

  Experiment ex;
  if (type == "hex_drop") {
    HexDropParams p;
    if (profile == "macro-pico") {
      p.pico_psd = 1.0;
      p.pico_exp = 3.4;
      p.macro_psd = 10.0;
      p.macro_exp = 2.8;
    }
    p.width = layout.value("width_m", p.width);
    p.height = layout.value("height_m", p.height);
    p.spacing = layout.value("spacing_m", p.spacing);
    p.bts_count = layout.value("bts_count", p.bts_count);
    p.seed = layout.value("seed", p.seed);
    p.macro_count = layout.value("macro_count", p.macro_count);
    p.pico_psd = layout.value("pico_psd", p.pico_psd);
    p.pico_exp = layout.value("pico_exp", p.pico_exp);
    p.macro_psd = layout.value("macro_psd", p.macro_psd);
    p.macro_exp = layout.value("macro_exp", p.macro_exp);
    p.noise_psd = radio.value("noise_psd", p.noise_psd);
    p.bandwidth_hz = radio.value("bandwidth_hz", p.bandwidth_hz);
    p.packet_bits = radio.value("packet_bits", p.packet_bits);
    ex.scenario = hex_drop(p);
  } else if (type == "random") {
    RandomScenarioParams p;
    p.n = layout.value("cells", p.n);
    p.width = layout.value("width_m", p.width);
    p.height = layout.value("height_m", p.height);
    p.min_separation = layout.value("min_separation_m", p.min_separation);
    p.ue_offset = layout.value("ue_offset_m", p.ue_offset);
    p.seed = layout.value("seed", p.seed);
    if (radio.contains("tx_psd")) {
      if (!radio["tx_psd"].is_number()) {
        throw ConfigError("random layout takes a scalar tx_psd");
      }
      p.tx_psd = radio["tx_psd"].get<double>();
    }
    if (radio.contains("pathloss_exp")) {
      if (!radio["pathloss_exp"].is_number()) {
        throw ConfigError("random layout takes a scalar pathloss_exp");
      }
      p.pathloss_exp = radio["pathloss_exp"].get<double>();
    }
    p.noise_psd = radio.value("noise_psd", p.noise_psd);
    p.bandwidth_hz = radio.value("bandwidth_hz", p.bandwidth_hz);
    p.packet_bits = radio.value("packet_bits", p.packet_bits);
    ex.scenario = random_scenario(p);
  } else if (type == "explicit") {
    Scenario sc;
    if (!layout.contains("bts")) throw ConfigError("explicit layout needs a bts array");
    for (const auto& b : layout["bts"]) sc.bts.push_back(take_pos(b, "layout.bts entry"));
    const std::size_t n = sc.bts.size();
    sc.tx_psd = scalar_or_array(radio.value("tx_psd", json(1.0)), n, "radio.tx_psd");
    sc.pathloss_exp =
        scalar_or_array(radio.value("pathloss_exp", json(3.0)), n, "radio.pathloss_exp");
    sc.noise_psd = radio.value("noise_psd", sc.noise_psd);
    sc.bandwidth_hz = radio.value("bandwidth_hz", sc.bandwidth_hz);
    sc.packet_bits = radio.value("packet_bits", sc.packet_bits);
    if (!layout.contains("demand")) throw ConfigError("explicit layout needs a demand array");
    for (const auto& d : layout["demand"]) {
      DemandPoint pt;
      pt.pos = take_pos(d.at("pos"), "demand pos");
      pt.cell = d.at("cell").get<int>();
      sc.demand.push_back(pt);
    }
    try {
      sc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    ex.scenario = sc;
  } else {
    throw ConfigError("unknown layout type '" + type +
                      "' (expected hex_drop, random, or explicit)");
  }
  ex.traffic = j.value("traffic", json::object());
  return ex;
}

Experiment load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_experiment(j);
}

std::vector<double> resolve_traffic(const Experiment& ex, const EfficiencyTable& tbl) {
  const int n = tbl.n;
  const json& t = ex.traffic;
  if (!t.is_object()) throw ConfigError("traffic must be an object");
  if (t.contains("rates")) {
    auto v = take_vec(t["rates"], "traffic.rates");
    if (static_cast<int>(v.size()) != n) {
      throw ConfigError("traffic.rates must have one entry per cell");
    }
    for (double r : v) {
      if (!(r >= 0) || !std::isfinite(r)) throw ConfigError("traffic.rates must be nonnegative");
    }
    return v;
  }
  if (t.contains("mean_rate")) {
    const double mean = t["mean_rate"].get<double>();
    if (!(mean >= 0) || !std::isfinite(mean)) {
      throw ConfigError("traffic.mean_rate must be nonnegative");
    }
    double total = 0.0;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
      v[i] = tbl.at(i, full_mask(n));
      total += v[i];
    }
    if (total <= 0) throw ConfigError("cannot spread load over cells with zero efficiency");
    for (double& r : v) r = mean * n * r / total;
    return v;
  }
  throw ConfigError("traffic needs either rates or mean_rate");
}

json scenario_to_json(const Scenario& sc) {
  json bts = json::array();
  for (const auto& b : sc.bts) bts.push_back({b[0], b[1]});
  json demand = json::array();
  for (const auto& d : sc.demand) {
    demand.push_back({{"pos", {d.pos[0], d.pos[1]}}, {"cell", d.cell}});
  }
  return json{{"schema", kScenarioSchema},
              {"layout", {{"type", "explicit"}, {"bts", bts}, {"demand", demand}}},
              {"radio",
               {{"tx_psd", sc.tx_psd},
                {"pathloss_exp", sc.pathloss_exp},
                {"noise_psd", sc.noise_psd},
                {"bandwidth_hz", sc.bandwidth_hz},
                {"packet_bits", sc.packet_bits}}}};
}

Scenario scenario_from_json(const json& j) { return parse_experiment(j).scenario; }

json record_to_json(const AllocationRecord& rec) {
  json j{{"schema", kAllocationSchema},
         {"scheme", rec.scheme},
         {"x", put_vec(rec.x)},
         {"lambda", put_vec(rec.lambda)},
         {"report", report_to_json(rec.report)},
         {"trace", trace_to_json(rec.trace)},
         {"scenario", rec.scenario}};
  if (rec.bounds) j["bounds"] = bounds_to_json(*rec.bounds);
  return j;
}

AllocationRecord record_from_json(const json& j) {
  const std::string schema = j.value("schema", "");
  if (schema != kAllocationSchema) {
    throw ConfigError("expected schema '" + std::string(kAllocationSchema) + "', got '" +
                      schema + "'");
  }
  AllocationRecord rec;
  rec.scheme = j.value("scheme", "");
  rec.x = take_vec(j.at("x"), "x");
  rec.lambda = take_vec(j.at("lambda"), "lambda");
  rec.report = report_from_json(j.at("report"));
  if (j.contains("trace")) rec.trace = trace_from_json(j["trace"]);
  if (j.contains("bounds") && !j["bounds"].is_null()) {
    rec.bounds = bounds_from_json(j["bounds"]);
  }
  rec.scenario = j.value("scenario", json());
  return rec;
}

AllocationRecord load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return record_from_json(j);
}

void save_record(const std::string& path, const AllocationRecord& rec) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << record_to_json(rec).dump(2) << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "load,scheme,seed,feasible,analytic_delay,sim_delay,sim_stderr,iterations\n";
  for (const auto& r : rows) {
    os << g17(r.load) << ',' << r.scheme << ',' << r.seed << ',' << (r.feasible ? 1 : 0)
       << ',' << g17(r.analytic_delay) << ',' << g17(r.sim_delay) << ','
       << g17(r.sim_stderr) << ',' << r.iterations << '\n';
  }
}

void write_percell_csv(std::ostream& os, const AllocationRecord& rec, const SimResult* sim) {
  os << "cell,lambda,rate,sojourn,lower1,lower2,upper2,upper1,sim_mean,sim_stderr,"
        "utilization\n";
  const std::size_t n = rec.lambda.size();
  for (std::size_t i = 0; i < n; ++i) {
    os << i << ',' << g17(rec.lambda[i]) << ',' << g17(rec.report.rates[i]) << ','
       << g17(rec.report.t[i]);
    if (rec.bounds) {
      os << ',' << g17(rec.bounds->lower1[i]) << ',' << g17(rec.bounds->lower2[i]) << ','
         << g17(rec.bounds->upper2[i]) << ',' << g17(rec.bounds->upper1[i]);
    } else {
      os << ",,,,";
    }
    if (sim) {
      os << ',' << g17(sim->mean_sojourn[i]) << ',' << g17(sim->stderr_sojourn[i]) << ','
         << g17(sim->utilization[i]);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
}

void write_cdf_csv(std::ostream& os, const SimResult& sim) {
  os << "cell,queue_len,cdf\n";
  for (std::size_t i = 0; i < sim.queue_cdf.size(); ++i) {
    for (std::size_t k = 0; k < sim.queue_cdf[i].size(); ++k) {
      os << i << ',' << k << ',' << g17(sim.queue_cdf[i][k]) << '\n';
    }
  }
  for (std::size_t k = 0; k < sim.pooled_cdf.size(); ++k) {
    os << "pooled," << k << ',' << g17(sim.pooled_cdf[k]) << '\n';
  }
}

void write_power_csv(std::ostream& os, const PowerControlResult& res) {
  os << "iteration,phase,analytic_delay,simulated_delay,tv_change\n";
  for (const auto& st : res.steps) {
    os << st.iteration << ',' << st.phase << ',' << g17(st.analytic_delay) << ','
       << g17(st.simulated_delay) << ',' << g17(st.tv_change) << '\n';
  }
}

}  // namespace specsim
