#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"
#include "specsim/allocation.hpp"
#include "specsim/baselines.hpp"
#include "specsim/bounds.hpp"
#include "specsim/cli_cmds.hpp"
#include "specsim/conservative.hpp"
#include "specsim/efficiency.hpp"
#include "specsim/io.hpp"
#include "specsim/scenario.hpp"

namespace {

using namespace specsim;
using nlohmann::json;
namespace fs = std::filesystem;

struct TmpFile {
  fs::path path;
  explicit TmpFile(const std::string& name) : path(fs::temp_directory_path() / name) {}
  ~TmpFile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  REQUIRE(out.good());
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json two_cell_config(double r0, double r1) {
  json bts = json::array({json::array({0.0, 0.0}), json::array({60.0, 0.0})});
  json demand = json::array({json{{"pos", json::array({10.0, 0.0})}, {"cell", 0}},
                             json{{"pos", json::array({50.0, 0.0})}, {"cell", 1}}});
  return json{{"schema", kScenarioSchema},
              {"layout", {{"type", "explicit"}, {"bts", bts}, {"demand", demand}}},
              {"radio", {{"tx_psd", 1.0}, {"pathloss_exp", 3.0}}},
              {"traffic", {{"rates", json::array({r0, r1})}}}};
}

bool same_number(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

int run_cli(const std::string& tail) {
  const std::string cmd = std::string(SPECSIM_CLI_PATH) + " " + tail + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("scenarios round-trip through JSON, text form included") {
  Scenario sc;
  sc.bts = {{0.0, 0.0}, {47.25, 12.5}, {31.0, 88.125}};
  sc.tx_psd = {1.0, 10.0, 0.5};
  sc.pathloss_exp = {3.0, 2.8, 3.4};
  sc.demand = {{{5.5, 1.25}, 0}, {{46.0, 20.0}, 1}, {{30.0, 80.0}, 2}, {{12.0, 3.0}, 0}};
  sc.noise_psd = 0.125e-6;
  sc.bandwidth_hz = 20e6;
  sc.packet_bits = 1e6;

  const json j = scenario_to_json(sc);
  CHECK(j["layout"]["type"] == "explicit");

  for (const Scenario& back : {scenario_from_json(j), scenario_from_json(json::parse(j.dump()))}) {
    CHECK(back.bts == sc.bts);
    CHECK(back.tx_psd == sc.tx_psd);
    CHECK(back.pathloss_exp == sc.pathloss_exp);
    REQUIRE(back.demand.size() == sc.demand.size());
    for (std::size_t k = 0; k < sc.demand.size(); ++k) {
      CHECK(back.demand[k].pos == sc.demand[k].pos);
      CHECK(back.demand[k].cell == sc.demand[k].cell);
    }
    CHECK(back.noise_psd == sc.noise_psd);
    CHECK(back.bandwidth_hz == sc.bandwidth_hz);
    CHECK(back.packet_bits == sc.packet_bits);
  }
}

TEST_CASE("the generated layouts parse with their knobs applied") {
  {
    const json j{{"schema", kScenarioSchema},
                 {"layout",
                  {{"type", "hex_drop"},
                   {"bts_count", 5},
                   {"spacing_m", 25.0},
                   {"seed", 3},
                   {"macro_count", 1}}},
                 {"radio", {{"profile", "macro-pico"}}}};
    const auto ex = parse_experiment(j);
    CHECK(ex.scenario.cell_count() == 5);
    CHECK(!ex.scenario.demand.empty());
    CHECK(ex.scenario.tx_psd[0] == 10.0);
    CHECK(ex.scenario.pathloss_exp[0] == doctest::Approx(2.8));
    for (int i = 1; i < 5; ++i) {
      CHECK(ex.scenario.tx_psd[i] == 1.0);
      CHECK(ex.scenario.pathloss_exp[i] == doctest::Approx(3.4));
    }
  }
  {
    const json j{{"schema", kScenarioSchema},
                 {"layout", {{"type", "random"}, {"cells", 4}, {"seed", 9}}},
                 {"radio", {{"tx_psd", 2.0}}}};
    const auto ex = parse_experiment(j);
    CHECK(ex.scenario.cell_count() == 4);
    CHECK(ex.scenario.demand.size() == 4);
    for (double v : ex.scenario.tx_psd) CHECK(v == 2.0);
  }
}

TEST_CASE("malformed configs are rejected with ConfigError") {
  CHECK_THROWS_AS(parse_experiment(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_experiment(json{{"schema", "specsim.scenario/2"}}), ConfigError);
  CHECK_THROWS_AS(parse_experiment(json{{"schema", kScenarioSchema},
                                        {"layout", {{"type", "torus"}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment(json{{"schema", kScenarioSchema},
                                        {"layout", {{"type", "explicit"}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment(json{{"schema", kScenarioSchema},
                                        {"radio", {{"profile", "femto"}}}}),
                  ConfigError);

  // Demand pointing at a cell that does not exist fails scenario validation.
  json j = two_cell_config(1.0, 1.0);
  j["layout"]["demand"][1]["cell"] = 7;
  CHECK_THROWS_AS(parse_experiment(j), ConfigError);
}

TEST_CASE("traffic resolves explicitly or proportionally") {
  const auto ex = parse_experiment(two_cell_config(3.0, 5.0));
  const auto tbl = build_table(ex.scenario);
  CHECK(resolve_traffic(ex, tbl) == std::vector<double>{3.0, 5.0});

  Experiment prop = ex;
  prop.traffic = json{{"mean_rate", 4.0}};
  const auto lam = resolve_traffic(prop, tbl);
  const double s0 = tbl.at(0, full_mask(2));
  const double s1 = tbl.at(1, full_mask(2));
  CHECK(lam[0] == doctest::Approx(4.0 * 2 * s0 / (s0 + s1)).epsilon(1e-12));
  CHECK(lam[1] == doctest::Approx(4.0 * 2 * s1 / (s0 + s1)).epsilon(1e-12));
  CHECK(lam[0] + lam[1] == doctest::Approx(8.0).epsilon(1e-12));

  Experiment bad = ex;
  bad.traffic = json{{"rates", json::array({1.0})}};
  CHECK_THROWS_AS(resolve_traffic(bad, tbl), ConfigError);
  bad.traffic = json{{"rates", json::array({1.0, -2.0})}};
  CHECK_THROWS_AS(resolve_traffic(bad, tbl), ConfigError);
  bad.traffic = json::object();
  CHECK_THROWS_AS(resolve_traffic(bad, tbl), ConfigError);
  bad.traffic = json{{"mean_rate", -1.0}};
  CHECK_THROWS_AS(resolve_traffic(bad, tbl), ConfigError);
}

TEST_CASE("allocation records survive a disk round trip, NaN included") {
  AllocationRecord rec;
  rec.scheme = "refined";
  rec.x = {0.0, 0.25, 0.5, 0.25};
  rec.lambda = {0.0, 4.0};
  rec.report.lambda = rec.lambda;
  rec.report.rates = {12.0, 17.5};
  rec.report.t = {std::nan(""), 0.07407407407407407};
  rec.report.weighted = 0.07407407407407407;
  rec.trace.iterations = 42;
  rec.trace.kkt = 3.5e-9;
  rec.trace.converged = true;
  rec.trace.objective = {0.9, 0.1, 0.07407407407407407};
  rec.trace.candidate_sizes = {1, 3};
  rec.trace.restart_agreement = 0.8;
  DelayBounds b;
  b.lower1 = {std::nan(""), 0.05};
  b.lower2 = {std::nan(""), 0.06};
  b.upper2 = {std::nan(""), 0.08};
  b.upper1 = {std::nan(""), 0.091};
  b.weighted_lower1 = 0.05;
  b.weighted_lower2 = 0.06;
  b.weighted_upper2 = 0.08;
  b.weighted_upper1 = 0.091;
  rec.bounds = b;
  rec.scenario = scenario_to_json(parse_experiment(two_cell_config(0.0, 4.0)).scenario);

  TmpFile f("specsim_t_record.json");
  save_record(f.str(), rec);
  const auto back = load_record(f.str());

  CHECK(back.scheme == rec.scheme);
  REQUIRE(back.x.size() == rec.x.size());
  for (std::size_t k = 0; k < rec.x.size(); ++k) CHECK(back.x[k] == rec.x[k]);
  for (std::size_t i = 0; i < rec.lambda.size(); ++i) {
    CHECK(back.lambda[i] == rec.lambda[i]);
    CHECK(same_number(back.report.t[i], rec.report.t[i]));
    CHECK(back.report.rates[i] == rec.report.rates[i]);
  }
  CHECK(back.report.weighted == rec.report.weighted);
  CHECK(back.trace.iterations == 42);
  CHECK(back.trace.kkt == rec.trace.kkt);
  CHECK(back.trace.converged);
  CHECK(back.trace.objective == rec.trace.objective);
  CHECK(back.trace.candidate_sizes == rec.trace.candidate_sizes);
  CHECK(back.trace.restart_agreement == 0.8);
  REQUIRE(back.bounds.has_value());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(same_number(back.bounds->lower1[i], b.lower1[i]));
    CHECK(same_number(back.bounds->lower2[i], b.lower2[i]));
    CHECK(same_number(back.bounds->upper2[i], b.upper2[i]));
    CHECK(same_number(back.bounds->upper1[i], b.upper1[i]));
  }
  CHECK(back.scenario == rec.scenario);

  rec.bounds.reset();
  save_record(f.str(), rec);
  CHECK(!load_record(f.str()).bounds.has_value());

  json tampered = record_to_json(rec);
  tampered["schema"] = "something-else";
  CHECK_THROWS_AS(record_from_json(tampered), ConfigError);
}

TEST_CASE("allocate runs end to end with every output attached") {
  TmpFile cfg("specsim_t_alloc_cfg.json");
  TmpFile out("specsim_t_alloc_out.json");
  TmpFile percell("specsim_t_alloc_percell.csv");
  TmpFile cdf("specsim_t_alloc_cdf.csv");
  write_text(cfg.path, two_cell_config(4.0, 4.0).dump());

  AllocateArgs args;
  args.config = cfg.str();
  args.out = out.str();
  args.percell_csv = percell.str();
  args.cdf_csv = cdf.str();
  args.with_bounds = true;
  args.sim_horizon = 50'000;
  CHECK(cmd_allocate(args) == kExitOk);

  const auto rec = load_record(out.str());
  CHECK(rec.scheme == "conservative");
  double mass = 0.0;
  for (double v : rec.x) mass += v;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rec.bounds.has_value());
  CHECK(rec.report.weighted > 0.0);

  const auto percell_text = read_text(percell.path);
  CHECK(percell_text.rfind("cell,lambda,rate,sojourn", 0) == 0);
  CHECK(std::count(percell_text.begin(), percell_text.end(), '\n') == 3);

  const auto cdf_text = read_text(cdf.path);
  CHECK(cdf_text.rfind("cell,queue_len,cdf", 0) == 0);
  CHECK(cdf_text.find("pooled,") != std::string::npos);

  // Re-evaluating the stored record reproduces the stored report.
  AllocateArgs replay;
  replay.config = cfg.str();
  replay.from_allocation = out.str();
  TmpFile out2("specsim_t_alloc_out2.json");
  replay.out = out2.str();
  CHECK(cmd_allocate(replay) == kExitOk);
  const auto rec2 = load_record(out2.str());
  CHECK(rec2.scheme == rec.scheme);
  CHECK(rec2.report.weighted == doctest::Approx(rec.report.weighted).epsilon(1e-12));
}

TEST_CASE("allocate maps failures onto its exit codes") {
  TmpFile cfg("specsim_t_fail_cfg.json");
  write_text(cfg.path, two_cell_config(4.0, 4.0).dump());

  AllocateArgs args;
  args.config = "/nonexistent/specsim.json";
  CHECK(cmd_allocate(args) == kExitError);

  TmpFile garbled("specsim_t_garbled.json");
  write_text(garbled.path, "{not json");
  args.config = garbled.str();
  CHECK(cmd_allocate(args) == kExitError);

  TmpFile hot("specsim_t_hot_cfg.json");
  write_text(hot.path, two_cell_config(4000.0, 4000.0).dump());
  args = AllocateArgs{};
  args.config = hot.str();
  CHECK(cmd_allocate(args) == kExitInfeasible);

  args = AllocateArgs{};
  args.config = cfg.str();
  args.scheme = "alamouti";
  CHECK(cmd_allocate(args) == kExitError);

  args = AllocateArgs{};
  args.config = cfg.str();
  args.cdf_csv = "/tmp/specsim_t_unreachable.csv";  // no sim horizon
  CHECK(cmd_allocate(args) == kExitError);

  // A stored allocation sized for a different network is rejected.
  AllocationRecord wrong;
  wrong.scheme = "conservative";
  wrong.x = std::vector<double>(8, 0.125);
  wrong.lambda = {1.0, 1.0, 1.0};
  wrong.report.lambda = wrong.lambda;
  wrong.report.rates = {1.0, 1.0, 1.0};
  wrong.report.t = {1.0, 1.0, 1.0};
  TmpFile stored("specsim_t_wrong_record.json");
  save_record(stored.str(), wrong);
  args = AllocateArgs{};
  args.config = cfg.str();
  args.from_allocation = stored.str();
  CHECK(cmd_allocate(args) == kExitError);
}

TEST_CASE("sweep output is identical no matter how many workers run it") {
  TmpFile cfg("specsim_t_sweep_cfg.json");
  json j{{"schema", kScenarioSchema},
         {"layout", {{"type", "random"}, {"cells", 3}, {"seed", 7}}},
         {"radio", json::object()}};
  write_text(cfg.path, j.dump());

  // Pick one comfortable load and one just past the capacity boundary.
  const auto ex = parse_experiment(j);
  const auto tbl = build_table(ex.scenario);
  Experiment probe = ex;
  probe.traffic = json{{"mean_rate", 1.0}};
  const double cap = throughput_margin(tbl, resolve_traffic(probe, tbl));
  REQUIRE(cap > 0.0);

  SweepArgs args;
  args.config = cfg.str();
  args.loads = {0.4 * cap, 1.1 * cap};
  args.schemes = {"full-reuse", "orthogonal", "conservative"};
  args.seeds = {1, 2};
  args.sim_horizon = 30'000;

  TmpFile one("specsim_t_sweep1.csv");
  args.out_csv = one.str();
  args.workers = 1;
  CHECK(cmd_sweep(args) == kExitOk);

  TmpFile four("specsim_t_sweep4.csv");
  args.out_csv = four.str();
  args.workers = 4;
  CHECK(cmd_sweep(args) == kExitOk);

  const auto text1 = read_text(one.path);
  CHECK(text1 == read_text(four.path));
  CHECK(text1.rfind("load,scheme,seed,feasible,analytic_delay", 0) == 0);

  std::vector<std::vector<std::string>> lines;
  {
    std::stringstream ss(text1);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
      std::vector<std::string> fields;
      std::stringstream fs(line);
      std::string field;
      while (std::getline(fs, field, ',')) fields.push_back(field);
      REQUIRE(fields.size() == 8);
      lines.push_back(std::move(fields));
    }
  }
  // 2 loads x 3 schemes x 2 seeds, loads outermost, seeds innermost.
  REQUIRE(lines.size() == 12);
  for (const auto& row : lines) {
    const bool high = std::stod(row[0]) > cap;
    CHECK(row[3] == (high ? "0" : "1"));
    if (high) {
      // Past capacity there is no analytic number, but the full-reuse
      // overload still gets simulated; the other schemes have nothing to run.
      CHECK(row[4] == "nan");
      if (row[1] == "full-reuse") {
        CHECK(std::stod(row[5]) > 0.0);
      } else {
        CHECK(row[5] == "nan");
      }
    } else {
      CHECK(std::stod(row[4]) > 0.0);
      CHECK(std::stod(row[5]) > 0.0);
    }
  }
  CHECK(lines[0][1] == "full-reuse");
  CHECK(lines[2][1] == "orthogonal");
  CHECK(lines[5][2] == "2");

  TmpFile env("specsim_t_sweep_env.csv");
  args.out_csv = env.str();
  args.workers = 0;
  setenv("SPECSIM_WORKERS", "3", 1);
  CHECK(cmd_sweep(args) == kExitOk);
  unsetenv("SPECSIM_WORKERS");
  CHECK(text1 == read_text(env.path));

  args.loads.clear();
  CHECK(cmd_sweep(args) == kExitError);
}

TEST_CASE("powerctl writes a trajectory and the final record") {
  TmpFile cfg("specsim_t_power_cfg.json");
  json j{{"schema", kScenarioSchema},
         {"layout", {{"type", "random"}, {"cells", 3}, {"seed", 5}}},
         {"radio", json::object()},
         {"traffic", {{"mean_rate", 3.0}}}};
  write_text(cfg.path, j.dump());

  TmpFile csv("specsim_t_power.csv");
  TmpFile rec("specsim_t_power_rec.json");
  PowerArgs args;
  args.config = cfg.str();
  args.out_csv = csv.str();
  args.out_record = rec.str();
  args.max_iters = 3;
  CHECK(cmd_powerctl(args) == kExitOk);

  const auto text = read_text(csv.path);
  CHECK(text.rfind("iteration,phase,analytic_delay", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 2);
  CHECK(text.find("0,a,") != std::string::npos);

  const auto stored = load_record(rec.str());
  CHECK(stored.scheme == "conservative");
  CHECK(stored.report.weighted > 0.0);
}

TEST_CASE("the command-line binary speaks the same protocol") {
  TmpFile cfg("specsim_t_cli_cfg.json");
  write_text(cfg.path, two_cell_config(4.0, 4.0).dump());
  TmpFile out("specsim_t_cli_rec.json");

  CHECK(run_cli("allocate --config " + cfg.str() + " --scheme refined --out " + out.str()) ==
        kExitOk);
  const auto rec = load_record(out.str());
  CHECK(rec.scheme == "refined");

  TmpFile hot("specsim_t_cli_hot.json");
  write_text(hot.path, two_cell_config(4000.0, 4000.0).dump());
  CHECK(run_cli("allocate --config " + hot.str()) == kExitInfeasible);

  CHECK(run_cli("allocate --config /nonexistent.json") == kExitError);
  CHECK(run_cli("") != 0);

  TmpFile csv("specsim_t_cli_sweep.csv");
  CHECK(run_cli("sweep --config " + cfg.str() +
                " --load 2 --load 4 --scheme conservative --out " + csv.str()) == kExitOk);
  CHECK(read_text(csv.path).rfind("load,scheme,seed", 0) == 0);
}
