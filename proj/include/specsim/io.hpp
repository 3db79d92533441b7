#pragma once

#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "specsim/bounds.hpp"
#include "specsim/conservative.hpp"
#include "specsim/power.hpp"
#include "specsim/queue_sim.hpp"
#include "specsim/scenario.hpp"

namespace specsim {

inline constexpr const char* kScenarioSchema = "specsim.scenario/1";
inline constexpr const char* kAllocationSchema = "specsim.allocation/1";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parsed experiment config: the scenario is fully built, the traffic spec
// stays as JSON until an efficiency table is available to resolve
// proportional loads against.
struct Experiment {
  Scenario scenario;
  nlohmann::json traffic;
};

Experiment parse_experiment(const nlohmann::json& j);
Experiment load_experiment(const std::string& path);

// Arrival rates from the traffic spec: either explicit `rates`, or
// `mean_rate` spread proportionally to each cell's all-busy efficiency so
// that better-served cells carry more load.
std::vector<double> resolve_traffic(const Experiment& ex, const EfficiencyTable& tbl);

// Scenarios always serialize in explicit form, geometry and all, so a saved
// file reproduces the instance regardless of how it was generated.
nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

// A solved allocation with everything needed to audit or reuse it.
// Nonfinite numbers serialize as null and parse back as NaN.
struct AllocationRecord {
  std::string scheme;
  std::vector<double> x;
  std::vector<double> lambda;
  DelayReport report;
  SolveTrace trace;
  std::optional<DelayBounds> bounds;
  nlohmann::json scenario;
};

nlohmann::json record_to_json(const AllocationRecord& rec);
AllocationRecord record_from_json(const nlohmann::json& j);
AllocationRecord load_record(const std::string& path);
void save_record(const std::string& path, const AllocationRecord& rec);

// CSV emitters; doubles print with %.17g so files round-trip exactly.
struct SweepRow {
  double load = 0.0;
  std::string scheme;
  std::uint64_t seed = 0;
  bool feasible = true;
  double analytic_delay = 0.0;
  double sim_delay = 0.0;
  double sim_stderr = 0.0;
  int iterations = 0;
};

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_percell_csv(std::ostream& os, const AllocationRecord& rec,
                       const SimResult* sim = nullptr);
void write_cdf_csv(std::ostream& os, const SimResult& sim);
void write_power_csv(std::ostream& os, const PowerControlResult& res);

}  // namespace specsim
