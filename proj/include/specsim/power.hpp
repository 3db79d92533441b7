#pragma once

#include <cstdint>
#include <vector>

#include "specsim/allocation.hpp"
#include "specsim/conservative.hpp"
#include "specsim/scenario.hpp"
#include "specsim/schemes.hpp"

namespace specsim {

// Power budget each BTS may spend across the whole band; by default what it
// spends today, tx_psd * bandwidth.
std::vector<double> default_power_budgets(const Scenario& sc);

// Concentrates each budget on the bandwidth the allocation actually grants:
// cell i radiates budget_i / w_i over its w_i = W * sum_{B ni i} x_B hertz.
// A loaded cell granted no bandwidth is an error; an idle one just goes
// silent. Geometry and demand are untouched.
Scenario update_efficiencies(const Scenario& sc, const Allocation& x,
                             const std::vector<double>& budgets,
                             const std::vector<double>& lambda);

struct PowerControlOptions {
  Scheme scheme = Scheme::kConservative;  // kConservative or kRefined
  int max_iters = 20;
  double tv_converged = 1e-4;  // allocation movement below this ends the loop
  double tv_cycle = 1e-6;      // distance to any earlier allocation that counts as a cycle
  long long sim_horizon = 0;   // 0 skips the per-step simulation
  std::uint64_t seed = 1;
  SolveOptions solver;
};

// One row per half-step: 'a' rows follow an allocation solve, 'p' rows
// re-evaluate the previous allocation right after the power update.
struct PowerStep {
  int iteration = 0;
  char phase = 'a';
  double analytic_delay = 0.0;
  double simulated_delay = 0.0;  // NaN unless sim_horizon > 0
  double tv_change = 0.0;        // NaN on 'p' rows and the first 'a' row
};

struct PowerControlResult {
  std::vector<PowerStep> steps;
  Allocation x;
  Scenario scenario;  // carries the final power densities
  bool converged = false;
  bool cycled = false;
  int iterations = 0;
};

// Alternates between solving the allocation for fixed powers and pouring
// each budget over the granted bandwidth. The joint problem is nonconvex,
// so the loop may settle or orbit; both exits are reported rather than
// treated as errors.
PowerControlResult alternate_power_control(const Scenario& sc,
                                           const std::vector<double>& lambda,
                                           const PowerControlOptions& opt = {});

}  // namespace specsim
