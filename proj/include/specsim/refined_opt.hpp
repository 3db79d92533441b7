#pragma once

#include <vector>

#include "specsim/conservative.hpp"
#include "specsim/efficiency.hpp"

namespace specsim {

// Objective and finite-difference gradient of the refined (busy-set) mean
// delay at x, which may sit slightly off the simplex. Central differences
// with relative step fd_step (floored at 1e-9), one-sided when a coordinate
// is too close to zero. Infeasible points come back as a large finite value
// scaled by the constraint violation instead of infinity, so steps that
// brush the stability boundary still see a usable descent direction;
// `infeasible` reports when that happened at the center point.
struct RefinedEval {
  double value = 0.0;
  std::vector<double> gradient;
  bool infeasible = false;
};

RefinedEval refined_objective_and_gradient(const EfficiencyTable& tbl,
                                           const std::vector<double>& x,
                                           const std::vector<double>& lambda,
                                           double fd_step);

// Minimizes the refined mean delay over allocations. The feasible region is
// the same as for the conservative problem (all-busy rates above the arrival
// rates), but the objective is only piecewise smooth and not convex, so the
// solver multi-starts: full reuse, the conservative optimum, uniform
// orthogonal, and seeded Dirichlet draws, keeping whichever start wins.
// trace.restart_agreement is the fraction of starts that landed within 1e-6
// of the winner; trace.objective lists the per-start finals. Gradients are
// finite differences, so the stationarity test bottoms out near 1e-6
// regardless of a tighter opt.tol. Throws InfeasibleError (with the
// throughput margin) when no allocation can stabilize the traffic, and
// SolverError when every start fails.
AllocResult solve_refined(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                          const SolveOptions& opt = {});

}  // namespace specsim
