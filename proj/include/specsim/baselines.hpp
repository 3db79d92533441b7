#pragma once

#include <vector>

#include "specsim/conservative.hpp"

namespace specsim {

// Optimal split of the band among singleton patterns only (every cell gets
// a private slice). Convex in n variables; solved with the shared
// projected-gradient machinery restricted to the singletons. Throws
// InfeasibleError carrying the orthogonal feasibility limit when
// sum_i lambda_i / s_{i,{i}} >= 1.
AllocResult solve_orthogonal(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                             const SolveOptions& opt = {});

// Largest rho such that rho * lambda is still inside the achievable-traffic
// region, found by bisection on the LP membership test. tol is absolute
// in rho. Throws std::invalid_argument when lambda is all zero.
double throughput_margin(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                         double tol = 1e-6);

}  // namespace specsim
