#pragma once

#include <vector>

#include "specsim/allocation.hpp"
#include "specsim/conservative.hpp"
#include "specsim/efficiency.hpp"
#include "specsim/refined.hpp"

namespace specsim {

// Per-cell mean sojourn bounds. Cells with no traffic carry NaN, matching
// DelayReport.
struct BoundPair {
  std::vector<double> lower;
  std::vector<double> upper;
};

// Crudest sandwich: the busy-set service rate of cell i lies between
// r_{i,{i}} (alone) and r_{i,N} (everyone transmitting), so treating the
// queue as M/M/1 at either extreme brackets the true mean sojourn.
BoundPair first_degree_bounds(const RateTable& rates, const std::vector<double>& lambda);

// Tighter sandwich from a product-form surrogate for the busy set. Each
// other cell j is busy independently with probability lambda_j / r_j, where
// r_j is that cell's worst rate (for the upper bound) or best rate (for the
// lower bound); averaging the conditional M/M/1 answers over that law gives
// the bound. Throws InfeasibleError when some loaded cell is unstable.
BoundPair second_degree_bounds(const RateTable& rates, const std::vector<double>& lambda);

// Both pairs plus the model value they bracket, computed off one rate table.
struct DelayBounds {
  std::vector<double> lower1, lower2, upper2, upper1;
  double weighted_lower1 = 0, weighted_lower2 = 0, weighted_upper2 = 0, weighted_upper1 = 0;
};

DelayBounds delay_bounds(const EfficiencyTable& tbl, const Allocation& x,
                         const std::vector<double>& lambda);

}  // namespace specsim
