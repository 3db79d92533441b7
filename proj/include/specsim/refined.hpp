#pragma once

#include <vector>

#include "specsim/allocation.hpp"
#include "specsim/conservative.hpp"
#include "specsim/efficiency.hpp"

namespace specsim {

// r[i * 2^n + A] is the service rate of cell i while exactly the cells in A
// have work queued. Entries with i outside A are zero.
struct RateTable {
  int n = 0;
  std::vector<double> r;

  double at(int i, Pattern a) const { return r[(std::size_t(i) << n) + a]; }
};

// Busy-set-aware rates r_{i,A} = sum_B s[i, B & A] x_B: patterns lose only
// the members that are actually busy, so an idle interferer returns its
// share of the band at full quality. Always r_{i,A} >= r_{i,N}, the
// conservative rate, and shrinking A can only help.
RateTable refined_rates(const EfficiencyTable& tbl, const Allocation& x);

// Generator of the busy-set birth-death chain: A -> A + {i} at lambda_i and
// A -> A - {i} at r_{i,A} - lambda_i, the M/M/1-style net drain of queue i
// while the busy set holds at A. Requires stability (r_{i,N} > lambda_i for
// every loaded cell) so the drain rates are positive, and n <= 12 since the
// matrix is dense 2^n x 2^n.
struct LumpedChain {
  int n = 0;
  std::vector<double> q;  // row-major 2^n x 2^n

  double at(Pattern a, Pattern b) const { return q[(std::size_t(a) << n) + b]; }
};
LumpedChain lumped_generator(const RateTable& rates, const std::vector<double>& lambda);

// Stationary distribution of the lumped chain. States that cannot be
// reached from the all-idle set (they exist when some cell has no traffic)
// get probability zero and the rest is solved by dense LU with one balance
// equation swapped for normalization. The residual ||p Q||_inf is verified
// to 1e-8 and the result is clean: nonnegative, summing to one.
std::vector<double> steady_state(const LumpedChain& chain);

// Mean sojourn per cell with the busy-set correction: each busy set A
// carries its stationary share of cell i's backlog, served at r_{i,A}.
// Cells with zero traffic report NaN (no packets, no sojourn) and zero
// weight. Throws InfeasibleError outside the stable region.
DelayReport refined_delay(const EfficiencyTable& tbl, const Allocation& x,
                          const std::vector<double>& lambda);

// Arrival-weighted mean of the refined sojourns at an arbitrary nonnegative
// allocation vector (not necessarily normalized), or quiet NaN when x
// violates stability. The cheap entry point for optimizer loops: no
// reporting, no exceptions on infeasibility.
double refined_objective_value(const EfficiencyTable& tbl, const std::vector<double>& x,
                               const std::vector<double>& lambda);

}  // namespace specsim
