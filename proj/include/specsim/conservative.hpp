#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "specsim/allocation.hpp"
#include "specsim/efficiency.hpp"

namespace specsim {

// Margin used wherever a strict inequality r_i > lambda_i has to be decided
// numerically: the requirement becomes r_i >= lambda_i + margin. Zero when
// there is no traffic at all (the constraint is vacuous then).
double stability_margin(const std::vector<double>& lambda);

// Demanded traffic cannot be served. rho_star, when finite, is the largest
// scaling of the requested arrival vector that stays serviceable.
struct InfeasibleError : std::runtime_error {
  double rho_star;
  InfeasibleError(const std::string& what, double rho)
      : std::runtime_error(what), rho_star(rho) {}
};

// An optimizer gave up before reaching its tolerance.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Worst-case service rates r_i = sum_B s[i,B] x_B: every pattern granting
// cell i bandwidth is degraded as if all its members were always busy.
std::vector<double> conservative_rates(const EfficiencyTable& tbl, const Allocation& x);

struct DelayReport {
  std::vector<double> lambda;
  std::vector<double> rates;  // worst-case rates r_i
  std::vector<double> t;      // per-cell mean sojourn (s); NaN when undefined
  double weighted = 0.0;      // arrival-weighted network mean
};

// M/M/1 sojourn times 1/(r_i - lambda_i) under the worst-case rates.
// Throws InfeasibleError naming the first cell whose traffic meets or
// exceeds its rate. Cells with zero traffic report 1/r_i (their queue is
// empty; the value is the bare service time) and carry zero weight.
DelayReport conservative_delay(const EfficiencyTable& tbl, const Allocation& x,
                               const std::vector<double>& lambda);

struct SolveOptions {
  double tol = 1e-8;           // relative stationarity gap
  int max_iters = 20000;       // projected-gradient iteration budget
  double barrier_init = 1e-4;  // starting barrier weight relative to |f|
  double barrier_decay = 0.1;
  double barrier_floor = 1e-10;
  int restarts = 5;            // multistart count (refined solver only)
  double fd_step = 1e-6;       // relative finite-difference step (refined solver)
  std::uint64_t seed = 1;      // seeds the random restarts
  bool record_trace = false;
  // Optional full-length allocation tried as the first start by the refined
  // solver (ignored elsewhere); lets an outer loop warm-start a re-solve.
  std::vector<double> warm_start;
};

struct SolveTrace {
  int iterations = 0;  // candidate rounds, or PG iterations for direct solves
  double kkt = 0.0;    // stationarity gap at the returned point
  bool converged = false;
  bool stalled = false;
  std::vector<double> objective;     // per-round values when record_trace is set
  std::vector<int> candidate_sizes;  // candidate-set growth, where applicable
  double restart_agreement = 1.0;    // fraction of starts matching the best
};

struct AllocResult {
  Allocation x;
  DelayReport report;
  SolveTrace trace;
};

// True when some allocation serves lambda with the strict margin. This is
// the membership test for the achievable-traffic region.
bool region_contains(const EfficiencyTable& tbl, const std::vector<double>& lambda);

// A feasible allocation from the phase-1 LP; as a basic feasible solution it
// uses at most n+1 patterns. Throws InfeasibleError carrying the bisected
// feasibility limit when the traffic is outside the region.
Allocation find_feasible(const EfficiencyTable& tbl, const std::vector<double>& lambda);

// Minimizes the arrival-weighted mean sojourn over the full pattern simplex
// (a convex problem). The optimum is reported with at most n support
// patterns; when the descent lands on a wider representation of the same
// rate point, mass is rotated onto a face without changing the rates.
AllocResult solve_conservative(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                               const SolveOptions& opt = {});

// Candidate-set variant for large pattern spaces: repeatedly solve the
// problem restricted to a small set, then add the n patterns with the most
// negative reduced gradient (ties broken toward the lower bitmask) until the
// set stops growing. Reaches the same optimum as solve_conservative; the
// trace records objective and candidate-set size per round.
AllocResult solve_conservative_candidates(const EfficiencyTable& tbl,
                                          const std::vector<double>& lambda,
                                          const SolveOptions& opt = {});

// Gradient of the conservative objective at x over every pattern (index 0,
// the empty pattern, gets 0). Exposed for verification.
std::vector<double> conservative_gradient(const EfficiencyTable& tbl, const Allocation& x,
                                          const std::vector<double>& lambda);

namespace detail {

struct RestrictedSolve {
  std::vector<double> y;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

// Barrier-then-pure projected-gradient solve of the conservative objective
// restricted to the given pattern list. y0 must be feasible. Shared by both
// conservative solvers and the orthogonal baseline.
RestrictedSolve solve_restricted(const EfficiencyTable& tbl,
                                 const std::vector<double>& lambda,
                                 const std::vector<Pattern>& patterns,
                                 std::vector<double> y0, const SolveOptions& opt);

}  // namespace detail

}  // namespace specsim
