#pragma once

#include <cstdint>
#include <vector>

#include "specsim/allocation.hpp"
#include "specsim/efficiency.hpp"

namespace specsim {

struct SimOptions {
  long long horizon = 100000;  // uniformized steps
  std::uint64_t seed = 1;
  double warmup = 0.10;  // fraction of the horizon discarded, by arrival step
  int batches = 20;      // batch-means groups for the standard errors
};

// Event-by-event run of the coupled queues. The chain is uniformized at
// rate sum(lambda) + sum_i r_{i,{i}}, so wall-clock time advances by
// step_seconds per step and every recorded sojourn is at least one step.
struct SimResult {
  std::vector<double> lambda;
  std::vector<double> mean_sojourn;    // per cell, NaN when nothing completed
  std::vector<double> stderr_sojourn;  // batch-means standard error
  std::vector<double> utilization;     // busy fraction after warmup
  std::vector<long long> served;       // completed jobs counted in the stats
  std::vector<std::vector<double>> queue_cdf;  // P[queue length <= k] per cell
  std::vector<double> pooled_cdf;
  double pooled_mean = 0.0;
  double pooled_stderr = 0.0;
  double step_seconds = 0.0;
  bool unstable_input = false;  // some loaded cell exceeds its all-busy rate

  double weighted_mean() const { return pooled_mean; }
  double weighted_stderr() const { return pooled_stderr; }
};

SimResult simulate(const EfficiencyTable& tbl, const Allocation& x,
                   const std::vector<double>& lambda, const SimOptions& opt = {});

// Stationary mean sojourns from the full joint chain, truncated at `cap`
// jobs per loaded cell (arrivals beyond it are dropped). Only practical for
// a couple of loaded cells. Throws std::invalid_argument when the truncated
// states still hold more than 1e-8 probability, i.e. the cap is too small
// to trust the answer.
struct ExactDelay {
  std::vector<double> t;  // per cell, NaN where lambda is zero
  double weighted = 0.0;
  double truncation_mass = 0.0;
  int cap = 0;
};

ExactDelay exact_small_delay(const EfficiencyTable& tbl, const Allocation& x,
                             const std::vector<double>& lambda, int cap);

// Runs the true system and a copy whose service rates are frozen at the
// all-busy floor on one shared random sequence, checking after every step
// that the true queues never exceed the frozen ones. The frozen copy is the
// conservative model's queue, so domination holding pathwise is the ordering
// the worst-case analysis relies on.
struct CouplingCheck {
  bool dominated = true;
  long long first_violation = -1;
  long long steps = 0;
};

CouplingCheck coupled_worstcase_check(const EfficiencyTable& tbl, const Allocation& x,
                                      const std::vector<double>& lambda,
                                      long long horizon, std::uint64_t seed);

}  // namespace specsim
