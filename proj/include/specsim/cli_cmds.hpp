#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace specsim {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;       // bad config, bad arguments, I/O
inline constexpr int kExitInfeasible = 2;  // traffic outside the achievable region
inline constexpr int kExitSolver = 3;      // an optimizer gave up

struct AllocateArgs {
  std::string config;
  std::string scheme;           // empty: conservative, or the record's scheme
  std::string from_allocation;  // evaluate this stored record instead of solving
  std::string out;              // record JSON; stdout when empty
  std::string percell_csv;
  std::string cdf_csv;  // requires sim_horizon > 0
  bool with_bounds = false;
  long long sim_horizon = 0;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int restarts = 5;
  int max_iters = 20000;
};

struct SweepArgs {
  std::string config;
  std::vector<double> loads;  // mean_rate values, spread proportionally
  std::vector<std::string> schemes;
  std::vector<std::uint64_t> seeds = {1};  // one simulation per seed per point
  std::string out_csv;  // stdout when empty
  long long sim_horizon = 0;
  int workers = 0;  // 0: SPECSIM_WORKERS env var, else 1
  double tol = 1e-8;
  int restarts = 5;
};

struct PowerArgs {
  std::string config;
  std::string scheme = "conservative";
  std::string out_csv;     // trajectory; stdout when empty
  std::string out_record;  // optional final allocation record
  int max_iters = 20;
  long long sim_horizon = 0;
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int restarts = 1;
  int solve_iters = 400;  // per-solve budget inside the loop
};

// Each command maps its failures onto the exit codes above and writes the
// reason to stderr; they never throw.
int cmd_allocate(const AllocateArgs& args);
int cmd_sweep(const SweepArgs& args);
int cmd_powerctl(const PowerArgs& args);

}  // namespace specsim
