#include "CLI11.hpp"
#include "specsim/cli_cmds.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spectrum allocation and coupled-queue analysis for small cell networks"};
  app.require_subcommand(1);

  specsim::AllocateArgs alloc;
  auto* ca = app.add_subcommand("allocate", "Solve or evaluate one allocation");
  ca->add_option("-c,--config", alloc.config, "experiment config (JSON)")->required();
  ca->add_option("-s,--scheme", alloc.scheme,
                 "full-reuse | orthogonal | conservative | conservative-direct | refined");
  ca->add_option("--from-allocation", alloc.from_allocation,
                 "evaluate a stored allocation record instead of solving");
  ca->add_option("-o,--out", alloc.out, "allocation record path (stdout if omitted)");
  ca->add_option("--percell-csv", alloc.percell_csv, "per-cell table output");
  ca->add_option("--cdf-csv", alloc.cdf_csv, "queue-length CDF output (needs --sim-horizon)");
  ca->add_flag("--bounds", alloc.with_bounds, "attach sojourn bounds to the record");
  ca->add_option("--sim-horizon", alloc.sim_horizon, "simulation steps (0 = no simulation)");
  ca->add_option("--seed", alloc.seed, "solver and simulation seed");
  ca->add_option("--tol", alloc.tol, "solver stationarity tolerance");
  ca->add_option("--restarts", alloc.restarts, "multistart count (refined scheme)");
  ca->add_option("--max-iters", alloc.max_iters, "solver iteration budget");

  specsim::SweepArgs sweep;
  auto* cs = app.add_subcommand("sweep", "Grid of loads x schemes x seeds");
  cs->add_option("-c,--config", sweep.config, "experiment config (JSON)")->required();
  cs->add_option("-l,--load", sweep.loads, "mean arrival rate per point")->required();
  cs->add_option("-s,--scheme", sweep.schemes, "schemes to run")->required();
  cs->add_option("--seed", sweep.seeds, "simulation seeds (one row each)");
  cs->add_option("-o,--out", sweep.out_csv, "summary CSV path (stdout if omitted)");
  cs->add_option("--sim-horizon", sweep.sim_horizon, "simulation steps (0 = no simulation)");
  cs->add_option("-j,--workers", sweep.workers, "worker threads (default SPECSIM_WORKERS or 1)");
  cs->add_option("--tol", sweep.tol, "solver stationarity tolerance");
  cs->add_option("--restarts", sweep.restarts, "multistart count (refined scheme)");

  specsim::PowerArgs power;
  auto* cp = app.add_subcommand("powerctl", "Alternate allocation and power updates");
  cp->add_option("-c,--config", power.config, "experiment config (JSON)")->required();
  cp->add_option("-s,--scheme", power.scheme, "conservative | refined");
  cp->add_option("-o,--out", power.out_csv, "trajectory CSV path (stdout if omitted)");
  cp->add_option("--out-record", power.out_record, "final allocation record path");
  cp->add_option("--max-iters", power.max_iters, "alternation rounds");
  cp->add_option("--sim-horizon", power.sim_horizon, "simulate each half-step this long");
  cp->add_option("--seed", power.seed, "solver and simulation seed");
  cp->add_option("--tol", power.tol, "solver stationarity tolerance");
  cp->add_option("--restarts", power.restarts, "multistart count (refined scheme)");
  cp->add_option("--solve-iters", power.solve_iters, "iteration budget per re-solve");

  CLI11_PARSE(app, argc, argv);

  if (ca->parsed()) return specsim::cmd_allocate(alloc);
  if (cs->parsed()) return specsim::cmd_sweep(sweep);
  return specsim::cmd_powerctl(power);
}
