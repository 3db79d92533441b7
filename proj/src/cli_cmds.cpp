#include "specsim/cli_cmds.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <thread>

#include "specsim/io.hpp"
#include "specsim/schemes.hpp"

namespace specsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what();
    if (std::isfinite(e.rho_star)) std::cerr << " (feasible up to scale " << e.rho_star << ")";
    std::cerr << '\n';
    return kExitInfeasible;
  } catch (const SolverError& e) {
    std::cerr << "solver: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  fn(out);
}

int worker_count(int requested, std::size_t tasks) {
  int w = requested;
  if (w <= 0) {
    if (const char* env = std::getenv("SPECSIM_WORKERS")) w = std::atoi(env);
  }
  if (w <= 0) w = 1;
  return static_cast<int>(std::min<std::size_t>(w, std::max<std::size_t>(tasks, 1)));
}

}  // namespace

int cmd_allocate(const AllocateArgs& args) {
  return guard([&] {
    const Experiment ex = load_experiment(args.config);
    const EfficiencyTable tbl = build_table(ex.scenario);
    const std::vector<double> lambda = resolve_traffic(ex, tbl);

    AllocationRecord rec;
    Allocation x;
    if (!args.from_allocation.empty()) {
      const AllocationRecord stored = load_record(args.from_allocation);
      if (stored.x.size() != pattern_count(tbl.n)) {
        throw ConfigError("stored allocation is for a different cell count");
      }
      x.n = tbl.n;
      x.x = stored.x;
      x.validate();
      rec.scheme = args.scheme.empty() ? stored.scheme : args.scheme;
      const Scheme s = scheme_from_name(rec.scheme.empty() ? "conservative" : rec.scheme);
      rec.report = s == Scheme::kRefined ? refined_delay(tbl, x, lambda)
                                         : conservative_delay(tbl, x, lambda);
      rec.trace.converged = true;
    } else {
      const Scheme s = scheme_from_name(args.scheme.empty() ? "conservative" : args.scheme);
      SolveOptions opt;
      opt.tol = args.tol;
      opt.max_iters = args.max_iters;
      opt.restarts = args.restarts;
      opt.seed = args.seed;
      AllocResult res = solve_scheme(s, tbl, lambda, opt);
      x = std::move(res.x);
      rec.scheme = scheme_name(s);
      rec.report = std::move(res.report);
      rec.trace = res.trace;
    }
    rec.x = x.x;
    rec.lambda = lambda;
    rec.scenario = scenario_to_json(ex.scenario);
    if (args.with_bounds) rec.bounds = delay_bounds(tbl, x, lambda);

    SimResult sim;
    bool have_sim = false;
    if (args.sim_horizon > 0) {
      SimOptions so;
      so.horizon = args.sim_horizon;
      so.seed = args.seed;
      sim = simulate(tbl, x, lambda, so);
      have_sim = true;
    }
    if (!args.cdf_csv.empty() && !have_sim) {
      throw ConfigError("queue-length output needs --sim-horizon");
    }

    if (args.out.empty()) {
      std::cout << record_to_json(rec).dump(2) << '\n';
    } else {
      save_record(args.out, rec);
    }
    if (!args.percell_csv.empty()) {
      with_output(args.percell_csv,
                  [&](std::ostream& os) { write_percell_csv(os, rec, have_sim ? &sim : nullptr); });
    }
    if (!args.cdf_csv.empty()) {
      with_output(args.cdf_csv, [&](std::ostream& os) { write_cdf_csv(os, sim); });
    }
    return kExitOk;
  });
}

int cmd_sweep(const SweepArgs& args) {
  return guard([&] {
    if (args.loads.empty()) throw ConfigError("sweep needs at least one --load");
    if (args.schemes.empty()) throw ConfigError("sweep needs at least one --scheme");
    if (args.seeds.empty()) throw ConfigError("sweep needs at least one --seed");

    Experiment ex = load_experiment(args.config);
    const EfficiencyTable tbl = build_table(ex.scenario);

    std::vector<Scheme> schemes;
    for (const auto& name : args.schemes) schemes.push_back(scheme_from_name(name));

    std::vector<std::vector<double>> lam(args.loads.size());
    for (std::size_t li = 0; li < args.loads.size(); ++li) {
      Experiment point = ex;
      point.traffic = nlohmann::json{{"mean_rate", args.loads[li]}};
      lam[li] = resolve_traffic(point, tbl);
    }

    struct Task {
      std::size_t load_idx;
      std::size_t scheme_idx;
      std::size_t first_row;
    };
    std::vector<Task> tasks;
    for (std::size_t li = 0; li < args.loads.size(); ++li) {
      for (std::size_t si = 0; si < schemes.size(); ++si) {
        tasks.push_back({li, si, (li * schemes.size() + si) * args.seeds.size()});
      }
    }
    std::vector<SweepRow> rows(tasks.size() * args.seeds.size());

    std::atomic<std::size_t> next{0};
    const auto run_task = [&](const Task& t) {
      const auto& lambda = lam[t.load_idx];
      const Scheme s = schemes[t.scheme_idx];
      bool feasible = true;
      double analytic = kNaN;
      int iterations = 0;
      Allocation x;
      bool have_x = false;
      try {
        SolveOptions opt;
        opt.tol = args.tol;
        opt.restarts = args.restarts;
        AllocResult res = solve_scheme(s, tbl, lambda, opt);
        x = std::move(res.x);
        have_x = true;
        analytic = res.report.weighted;
        iterations = res.trace.iterations;
      } catch (const InfeasibleError&) {
        feasible = false;
        if (s == Scheme::kFullReuse) {
          x = full_reuse_allocation(tbl.n);  // still worth simulating the overload
          have_x = true;
        }
      } catch (const SolverError&) {
        feasible = false;
      }
      for (std::size_t ki = 0; ki < args.seeds.size(); ++ki) {
        SweepRow& row = rows[t.first_row + ki];
        row.load = args.loads[t.load_idx];
        row.scheme = scheme_name(s);
        row.seed = args.seeds[ki];
        row.feasible = feasible;
        row.analytic_delay = analytic;
        row.sim_delay = kNaN;
        row.sim_stderr = kNaN;
        row.iterations = iterations;
        if (args.sim_horizon > 0 && have_x) {
          SimOptions so;
          so.horizon = args.sim_horizon;
          so.seed = args.seeds[ki];
          const SimResult sim = simulate(tbl, x, lambda, so);
          row.sim_delay = sim.weighted_mean();
          row.sim_stderr = sim.weighted_stderr();
        }
      }
    };

    const int workers = worker_count(args.workers, tasks.size());
    if (workers <= 1) {
      for (const auto& t : tasks) run_task(t);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t k = next.fetch_add(1); k < tasks.size(); k = next.fetch_add(1)) {
            run_task(tasks[k]);
          }
        });
      }
      for (auto& th : pool) th.join();
    }

    with_output(args.out_csv, [&](std::ostream& os) { write_sweep_csv(os, rows); });
    return kExitOk;
  });
}

int cmd_powerctl(const PowerArgs& args) {
  return guard([&] {
    const Experiment ex = load_experiment(args.config);
    const EfficiencyTable tbl = build_table(ex.scenario);
    const std::vector<double> lambda = resolve_traffic(ex, tbl);

    PowerControlOptions opt;
    opt.scheme = scheme_from_name(args.scheme);
    opt.max_iters = args.max_iters;
    opt.sim_horizon = args.sim_horizon;
    opt.seed = args.seed;
    opt.solver.tol = args.tol;
    opt.solver.restarts = args.restarts;
    opt.solver.max_iters = args.solve_iters;

    const PowerControlResult res = alternate_power_control(ex.scenario, lambda, opt);
    with_output(args.out_csv, [&](std::ostream& os) { write_power_csv(os, res); });

    if (!args.out_record.empty()) {
      const EfficiencyTable final_tbl = build_table(res.scenario);
      AllocationRecord rec;
      rec.scheme = scheme_name(opt.scheme);
      rec.x = res.x.x;
      rec.lambda = lambda;
      rec.report = opt.scheme == Scheme::kRefined
                       ? refined_delay(final_tbl, res.x, lambda)
                       : conservative_delay(final_tbl, res.x, lambda);
      rec.trace.converged = res.converged;
      rec.trace.iterations = res.iterations;
      rec.scenario = scenario_to_json(res.scenario);
      save_record(args.out_record, rec);
    }
    return kExitOk;
  });
}

}  // namespace specsim
