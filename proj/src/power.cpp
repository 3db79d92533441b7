#include "specsim/power.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "specsim/queue_sim.hpp"
#include "specsim/refined.hpp"

namespace specsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double analytic_delay(Scheme s, const EfficiencyTable& tbl, const Allocation& x,
                      const std::vector<double>& lambda) {
  try {
    if (s == Scheme::kRefined) return refined_delay(tbl, x, lambda).weighted;
    return conservative_delay(tbl, x, lambda).weighted;
  } catch (const InfeasibleError&) {
    return kInf;  // the half-step left this allocation unstable
  }
}

}  // namespace

std::vector<double> default_power_budgets(const Scenario& sc) {
  std::vector<double> b(sc.cell_count());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = sc.tx_psd[i] * sc.bandwidth_hz;
  return b;
}

Scenario update_efficiencies(const Scenario& sc, const Allocation& x,
                             const std::vector<double>& budgets,
                             const std::vector<double>& lambda) {
  const int n = static_cast<int>(sc.cell_count());
  if (x.n != n || budgets.size() != std::size_t(n) || lambda.size() != std::size_t(n)) {
    throw std::invalid_argument("allocation, budgets, and arrivals must match the scenario");
  }
  Scenario out = sc;
  for (int i = 0; i < n; ++i) {
    double share = 0.0;
    for (Pattern b = 0; b < pattern_count(n); ++b) {
      if (contains(b, i)) share += x.x[b];
    }
    const double w = share * sc.bandwidth_hz;
    if (w <= 0) {
      if (lambda[i] > 0) {
        throw std::invalid_argument("cell " + std::to_string(i + 1) +
                                    " carries traffic but was granted no bandwidth");
      }
      out.tx_psd[i] = 0.0;
    } else {
      out.tx_psd[i] = budgets[i] / w;
    }
  }
  return out;
}

PowerControlResult alternate_power_control(const Scenario& sc,
                                           const std::vector<double>& lambda,
                                           const PowerControlOptions& opt) {
  const auto budgets = default_power_budgets(sc);

  PowerControlResult res;
  res.scenario = sc;
  auto tbl = build_table(sc);

  const auto record = [&](int iter, char phase, const EfficiencyTable& t,
                          const Allocation& x, double analytic, double tv) {
    PowerStep st;
    st.iteration = iter;
    st.phase = phase;
    st.analytic_delay = analytic;
    st.tv_change = tv;
    st.simulated_delay = kNaN;
    if (opt.sim_horizon > 0) {
      SimOptions so;
      so.horizon = opt.sim_horizon;
      so.seed = opt.seed + res.steps.size();
      st.simulated_delay = simulate(t, x, lambda, so).weighted_mean();
    }
    res.steps.push_back(st);
  };

  auto first = solve_scheme(opt.scheme, tbl, lambda, opt.solver);
  res.x = std::move(first.x);
  record(0, 'a', tbl, res.x, first.report.weighted, kNaN);

  std::vector<std::vector<double>> history{res.x.x};
  for (int k = 1; k <= opt.max_iters; ++k) {
    res.iterations = k;
    res.scenario = update_efficiencies(sc, res.x, budgets, lambda);
    tbl = build_table(res.scenario);
    record(k, 'p', tbl, res.x, analytic_delay(opt.scheme, tbl, res.x, lambda), kNaN);

    SolveOptions sopt = opt.solver;
    if (opt.scheme == Scheme::kRefined) sopt.warm_start = res.x.x;
    auto next = solve_scheme(opt.scheme, tbl, lambda, sopt);
    const double tv = tv_distance(next.x, res.x);
    record(k, 'a', tbl, next.x, next.report.weighted, tv);
    res.x = std::move(next.x);

    if (tv < opt.tv_converged) {
      res.converged = true;
      break;
    }
    bool seen = false;
    for (const auto& h : history) {
      Allocation prev;
      prev.n = res.x.n;
      prev.x = h;
      if (tv_distance(res.x, prev) < opt.tv_cycle) {
        seen = true;
        break;
      }
    }
    if (seen) {
      res.cycled = true;
      break;
    }
    history.push_back(res.x.x);
  }
  return res;
}

}  // namespace specsim
