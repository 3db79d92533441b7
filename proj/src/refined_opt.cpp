#include "specsim/refined_opt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>

#include "specsim/baselines.hpp"
#include "specsim/kernels.hpp"
#include "specsim/refined.hpp"
#include "specsim/simplex_opt.hpp"

namespace specsim {

namespace {

constexpr double kFdFloor = 1e-9;
constexpr double kGapFloor = 1e-6;  // FD gradients cannot certify tighter
constexpr double kInfeasiblePenalty = 1e12;

double canonical(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// The solver works on the nonempty patterns only; pattern 0 is pinned at 0.
std::vector<double> to_full(const std::vector<double>& y) {
  std::vector<double> x(y.size() + 1, 0.0);
  std::copy(y.begin(), y.end(), x.begin() + 1);
  return x;
}

struct BarrierObjective {
  const EfficiencyTable& tbl;
  const std::vector<double>& lambda;
  std::vector<int> loaded;
  double lam_max = 0.0;
  double weight = 0.0;

  double operator()(const std::vector<double>& y) const {
    const auto x = to_full(y);
    double barrier = 0.0, violation = 0.0;
    for (int i : loaded) {
      const double slack =
          kernels::dot(tbl.row(i).data(), x.data(), x.size()) - lambda[i];
      if (slack <= 0) {
        violation += -slack / lam_max;
      } else if (weight > 0) {
        barrier -= weight * std::log(slack);
      }
    }
    if (violation > 0) return kInfeasiblePenalty * (1.0 + violation);
    const double base = refined_objective_value(tbl, x, lambda);
    if (!std::isfinite(base)) return kInfeasiblePenalty;
    return base + barrier;
  }
};

void fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                 const std::vector<double>& y, double rel_step,
                 std::vector<double>& g) {
  g.assign(y.size(), 0.0);
  std::vector<double> yt = y;
  double f0 = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double h = std::max(rel_step * std::abs(y[k]), kFdFloor);
    if (y[k] < h) {
      if (std::isnan(f0)) f0 = f(y);
      yt[k] = y[k] + h;
      g[k] = (f(yt) - f0) / h;
    } else {
      yt[k] = y[k] + h;
      const double fp = f(yt);
      yt[k] = y[k] - h;
      g[k] = (fp - f(yt)) / (2 * h);
    }
    yt[k] = y[k];
  }
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= double(g.size());
  for (double& v : g) v -= mean;
}

struct StartResult {
  std::vector<double> y;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

StartResult run_start(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                      std::vector<double> y, const SolveOptions& opt) {
  BarrierObjective obj{tbl, lambda, {}, 0.0, 0.0};
  for (int i = 0; i < tbl.n; ++i) {
    if (lambda[i] > 0) {
      obj.loaded.push_back(i);
      obj.lam_max = std::max(obj.lam_max, lambda[i]);
    }
  }
  const auto fd = [&](const std::vector<double>& p, std::vector<double>& g) {
    fd_gradient([&](const std::vector<double>& q) { return obj(q); }, p, opt.fd_step, g);
  };
  const auto fn = [&](const std::vector<double>& p) { return obj(p); };

  obj.weight = 0.0;
  const double scale = std::max(1.0, std::abs(obj(y)));
  const double etol = std::max(opt.tol, kGapFloor);
  const int total = std::max(50, std::min(opt.max_iters, 2000));
  int remaining = total;

  StartResult res;
  for (double w = opt.barrier_init * scale; w >= opt.barrier_floor * scale;
       w *= opt.barrier_decay) {
    obj.weight = w;
    MinimizeOptions mo;
    mo.tol = std::max(etol, 1e-3);
    mo.max_iters = std::min(remaining - 25, std::max(25, total / 10));
    if (mo.max_iters <= 0) break;
    auto r = minimize_on_simplex(fn, fd, y, mo);
    y = std::move(r.y);
    remaining -= r.iterations;
    res.iterations += r.iterations;
  }
  obj.weight = 0.0;
  MinimizeOptions mo;
  mo.tol = etol;
  mo.max_iters = std::max(remaining, 25);
  auto r = minimize_on_simplex(fn, fd, y, mo);
  res.iterations += r.iterations;
  res.y = std::move(r.y);
  res.gap = r.gap;
  res.converged = r.converged;
  res.stalled = r.stalled;
  res.value = refined_objective_value(tbl, to_full(res.y), lambda);
  return res;
}

}  // namespace

RefinedEval refined_objective_and_gradient(const EfficiencyTable& tbl,
                                           const std::vector<double>& x,
                                           const std::vector<double>& lambda,
                                           double fd_step) {
  if (x.size() != pattern_count(tbl.n)) {
    throw std::invalid_argument("allocation vector does not match the table");
  }
  BarrierObjective obj{tbl, lambda, {}, 0.0, 0.0};
  for (int i = 0; i < tbl.n; ++i) {
    if (lambda[i] > 0) {
      obj.loaded.push_back(i);
      obj.lam_max = std::max(obj.lam_max, lambda[i]);
    }
  }
  std::vector<double> y(x.begin() + 1, x.end());
  RefinedEval ev;
  ev.value = obj(y);
  ev.infeasible = ev.value >= kInfeasiblePenalty;
  std::vector<double> g;
  fd_gradient([&](const std::vector<double>& q) { return obj(q); }, y, fd_step, g);
  ev.gradient.assign(x.size(), 0.0);
  std::copy(g.begin(), g.end(), ev.gradient.begin() + 1);
  return ev;
}

AllocResult solve_refined(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                          const SolveOptions& opt) {
  const int n = tbl.n;
  if (static_cast<int>(lambda.size()) != n) {
    throw std::invalid_argument("arrival vector does not match the table");
  }
  double lam_sum = 0.0;
  for (double v : lambda) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw std::invalid_argument("arrival rates must be finite and nonnegative");
    }
    lam_sum += v;
  }

  if (lam_sum <= 0) {
    AllocResult res;
    res.x = full_reuse_allocation(n);
    res.report = refined_delay(tbl, res.x, lambda);
    res.trace.converged = true;
    return res;
  }

  // Throws with the throughput margin when the traffic is not servable; the
  // refined problem shares the conservative feasible region.
  const Allocation lp_point = find_feasible(tbl, lambda);

  const auto feasible_start = [&](const Allocation& a) -> std::optional<std::vector<double>> {
    std::vector<double> y(a.x.begin() + 1, a.x.end());
    if (std::isfinite(refined_objective_value(tbl, a.x, lambda))) return y;
    return std::nullopt;
  };

  std::mt19937_64 rng(opt.seed);
  const auto dirichlet = [&]() {
    Allocation a;
    a.n = n;
    a.x.assign(pattern_count(n), 0.0);
    double total = 0.0;
    for (std::size_t b = 1; b < a.x.size(); ++b) {
      a.x[b] = -std::log1p(-canonical(rng));
      total += a.x[b];
    }
    for (double& v : a.x) v /= total;
    return a;
  };

  using Producer = std::function<std::optional<std::vector<double>>()>;
  std::vector<Producer> producers;
  if (!opt.warm_start.empty()) {
    producers.push_back([&]() -> std::optional<std::vector<double>> {
      if (opt.warm_start.size() != pattern_count(n)) return std::nullopt;
      Allocation a;
      a.n = n;
      a.x = opt.warm_start;
      return feasible_start(a);
    });
  }
  producers.push_back([&] { return feasible_start(full_reuse_allocation(n)); });
  producers.push_back([&]() -> std::optional<std::vector<double>> {
    try {
      return feasible_start(solve_conservative_candidates(tbl, lambda, opt).x);
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
  });
  producers.push_back([&] { return feasible_start(uniform_orthogonal_allocation(n)); });
  producers.push_back([&] { return feasible_start(dirichlet()); });
  producers.push_back([&] { return feasible_start(dirichlet()); });

  std::vector<std::vector<double>> starts;
  const int want = std::max(1, opt.restarts);
  for (const auto& make : producers) {
    if (static_cast<int>(starts.size()) >= want) break;
    if (auto y = make()) starts.push_back(std::move(*y));
  }
  if (starts.empty()) starts.push_back(std::vector<double>(lp_point.x.begin() + 1, lp_point.x.end()));

  std::vector<StartResult> runs;
  for (auto& y : starts) runs.push_back(run_start(tbl, lambda, std::move(y), opt));

  int best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    if (runs[k].value < runs[best].value) best = static_cast<int>(k);
  }
  if (!std::isfinite(runs[best].value)) {
    throw SolverError("refined solver failed from every start");
  }

  AllocResult res;
  res.x.n = n;
  res.x.x = to_full(runs[best].y);
  double total = 0.0;
  for (double& v : res.x.x) {
    if (v <= 1e-12) v = 0.0;
    total += v;
  }
  for (double& v : res.x.x) v /= total;
  res.x.validate();
  res.report = refined_delay(tbl, res.x, lambda);

  res.trace.iterations = runs[best].iterations;
  res.trace.kkt = runs[best].gap;
  res.trace.converged = runs[best].converged;
  res.trace.stalled = runs[best].stalled;
  int agree = 0;
  const double band = 1e-6 * std::max(1.0, std::abs(runs[best].value));
  for (const auto& r : runs) {
    res.trace.objective.push_back(r.value);
    if (std::isfinite(r.value) && r.value - runs[best].value <= band) ++agree;
  }
  res.trace.restart_agreement = double(agree) / double(runs.size());
  return res;
}

}  // namespace specsim
