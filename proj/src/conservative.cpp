#include "specsim/conservative.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "specsim/baselines.hpp"
#include "specsim/kernels.hpp"
#include "specsim/simplex_lp.hpp"
#include "specsim/simplex_opt.hpp"

namespace specsim {

double stability_margin(const std::vector<double>& lambda) {
  double mx = 0.0;
  for (double v : lambda) mx = std::max(mx, v);
  return 1e-9 * mx;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lambda(const EfficiencyTable& tbl, const std::vector<double>& lambda) {
  if (static_cast<int>(lambda.size()) != tbl.n) {
    throw std::invalid_argument("arrival vector does not match the table");
  }
  for (double v : lambda) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw std::invalid_argument("arrival rates must be finite and nonnegative");
    }
  }
}

// The conservative objective restricted to an explicit pattern list, with
// the rows of the efficiency table copied out once so the inner loops run
// on contiguous arrays.
struct Compact {
  const EfficiencyTable* tbl = nullptr;
  std::vector<double> lambda;
  double lambda_sum = 0.0;
  std::vector<Pattern> patterns;
  std::vector<std::vector<double>> rows;  // [cell][column]

  Compact(const EfficiencyTable& t, const std::vector<double>& lam,
          const std::vector<Pattern>& pats)
      : tbl(&t), lambda(lam), patterns(pats) {
    lambda_sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    rows.resize(t.n);
    for (int i = 0; i < t.n; ++i) {
      rows[i].resize(patterns.size());
      for (std::size_t j = 0; j < patterns.size(); ++j) {
        rows[i][j] = t.at(i, patterns[j]);
      }
    }
  }

  void rates(const std::vector<double>& y, std::vector<double>& r) const {
    r.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      r[i] = kernels::dot(rows[i].data(), y.data(), y.size());
    }
  }

  // Weighted mean sojourn plus an optional log barrier on the slack of the
  // loaded cells. +inf outside the stable region; the objective itself
  // diverges at the boundary, so the line search stays inside.
  double value(const std::vector<double>& y, double w,
               std::vector<double>& scratch_r) const {
    rates(y, scratch_r);
    double acc = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (lambda[i] <= 0) continue;
      const double slack = scratch_r[i] - lambda[i];
      if (slack <= 0) return kInf;
      acc += lambda[i] / slack;
      if (w > 0) acc -= w * std::log(slack) * lambda_sum;  // scaled with T
    }
    return acc / lambda_sum;
  }

  void gradient(const std::vector<double>& y, double w, std::vector<double>& g,
                std::vector<double>& scratch_r) const {
    rates(y, scratch_r);
    g.assign(y.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (lambda[i] <= 0) continue;
      const double slack = scratch_r[i] - lambda[i];
      double coeff = -lambda[i] / (slack * slack) / lambda_sum;
      if (w > 0) coeff -= w / slack;
      kernels::axpy(g.data(), coeff, rows[i].data(), y.size());
    }
  }
};

std::vector<Pattern> all_nonempty_patterns(int n) {
  std::vector<Pattern> out(pattern_count(n) - 1);
  for (std::size_t b = 1; b < pattern_count(n); ++b) out[b - 1] = static_cast<Pattern>(b);
  return out;
}

Allocation expand(int n, const std::vector<Pattern>& patterns,
                  const std::vector<double>& y) {
  Allocation x = Allocation::zeros(n);
  for (std::size_t j = 0; j < patterns.size(); ++j) x.x[patterns[j]] += y[j];
  return x;
}

// LP start for a restricted pattern set; nullopt when even the restricted
// region misses lambda. Maximizing the worst slack keeps the start well off
// the stability boundary, where the objective and its gradient explode.
std::optional<std::vector<double>> lp_start(const EfficiencyTable& tbl,
                                            const std::vector<double>& lambda,
                                            const std::vector<Pattern>& patterns) {
  const double margin = stability_margin(lambda);
  std::vector<std::vector<double>> C;
  std::vector<double> d;
  for (int i = 0; i < tbl.n; ++i) {
    if (lambda[i] <= 0) continue;  // an idle cell constrains nothing
    C.emplace_back(patterns.size());
    for (std::size_t j = 0; j < patterns.size(); ++j) C.back()[j] = tbl.at(i, patterns[j]);
    d.push_back(lambda[i]);
  }
  if (C.empty()) {
    return std::vector<double>(patterns.size(), 1.0 / patterns.size());
  }
  auto ms = lp_max_min_slack(C, d);
  if (!ms || ms->slack < margin) return std::nullopt;
  return std::move(ms->x);
}

double full_objective(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                      const Allocation& x) {
  double sum = 0.0, lam = 0.0;
  for (int i = 0; i < tbl.n; ++i) {
    lam += lambda[i];
    if (lambda[i] <= 0) continue;
    const double r = kernels::dot(tbl.row(i).data(), x.x.data(), x.x.size());
    const double slack = r - lambda[i];
    if (slack <= 0) return kInf;
    sum += lambda[i] / slack;
  }
  return lam > 0 ? sum / lam : 0.0;
}

// Rotates mass within the optimal face until at most n patterns remain.
// Directions come from the null space of the rate map restricted to the
// support (stacked with the simplex row), so the rates, and with them the
// objective, are preserved. A lone surplus pattern that resists an exact
// null direction is attempted by a re-solve without it.
void shrink_support(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                    Allocation& x, const SolveOptions& opt) {
  const int n = tbl.n;
  auto support_of = [&](double eps) {
    std::vector<Pattern> s;
    for (Pattern b = 1; b < x.x.size(); ++b) {
      if (x.x[b] > eps) s.push_back(b);
    }
    return s;
  };

  // Sweep dust first; it never survives support accounting anyway.
  {
    double kept = 0.0;
    for (Pattern b = 0; b < x.x.size(); ++b) {
      if (x.x[b] <= 1e-12) x.x[b] = 0.0;
      kept += x.x[b];
    }
    for (double& v : x.x) v /= kept;
  }

  const double base = full_objective(tbl, lambda, x);
  std::vector<Pattern> support = support_of(0.0);

  while (static_cast<int>(support.size()) > n) {
    const int k = static_cast<int>(support.size());
    Eigen::MatrixXd M(n + 1, k);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < n; ++i) M(i, j) = tbl.at(i, support[j]);
      M(n, j) = 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-9);
    const Eigen::MatrixXd kernel = lu.kernel();
    if (kernel.cols() == 0 || kernel.norm() == 0) break;

    Eigen::VectorXd z = kernel.col(0);
    z /= z.cwiseAbs().maxCoeff();
    // Walk x -> x - t z until the first support coordinate hits zero.
    double t_block = kInf;
    for (int j = 0; j < k; ++j) {
      if (z(j) > 1e-14) t_block = std::min(t_block, x.x[support[j]] / z(j));
    }
    if (!std::isfinite(t_block)) {
      z = -z;
      t_block = kInf;
      for (int j = 0; j < k; ++j) {
        if (z(j) > 1e-14) t_block = std::min(t_block, x.x[support[j]] / z(j));
      }
      if (!std::isfinite(t_block)) break;
    }
    Allocation trial = x;
    for (int j = 0; j < k; ++j) {
      trial.x[support[j]] = std::max(trial.x[support[j]] - t_block * z(j), 0.0);
    }
    double mass = std::accumulate(trial.x.begin(), trial.x.end(), 0.0);
    for (double& v : trial.x) v /= mass;
    const double val = full_objective(tbl, lambda, trial);
    if (!(val <= base * (1 + 1e-9) + 1e-15)) break;  // direction was not null enough
    x = trial;
    for (Pattern b = 1; b < x.x.size(); ++b) {
      if (x.x[b] > 0 && x.x[b] <= 1e-12) x.x[b] = 0.0;
    }
    std::vector<Pattern> next = support_of(0.0);
    if (next.size() >= support.size()) break;  // no progress; stop rather than loop
    support = std::move(next);
  }

  // One pattern too many and no exact direction: try dropping each in turn.
  if (static_cast<int>(support.size()) == n + 1) {
    std::sort(support.begin(), support.end(),
              [&](Pattern a, Pattern b) { return x.x[a] < x.x[b]; });
    for (Pattern drop : support) {
      std::vector<Pattern> rest;
      for (Pattern b : support) {
        if (b != drop) rest.push_back(b);
      }
      std::sort(rest.begin(), rest.end());
      std::vector<double> y0(rest.size());
      double mass = 0.0;
      for (std::size_t j = 0; j < rest.size(); ++j) mass += x.x[rest[j]];
      if (mass <= 0) continue;
      for (std::size_t j = 0; j < rest.size(); ++j) y0[j] = x.x[rest[j]] / mass;

      Compact probe(tbl, lambda, rest);
      std::vector<double> scratch;
      if (!std::isfinite(probe.value(y0, 0.0, scratch))) {
        auto lp = lp_start(tbl, lambda, rest);
        if (!lp) continue;
        y0 = *lp;
      }
      auto rs = detail::solve_restricted(tbl, lambda, rest, y0, opt);
      if (rs.value <= base * (1 + 1e-8) + 1e-15) {
        x = expand(tbl.n, rest, rs.y);
        break;
      }
    }
  }
}

}  // namespace

std::vector<double> conservative_rates(const EfficiencyTable& tbl, const Allocation& x) {
  if (x.n != tbl.n) throw std::invalid_argument("allocation does not match the table");
  std::vector<double> r(tbl.n);
  for (int i = 0; i < tbl.n; ++i) {
    r[i] = kernels::dot(tbl.row(i).data(), x.x.data(), x.x.size());
  }
  return r;
}

DelayReport conservative_delay(const EfficiencyTable& tbl, const Allocation& x,
                               const std::vector<double>& lambda) {
  check_lambda(tbl, lambda);
  DelayReport rep;
  rep.lambda = lambda;
  rep.rates = conservative_rates(tbl, x);
  rep.t.resize(tbl.n);
  double weighted = 0.0, lam_sum = 0.0;
  for (int i = 0; i < tbl.n; ++i) {
    const double r = rep.rates[i];
    if (lambda[i] > 0) {
      if (r <= lambda[i]) {
        throw InfeasibleError("cell " + std::to_string(i + 1) + " is overloaded: rate " +
                                  std::to_string(r) + " <= arrivals " +
                                  std::to_string(lambda[i]),
                              std::numeric_limits<double>::quiet_NaN());
      }
      rep.t[i] = 1.0 / (r - lambda[i]);
      weighted += lambda[i] * rep.t[i];
      lam_sum += lambda[i];
    } else {
      rep.t[i] = r > 0 ? 1.0 / r : std::numeric_limits<double>::quiet_NaN();
    }
  }
  rep.weighted = lam_sum > 0 ? weighted / lam_sum : 0.0;
  return rep;
}

std::vector<double> conservative_gradient(const EfficiencyTable& tbl, const Allocation& x,
                                          const std::vector<double>& lambda) {
  check_lambda(tbl, lambda);
  const double lam_sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);
  std::vector<double> g(x.x.size(), 0.0);
  if (lam_sum <= 0) return g;
  const auto r = conservative_rates(tbl, x);
  for (int i = 0; i < tbl.n; ++i) {
    if (lambda[i] <= 0) continue;
    const double slack = r[i] - lambda[i];
    if (slack <= 0) {
      throw InfeasibleError("gradient requested outside the stable region",
                            std::numeric_limits<double>::quiet_NaN());
    }
    kernels::axpy(g.data(), -lambda[i] / (slack * slack) / lam_sum, tbl.row(i).data(),
                  g.size());
  }
  return g;
}

bool region_contains(const EfficiencyTable& tbl, const std::vector<double>& lambda) {
  check_lambda(tbl, lambda);
  if (std::accumulate(lambda.begin(), lambda.end(), 0.0) <= 0) return true;
  return lp_start(tbl, lambda, all_nonempty_patterns(tbl.n)).has_value();
}

Allocation find_feasible(const EfficiencyTable& tbl, const std::vector<double>& lambda) {
  check_lambda(tbl, lambda);
  if (std::accumulate(lambda.begin(), lambda.end(), 0.0) <= 0) {
    return full_reuse_allocation(tbl.n);
  }
  const auto patterns = all_nonempty_patterns(tbl.n);
  auto y = lp_start(tbl, lambda, patterns);
  if (!y) {
    const double rho = throughput_margin(tbl, lambda);
    throw InfeasibleError(
        "traffic is outside the achievable region; it becomes serviceable when "
        "scaled by " + std::to_string(rho),
        rho);
  }
  return expand(tbl.n, patterns, *y);
}

namespace detail {

RestrictedSolve solve_restricted(const EfficiencyTable& tbl,
                                 const std::vector<double>& lambda,
                                 const std::vector<Pattern>& patterns,
                                 std::vector<double> y0, const SolveOptions& opt) {
  Compact prob(tbl, lambda, patterns);
  std::vector<double> scratch;

  project_simplex(y0);
  if (!std::isfinite(prob.value(y0, 0.0, scratch))) {
    auto lp = lp_start(tbl, lambda, patterns);
    if (!lp) {
      throw InfeasibleError("restricted pattern set cannot serve the traffic",
                            std::numeric_limits<double>::quiet_NaN());
    }
    y0 = *lp;
  }

  const double scale = std::max(1.0, std::abs(prob.value(y0, 0.0, scratch)));

  RestrictedSolve out;
  out.y = std::move(y0);
  int budget = opt.max_iters;

  // Barrier continuation, then the pure objective. The barrier keeps early
  // iterates off the stability boundary when the start is a region vertex.
  std::vector<double> weights;
  for (double w = opt.barrier_init * scale; w > opt.barrier_floor * scale;
       w *= opt.barrier_decay) {
    weights.push_back(w);
  }
  weights.push_back(0.0);

  for (std::size_t stage = 0; stage < weights.size(); ++stage) {
    const double w = weights[stage];
    const bool last = stage + 1 == weights.size();
    MinimizeOptions mo;
    mo.tol = last ? opt.tol : std::max(opt.tol, 1e-3);
    mo.max_iters = last ? std::max(budget, 100) : std::min(budget, 2000);
    auto res = minimize_on_simplex(
        [&](const std::vector<double>& y) {
          thread_local std::vector<double> r;
          return prob.value(y, w, r);
        },
        [&](const std::vector<double>& y, std::vector<double>& g) {
          thread_local std::vector<double> r;
          prob.gradient(y, w, g, r);
        },
        std::move(out.y), mo);
    out.y = std::move(res.y);
    out.iterations += res.iterations;
    budget = std::max(budget - res.iterations, 0);
    if (last) {
      out.value = res.value;
      out.gap = res.gap;
      out.converged = res.converged;
      out.stalled = res.stalled;
    }
  }
  return out;
}

}  // namespace detail

namespace {

AllocResult finish_solve(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                         Allocation x, SolveTrace trace, const SolveOptions& opt) {
  shrink_support(tbl, lambda, x, opt);
  x.validate();
  AllocResult out;
  out.report = conservative_delay(tbl, x, lambda);
  // Stationarity over the full pattern space, not just the solved subset.
  const auto g = conservative_gradient(tbl, x, lambda);
  double gx = 0.0;
  for (std::size_t b = 0; b < g.size(); ++b) gx += g[b] * x.x[b];
  double gmin = 0.0;
  for (Pattern b = 1; b < g.size(); ++b) gmin = std::min(gmin, g[b]);
  const double obj = full_objective(tbl, lambda, x);
  trace.kkt = (gx - gmin) / std::max(1.0, std::abs(obj));
  out.x = std::move(x);
  out.trace = std::move(trace);
  return out;
}

}  // namespace

AllocResult solve_conservative(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                               const SolveOptions& opt) {
  check_lambda(tbl, lambda);
  if (std::accumulate(lambda.begin(), lambda.end(), 0.0) <= 0) {
    AllocResult out;
    out.x = full_reuse_allocation(tbl.n);
    out.report = conservative_delay(tbl, out.x, lambda);
    out.trace.converged = true;
    return out;
  }

  const auto patterns = all_nonempty_patterns(tbl.n);
  const double margin = stability_margin(lambda);

  std::vector<double> y0(patterns.size(), 0.0);
  bool full_ok = true;
  for (int i = 0; i < tbl.n; ++i) {
    if (lambda[i] > 0 && tbl.at(i, full_mask(tbl.n)) < lambda[i] + margin) {
      full_ok = false;
      break;
    }
  }
  if (full_ok) {
    y0.back() = 1.0;  // patterns are sorted, the full mask comes last
  } else {
    const Allocation start = find_feasible(tbl, lambda);
    for (std::size_t j = 0; j < patterns.size(); ++j) y0[j] = start.x[patterns[j]];
  }

  auto rs = detail::solve_restricted(tbl, lambda, patterns, std::move(y0), opt);
  if (!rs.converged && rs.gap > std::max(1e-5, 100 * opt.tol)) {
    throw SolverError("conservative solve did not converge: gap " +
                      std::to_string(rs.gap) + " after " +
                      std::to_string(rs.iterations) + " iterations");
  }

  SolveTrace trace;
  trace.iterations = rs.iterations;
  trace.converged = rs.converged;
  trace.stalled = rs.stalled;
  if (opt.record_trace) trace.objective.push_back(rs.value);
  return finish_solve(tbl, lambda, expand(tbl.n, patterns, rs.y), std::move(trace), opt);
}

AllocResult solve_conservative_candidates(const EfficiencyTable& tbl,
                                          const std::vector<double>& lambda,
                                          const SolveOptions& opt) {
  check_lambda(tbl, lambda);
  if (std::accumulate(lambda.begin(), lambda.end(), 0.0) <= 0) {
    AllocResult out;
    out.x = full_reuse_allocation(tbl.n);
    out.report = conservative_delay(tbl, out.x, lambda);
    out.trace.converged = true;
    return out;
  }

  const int n = tbl.n;
  const double margin = stability_margin(lambda);
  const double lam_sum = std::accumulate(lambda.begin(), lambda.end(), 0.0);

  std::vector<Pattern> cand;
  Allocation x = Allocation::zeros(n);
  bool full_ok = true;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] > 0 && tbl.at(i, full_mask(n)) < lambda[i] + margin) {
      full_ok = false;
      break;
    }
  }
  if (full_ok) {
    cand = {full_mask(n)};
    x.x[full_mask(n)] = 1.0;
  } else {
    x = find_feasible(tbl, lambda);
    for (Pattern b = 1; b < x.x.size(); ++b) {
      if (x.x[b] > 1e-12) cand.push_back(b);
    }
  }

  SolveTrace trace;
  std::vector<double> y;
  std::vector<double> g_full(pattern_count(n));
  detail::RestrictedSolve rs;

  const int outer_cap = 64;
  bool done = false;
  for (int outer = 0; outer < outer_cap && !done; ++outer) {
    y.assign(cand.size(), 0.0);
    for (std::size_t j = 0; j < cand.size(); ++j) y[j] = x.x[cand[j]];

    rs = detail::solve_restricted(tbl, lambda, cand, std::move(y), opt);
    x = expand(n, cand, rs.y);
    trace.iterations = outer + 1;
    trace.objective.push_back(rs.value);
    trace.candidate_sizes.push_back(static_cast<int>(cand.size()));

    // Reduced gradient over every pattern; the n most negative entries are
    // invited into the candidate set, preferring lower bitmasks on ties.
    std::fill(g_full.begin(), g_full.end(), 0.0);
    const auto r = conservative_rates(tbl, x);
    for (int i = 0; i < n; ++i) {
      if (lambda[i] <= 0) continue;
      const double slack = r[i] - lambda[i];
      kernels::axpy(g_full.data(), -lambda[i] / (slack * slack) / lam_sum,
                    tbl.row(i).data(), g_full.size());
    }
    std::vector<Pattern> order;
    order.reserve(g_full.size() - 1);
    for (Pattern b = 1; b < g_full.size(); ++b) order.push_back(b);
    const int take = std::min<std::size_t>(n, order.size());
    std::partial_sort(order.begin(), order.begin() + take, order.end(),
                      [&](Pattern a, Pattern b) {
                        if (g_full[a] != g_full[b]) return g_full[a] < g_full[b];
                        return a < b;
                      });

    bool grew = false;
    std::vector<Pattern> merged = cand;
    for (int t = 0; t < take; ++t) {
      if (!std::binary_search(cand.begin(), cand.end(), order[t])) {
        merged.push_back(order[t]);
        grew = true;
      }
    }
    if (!grew) {
      done = true;
    } else {
      std::sort(merged.begin(), merged.end());
      cand = std::move(merged);
    }
  }
  if (!done) {
    throw SolverError("candidate growth did not settle within its round cap");
  }
  if (!rs.converged && rs.gap > std::max(1e-5, 100 * opt.tol)) {
    throw SolverError("restricted solve did not converge: gap " + std::to_string(rs.gap));
  }
  trace.converged = rs.converged;
  trace.stalled = rs.stalled;
  return finish_solve(tbl, lambda, std::move(x), std::move(trace), opt);
}

}  // namespace specsim
