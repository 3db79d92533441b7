#include "specsim/baselines.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace specsim {

AllocResult solve_orthogonal(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                             const SolveOptions& opt) {
  const int n = tbl.n;
  if (static_cast<int>(lambda.size()) != n) {
    throw std::invalid_argument("arrival vector does not match the table");
  }

  // Feasibility has a closed form here: cell i needs a slice of at least
  // lambda_i / s_{i,{i}}, and the slices must fit in one band.
  double need = 0.0;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] <= 0) continue;
    const double s = tbl.at(i, singleton(i));
    if (s <= 0) {
      throw InfeasibleError("cell " + std::to_string(i + 1) +
                                " has zero rate even on a private slice",
                            0.0);
    }
    need += lambda[i] / s;
  }
  if (need >= 1.0) {
    throw InfeasibleError(
        "orthogonal split cannot serve the traffic: the private slices would "
        "need " + std::to_string(need) + " bands; feasible only below a scaling of " +
            std::to_string(1.0 / need),
        1.0 / need);
  }

  std::vector<Pattern> singles(n);
  for (int i = 0; i < n; ++i) singles[i] = singleton(i);

  // Start from slices proportional to demand, padded with the spare
  // bandwidth, which is strictly feasible whenever the problem is.
  std::vector<double> y0(n);
  const double spare = (1.0 - need) / n;
  for (int i = 0; i < n; ++i) {
    const double s = tbl.at(i, singleton(i));
    y0[i] = (lambda[i] > 0 && s > 0 ? lambda[i] / s : 0.0) + spare;
  }

  auto rs = detail::solve_restricted(tbl, lambda, singles, std::move(y0), opt);
  if (!rs.converged && rs.gap > std::max(1e-5, 100 * opt.tol)) {
    throw SolverError("orthogonal solve did not converge: gap " + std::to_string(rs.gap));
  }

  AllocResult out;
  out.x = Allocation::zeros(n);
  for (int i = 0; i < n; ++i) out.x.x[singleton(i)] = rs.y[i];
  out.x.validate();
  out.report = conservative_delay(tbl, out.x, lambda);
  out.trace.iterations = rs.iterations;
  out.trace.kkt = rs.gap;
  out.trace.converged = rs.converged;
  out.trace.stalled = rs.stalled;
  return out;
}

double throughput_margin(const EfficiencyTable& tbl, const std::vector<double>& lambda,
                         double tol) {
  if (std::accumulate(lambda.begin(), lambda.end(), 0.0) <= 0) {
    throw std::invalid_argument("throughput_margin: needs a nonzero arrival vector");
  }
  if (tol <= 0) throw std::invalid_argument("throughput_margin: tol must be positive");

  auto feasible_at = [&](double rho) {
    std::vector<double> scaled(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) scaled[i] = rho * lambda[i];
    return region_contains(tbl, scaled);
  };

  double lo = 0.0, hi = 1.0;
  while (feasible_at(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {
      throw SolverError("throughput_margin: region appears unbounded");
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible_at(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace specsim
