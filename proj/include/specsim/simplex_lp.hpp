#pragma once

#include <optional>
#include <vector>

namespace specsim {

// Phase-1 simplex for the system
//     x >= 0,  sum_j x_j = 1,  C x >= d
// with C given row-major (rows are constraints). Returns a basic feasible
// solution, which therefore has at most rows(C)+1 nonzero entries, or
// nullopt when the system is infeasible. Dense tableau, Bland's rule.
std::optional<std::vector<double>> lp_feasible_point(
    const std::vector<std::vector<double>>& C, const std::vector<double>& d);

struct MaxSlackPoint {
  std::vector<double> x;
  double slack = 0.0;  // the maximized min_i (C x - d)_i, never negative
};

// Same constraint system, but instead of stopping at the first feasible
// vertex this pushes on to maximize the worst slack min_i (C x - d)_i.
// Iterative solvers started from the returned point stand clear of the
// boundary where the delay objective blows up. Returns nullopt when the
// system is infeasible even with zero slack.
std::optional<MaxSlackPoint> lp_max_min_slack(
    const std::vector<std::vector<double>>& C, const std::vector<double>& d);

}  // namespace specsim
