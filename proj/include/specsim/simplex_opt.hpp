#pragma once

#include <functional>
#include <vector>

namespace specsim {

// Euclidean projection onto the probability simplex {y >= 0, sum = 1}.
void project_simplex(std::vector<double>& y);

struct MinimizeOptions {
  double tol = 1e-8;  // relative stationarity gap at which to stop
  int max_iters = 20000;
  bool record_trace = false;
};

struct MinimizeResult {
  std::vector<double> y;
  double value = 0.0;
  double gap = 0.0;  // relative stationarity gap at exit
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // backtracking hit the step floor before converging
  std::vector<double> trace;
};

// Projected gradient descent on the probability simplex with
// Barzilai-Borwein step sizes under an Armijo backtracking safeguard.
//
// The objective may return +inf (or NaN) outside its domain; such trial
// points are simply rejected by the line search, which keeps iterates
// strictly inside as long as the start is. Stationarity is measured by the
// simplex linear-minimization gap  <g,y> - min_k g_k, divided by
// max(1, |f|); at an exact constrained minimum the gap is zero, and for
// convex objectives it also upper-bounds the suboptimality.
MinimizeResult minimize_on_simplex(
    const std::function<double(const std::vector<double>&)>& f,
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& grad,
    std::vector<double> y0, const MinimizeOptions& opt);

}  // namespace specsim
