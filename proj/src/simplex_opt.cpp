#include "specsim/simplex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace specsim {

void project_simplex(std::vector<double>& y) {
  // Sort-based projection: find the largest prefix of the sorted values
  // whose shifted mean threshold still lies below every member, then clip.
  const std::size_t m = y.size();
  std::vector<double> u(y);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double running = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    running += u[k];
    const double cand = (running - 1.0) / static_cast<double>(k + 1);
    if (u[k] - cand > 0) tau = cand;
  }
  for (double& v : y) v = std::max(v - tau, 0.0);
  // Roundoff can leave the sum a few ulps off one; rescale the positive mass.
  const double s = std::accumulate(y.begin(), y.end(), 0.0);
  if (s > 0 && std::abs(s - 1.0) > 1e-15) {
    for (double& v : y) v /= s;
  }
}

MinimizeResult minimize_on_simplex(
    const std::function<double(const std::vector<double>&)>& f,
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& grad,
    std::vector<double> y0, const MinimizeOptions& opt) {
  constexpr double kArmijo = 1e-4;
  const std::size_t m = y0.size();

  MinimizeResult res;
  project_simplex(y0);
  std::vector<double> y = std::move(y0);
  std::vector<double> g(m), g_new(m), trial(m);
  double fy = f(y);
  grad(y, g);

  double step = 1.0;
  std::vector<double> y_prev, g_prev;

  for (int it = 0; it < opt.max_iters; ++it) {
    res.iterations = it;
    if (opt.record_trace) res.trace.push_back(fy);

    const double gy = std::inner_product(g.begin(), g.end(), y.begin(), 0.0);
    const double gmin = *std::min_element(g.begin(), g.end());
    res.gap = (gy - gmin) / std::max(1.0, std::abs(fy));
    if (res.gap <= opt.tol) {
      res.converged = true;
      break;
    }

    // Spectral (Barzilai-Borwein) step from the previous displacement,
    // clamped to a sane range.
    if (!y_prev.empty()) {
      double ss = 0.0, sz = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double s_k = y[k] - y_prev[k];
        ss += s_k * s_k;
        sz += s_k * (g[k] - g_prev[k]);
      }
      step = (sz > 0) ? std::clamp(ss / sz, 1e-12, 1e8) : 1e8;
    }

    y_prev = y;
    g_prev = g;

    // The floor is on the displacement, not the step: with a steep gradient
    // (a start pressed against the stability boundary) the step may need to
    // fall far below any fixed constant before the move shrinks to ulps.
    bool accepted = false;
    for (int halvings = 0; halvings < 400 && step > 0; ++halvings) {
      for (std::size_t k = 0; k < m; ++k) trial[k] = y[k] - step * g[k];
      project_simplex(trial);
      double decrease = 0.0;
      double moved = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        decrease += g[k] * (trial[k] - y[k]);
        moved = std::max(moved, std::abs(trial[k] - y[k]));
      }
      if (moved == 0.0) break;  // projection pinned the point
      if (decrease >= 0) {
        // The projected direction is no longer a descent direction at this
        // step size; shrink and retry.
        step *= 0.5;
        continue;
      }
      const double ft = f(trial);
      if (std::isfinite(ft) && ft <= fy + kArmijo * decrease) {
        y.swap(trial);
        fy = ft;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    grad(y, g);
  }

  // Recompute the gap at the final point so callers see a consistent pair.
  {
    const double gy = std::inner_product(g.begin(), g.end(), y.begin(), 0.0);
    const double gmin = *std::min_element(g.begin(), g.end());
    res.gap = (gy - gmin) / std::max(1.0, std::abs(fy));
    if (res.gap <= opt.tol) res.converged = true;
  }
  res.y = std::move(y);
  res.value = fy;
  return res;
}

}  // namespace specsim
