#include "specsim/refined.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "specsim/kernels.hpp"

namespace specsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kChainCap = 12;  // dense 2^n x 2^n solve beyond this is hopeless

void check_sizes(int n, const std::vector<double>& lambda) {
  if (static_cast<int>(lambda.size()) != n) {
    throw std::invalid_argument("arrival vector does not match the table");
  }
  for (double v : lambda) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw std::invalid_argument("arrival rates must be finite and nonnegative");
    }
  }
}

}  // namespace

RateTable refined_rates(const EfficiencyTable& tbl, const Allocation& x) {
  if (x.n != tbl.n) throw std::invalid_argument("allocation does not match the table");
  const int n = tbl.n;
  RateTable rt;
  rt.n = n;
  rt.r.assign(std::size_t(n) << n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = tbl.row(i).data();
    for (Pattern a = 0; a < pattern_count(n); ++a) {
      if (!contains(a, i)) continue;
      rt.r[(std::size_t(i) << n) + a] =
          kernels::gather_dot(row, x.x.data(), a, x.x.size());
    }
  }
  return rt;
}

LumpedChain lumped_generator(const RateTable& rates, const std::vector<double>& lambda) {
  const int n = rates.n;
  check_sizes(n, lambda);
  if (n > kChainCap) {
    throw std::invalid_argument("lumped chain capped at " + std::to_string(kChainCap) +
                                " cells (dense 2^n x 2^n solve)");
  }
  const Pattern full = full_mask(n);
  for (int i = 0; i < n; ++i) {
    if (lambda[i] > 0 && rates.at(i, full) <= lambda[i]) {
      throw InfeasibleError("cell " + std::to_string(i + 1) +
                                " is unstable: departure rate would be nonpositive",
                            kNaN);
    }
  }

  LumpedChain ch;
  ch.n = n;
  const std::size_t m = pattern_count(n);
  ch.q.assign(m * m, 0.0);
  for (Pattern a = 0; a < m; ++a) {
    double out = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!contains(a, i)) {
        if (lambda[i] > 0) {
          ch.q[(std::size_t(a) << n) + (a | singleton(i))] = lambda[i];
          out += lambda[i];
        }
      } else {
        const double drain = rates.at(i, a) - lambda[i];
        ch.q[(std::size_t(a) << n) + (a & ~singleton(i))] = drain;
        out += drain;
      }
    }
    ch.q[(std::size_t(a) << n) + a] = -out;
  }
  return ch;
}

std::vector<double> steady_state(const LumpedChain& chain) {
  const int n = chain.n;
  const std::size_t m = pattern_count(n);

  // States reachable from the all-idle set; cells that never see traffic
  // leave half the state space dark.
  std::vector<char> reach(m, 0);
  {
    std::vector<Pattern> stack{0};
    reach[0] = 1;
    while (!stack.empty()) {
      const Pattern a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < m; ++b) {
        if (!reach[b] && chain.q[(std::size_t(a) << n) + b] > 0) {
          reach[b] = 1;
          stack.push_back(static_cast<Pattern>(b));
        }
      }
    }
  }

  std::vector<int> idx(m, -1);
  std::vector<Pattern> states;
  for (std::size_t a = 0; a < m; ++a) {
    if (reach[a]) {
      idx[a] = static_cast<int>(states.size());
      states.push_back(static_cast<Pattern>(a));
    }
  }
  const int k = static_cast<int>(states.size());

  // Solve p Q = 0 with the last balance equation replaced by sum(p) = 1:
  // transpose, overwrite that row with ones, solve against the unit vector.
  Eigen::MatrixXd M(k, k);
  for (int col = 0; col < k; ++col) {
    for (int row = 0; row < k; ++row) {
      M(row, col) = chain.q[(std::size_t(states[col]) << n) + states[row]];
    }
  }
  for (int col = 0; col < k; ++col) M(k - 1, col) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  Eigen::VectorXd p = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);

  std::vector<double> out(m, 0.0);
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    double v = p(j);
    if (v < 0) {
      if (v < -1e-9) {
        throw SolverError("steady state came back negative: " + std::to_string(v));
      }
      v = 0.0;
    }
    out[states[j]] = v;
    total += v;
  }
  if (!(total > 0) || !std::isfinite(total)) {
    throw SolverError("steady state solve failed (singular chain?)");
  }
  for (double& v : out) v /= total;

  // Verify the balance residual on the full generator.
  double qscale = 1.0;
  for (double v : chain.q) qscale = std::max(qscale, std::abs(v));
  double resid = 0.0;
  for (std::size_t b = 0; b < m; ++b) {
    double acc = 0.0;
    for (std::size_t a = 0; a < m; ++a) acc += out[a] * chain.q[(a << n) + b];
    resid = std::max(resid, std::abs(acc));
  }
  if (resid > 1e-8 * qscale) {
    throw SolverError("steady state residual too large: " + std::to_string(resid));
  }
  return out;
}

DelayReport refined_delay(const EfficiencyTable& tbl, const Allocation& x,
                          const std::vector<double>& lambda) {
  check_sizes(tbl.n, lambda);
  const int n = tbl.n;
  const auto rates = refined_rates(tbl, x);
  const auto chain = lumped_generator(rates, lambda);
  const auto p = steady_state(chain);

  DelayReport rep;
  rep.lambda = lambda;
  rep.rates = conservative_rates(tbl, x);
  rep.t.assign(n, kNaN);
  double weighted = 0.0, lam_sum = 0.0;
  std::vector<double> pa, ra;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] <= 0) continue;
    pa.clear();
    ra.clear();
    for (Pattern a = 0; a < pattern_count(n); ++a) {
      if (!contains(a, i)) continue;
      pa.push_back(p[a]);
      ra.push_back(rates.at(i, a));
    }
    // Little's law per busy set: the backlog share p(A) drains at r_{i,A},
    // giving sum_A p(A) r_{i,A} / (r_{i,A} - lambda_i) packets in system.
    const double backlog =
        kernels::ratio_weighted_sum(pa.data(), ra.data(), lambda[i], pa.size());
    rep.t[i] = backlog / lambda[i];
    weighted += lambda[i] * rep.t[i];
    lam_sum += lambda[i];
  }
  rep.weighted = lam_sum > 0 ? weighted / lam_sum : 0.0;
  return rep;
}

double refined_objective_value(const EfficiencyTable& tbl, const std::vector<double>& x,
                               const std::vector<double>& lambda) {
  const int n = tbl.n;
  check_sizes(n, lambda);
  if (x.size() != pattern_count(n)) {
    throw std::invalid_argument("allocation vector does not match the table");
  }

  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] > 0) active.push_back(i);
  }
  if (active.empty()) return 0.0;

  // Stability against the all-busy rates, which for the loaded cells also
  // bounds every busy-set rate from below.
  for (int i : active) {
    const double r_full = kernels::dot(tbl.row(i).data(), x.data(), x.size());
    if (!(r_full > lambda[i])) return kNaN;
  }

  const int m = static_cast<int>(active.size());
  const std::size_t states = pattern_count(m);

  // Busy-set rates over the loaded cells only; idle cells never join the
  // busy set, so the chain lives on 2^m states.
  std::vector<double> rr(std::size_t(m) * states, 0.0);
  for (int ii = 0; ii < m; ++ii) {
    const double* row = tbl.row(active[ii]).data();
    for (std::size_t sa = 1; sa < states; ++sa) {
      if (!(sa >> ii & 1)) continue;
      Pattern a = 0;
      for (int jj = 0; jj < m; ++jj) {
        if (sa >> jj & 1) a |= singleton(active[jj]);
      }
      rr[std::size_t(ii) * states + sa] =
          kernels::gather_dot(row, x.data(), a, x.size());
    }
  }

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(states, states);
  for (std::size_t sa = 0; sa < states; ++sa) {
    double out = 0.0;
    for (int ii = 0; ii < m; ++ii) {
      const double lam = lambda[active[ii]];
      if (!(sa >> ii & 1)) {
        M(sa | (std::size_t(1) << ii), sa) += lam;  // transposed on the fly
        out += lam;
      } else {
        const double drain = rr[std::size_t(ii) * states + sa] - lam;
        if (!(drain > 0)) return kNaN;
        M(sa & ~(std::size_t(1) << ii), sa) += drain;
        out += drain;
      }
    }
    M(sa, sa) -= out;
  }
  for (std::size_t col = 0; col < states; ++col) M(states - 1, col) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(states);
  rhs(states - 1) = 1.0;
  Eigen::VectorXd p = Eigen::PartialPivLU<Eigen::MatrixXd>(M).solve(rhs);

  double weighted = 0.0, lam_sum = 0.0;
  for (int ii = 0; ii < m; ++ii) {
    const double lam = lambda[active[ii]];
    double backlog = 0.0;
    for (std::size_t sa = 1; sa < states; ++sa) {
      if (!(sa >> ii & 1)) continue;
      const double r = rr[std::size_t(ii) * states + sa];
      backlog += std::max(p(sa), 0.0) * r / (r - lam);
    }
    weighted += backlog;  // lam * (backlog / lam)
    lam_sum += lam;
  }
  return weighted / lam_sum;
}

}  // namespace specsim
