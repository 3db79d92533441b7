#include "specsim/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "specsim/kernels.hpp"

namespace specsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_stable(const RateTable& rates, const std::vector<double>& lambda) {
  if (static_cast<int>(lambda.size()) != rates.n) {
    throw std::invalid_argument("arrival vector does not match the table");
  }
  const Pattern full = full_mask(rates.n);
  for (int i = 0; i < rates.n; ++i) {
    if (lambda[i] > 0 && rates.at(i, full) <= lambda[i]) {
      throw InfeasibleError("cell " + std::to_string(i + 1) +
                                " is unstable even at the all-busy rate",
                            kNaN);
    }
  }
}

// Product-form law over the other cells' busy indicators: out[k] is the
// probability that exactly the cells selected by k (indexing into `others`)
// are busy, when cell j is busy independently with probability p[j].
std::vector<double> subset_products(const std::vector<double>& p,
                                    const std::vector<int>& others) {
  std::vector<double> out(std::size_t(1) << others.size(), 1.0);
  for (std::size_t b = 0; b < others.size(); ++b) {
    const double pj = p[others[b]];
    const std::size_t block = std::size_t(1) << b;
    for (std::size_t k = 0; k < block; ++k) {
      out[k | block] = out[k] * pj;
      out[k] *= 1.0 - pj;
    }
  }
  return out;
}

double weighted_mean(const std::vector<double>& t, const std::vector<double>& lambda) {
  double acc = 0.0, lam = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (lambda[i] > 0) {
      acc += lambda[i] * t[i];
      lam += lambda[i];
    }
  }
  return lam > 0 ? acc / lam : 0.0;
}

}  // namespace

BoundPair first_degree_bounds(const RateTable& rates, const std::vector<double>& lambda) {
  require_stable(rates, lambda);
  const int n = rates.n;
  BoundPair b;
  b.lower.assign(n, kNaN);
  b.upper.assign(n, kNaN);
  for (int i = 0; i < n; ++i) {
    if (lambda[i] <= 0) continue;
    b.upper[i] = 1.0 / (rates.at(i, full_mask(n)) - lambda[i]);
    b.lower[i] = 1.0 / (rates.at(i, singleton(i)) - lambda[i]);
  }
  return b;
}

BoundPair second_degree_bounds(const RateTable& rates, const std::vector<double>& lambda) {
  require_stable(rates, lambda);
  const int n = rates.n;

  std::vector<double> p_hi(n, 0.0), p_lo(n, 0.0);
  for (int j = 0; j < n; ++j) {
    if (lambda[j] <= 0) continue;
    p_hi[j] = lambda[j] / rates.at(j, full_mask(n));
    p_lo[j] = lambda[j] / rates.at(j, singleton(j));
  }

  BoundPair b;
  b.lower.assign(n, kNaN);
  b.upper.assign(n, kNaN);
  std::vector<double> rt;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] <= 0) continue;
    std::vector<int> others;
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    rt.resize(std::size_t(1) << others.size());
    for (std::size_t k = 0; k < rt.size(); ++k) {
      Pattern a = singleton(i);
      for (std::size_t bpos = 0; bpos < others.size(); ++bpos) {
        if (k >> bpos & 1) a |= singleton(others[bpos]);
      }
      rt[k] = rates.at(i, a);
    }
    const auto pi_hi = subset_products(p_hi, others);
    const auto pi_lo = subset_products(p_lo, others);
    // Averaging the M/M/1 sojourn over the surrogate busy law overshoots
    // (convexity), averaging the rate first undershoots.
    b.upper[i] = kernels::inv_weighted_sum(pi_hi.data(), rt.data(), lambda[i], rt.size());
    b.lower[i] = 1.0 / (kernels::dot(pi_lo.data(), rt.data(), rt.size()) - lambda[i]);
  }
  return b;
}

DelayBounds delay_bounds(const EfficiencyTable& tbl, const Allocation& x,
                         const std::vector<double>& lambda) {
  const auto rates = refined_rates(tbl, x);
  const auto first = first_degree_bounds(rates, lambda);
  const auto second = second_degree_bounds(rates, lambda);
  DelayBounds d;
  d.lower1 = first.lower;
  d.upper1 = first.upper;
  d.lower2 = second.lower;
  d.upper2 = second.upper;
  d.weighted_lower1 = weighted_mean(d.lower1, lambda);
  d.weighted_lower2 = weighted_mean(d.lower2, lambda);
  d.weighted_upper2 = weighted_mean(d.upper2, lambda);
  d.weighted_upper1 = weighted_mean(d.upper1, lambda);
  return d;
}

}  // namespace specsim
