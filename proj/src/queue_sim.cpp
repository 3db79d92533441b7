#include "specsim/queue_sim.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "specsim/refined.hpp"

namespace specsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double canonical(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

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

double batch_stderr(const std::vector<double>& sums, const std::vector<long long>& counts) {
  std::vector<double> means;
  for (std::size_t b = 0; b < sums.size(); ++b) {
    if (counts[b] > 0) means.push_back(sums[b] / double(counts[b]));
  }
  if (means.size() < 2) return kNaN;
  double m = 0.0;
  for (double v : means) m += v;
  m /= double(means.size());
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  return std::sqrt(ss / (double(means.size()) * double(means.size() - 1)));
}

}  // namespace

SimResult simulate(const EfficiencyTable& tbl, const Allocation& x,
                   const std::vector<double>& lambda, const SimOptions& opt) {
  const int n = tbl.n;
  check_sizes(n, lambda);
  if (opt.horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (!(opt.warmup >= 0 && opt.warmup < 1)) {
    throw std::invalid_argument("warmup fraction must lie in [0, 1)");
  }
  const auto rates = refined_rates(tbl, x);

  SimResult res;
  res.lambda = lambda;
  res.mean_sojourn.assign(n, kNaN);
  res.stderr_sojourn.assign(n, kNaN);
  res.utilization.assign(n, 0.0);
  res.served.assign(n, 0);
  res.queue_cdf.assign(n, {});

  double uni = 0.0;
  for (int i = 0; i < n; ++i) {
    uni += lambda[i] + rates.at(i, singleton(i));
    if (lambda[i] > 0 && rates.at(i, full_mask(n)) <= lambda[i]) res.unstable_input = true;
  }
  if (uni <= 0) return res;
  const double dt = 1.0 / uni;
  res.step_seconds = dt;

  const long long warm = static_cast<long long>(opt.warmup * double(opt.horizon));
  const int nb = std::max(1, opt.batches);
  const double span = double(opt.horizon - warm);

  std::mt19937_64 rng(opt.seed);
  std::vector<long long> len(n, 0);
  Pattern busy = 0;
  std::vector<std::deque<long long>> queue(n);
  std::vector<double> sum(n, 0.0);
  std::vector<std::vector<double>> bsum(n, std::vector<double>(nb, 0.0));
  std::vector<std::vector<long long>> bcount(n, std::vector<long long>(nb, 0));
  std::vector<std::vector<long long>> hist(n);
  long long samples = 0;

  for (long long step = 0; step < opt.horizon; ++step) {
    double u = canonical(rng) * uni;
    bool handled = false;
    for (int i = 0; i < n && !handled; ++i) {
      if (u < lambda[i]) {
        queue[i].push_back(step);
        if (len[i]++ == 0) busy |= singleton(i);
        handled = true;
      } else {
        u -= lambda[i];
      }
    }
    if (!handled) {
      for (Pattern rest = busy; rest != 0; rest &= rest - 1) {
        const int i = std::countr_zero(rest);
        const double r = rates.at(i, busy);
        if (u < r) {
          const long long arr = queue[i].front();
          queue[i].pop_front();
          if (--len[i] == 0) busy &= ~singleton(i);
          if (arr >= warm) {
            const double sojourn = double(step - arr);
            sum[i] += sojourn;
            ++res.served[i];
            int b = int(double(step - warm) / span * nb);
            b = std::min(std::max(b, 0), nb - 1);
            bsum[i][b] += sojourn;
            ++bcount[i][b];
          }
          break;
        }
        u -= r;
      }
    }
    if (step >= warm) {
      ++samples;
      for (int i = 0; i < n; ++i) {
        if (len[i] >= static_cast<long long>(hist[i].size())) hist[i].resize(len[i] + 1, 0);
        ++hist[i][len[i]];
      }
    }
  }

  std::vector<double> psum(nb, 0.0);
  std::vector<long long> pcount(nb, 0);
  double tot_sum = 0.0;
  long long tot_count = 0;
  for (int i = 0; i < n; ++i) {
    if (res.served[i] > 0) {
      res.mean_sojourn[i] = sum[i] / double(res.served[i]) * dt;
      const double se = batch_stderr(bsum[i], bcount[i]);
      res.stderr_sojourn[i] = se * dt;
    }
    tot_sum += sum[i];
    tot_count += res.served[i];
    for (int b = 0; b < nb; ++b) {
      psum[b] += bsum[i][b];
      pcount[b] += bcount[i][b];
    }
  }
  if (tot_count > 0) {
    res.pooled_mean = tot_sum / double(tot_count) * dt;
    res.pooled_stderr = batch_stderr(psum, pcount) * dt;
  } else {
    res.pooled_mean = kNaN;
    res.pooled_stderr = kNaN;
  }

  std::size_t maxlen = 1;
  for (int i = 0; i < n; ++i) maxlen = std::max(maxlen, hist[i].size());
  res.pooled_cdf.assign(maxlen, 0.0);
  for (int i = 0; i < n; ++i) {
    if (samples == 0) continue;
    res.utilization[i] =
        1.0 - (hist[i].empty() ? 0.0 : double(hist[i][0])) / double(samples);
    auto& cdf = res.queue_cdf[i];
    cdf.assign(hist[i].size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < hist[i].size(); ++k) {
      acc += double(hist[i][k]);
      cdf[k] = acc / double(samples);
      res.pooled_cdf[k] += double(hist[i][k]);
    }
  }
  if (samples > 0) {
    double acc = 0.0;
    for (double& v : res.pooled_cdf) {
      acc += v;
      v = acc / double(samples * n);
    }
  }
  return res;
}

ExactDelay exact_small_delay(const EfficiencyTable& tbl, const Allocation& x,
                             const std::vector<double>& lambda, int cap) {
  const int n = tbl.n;
  check_sizes(n, lambda);
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");

  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    if (lambda[i] > 0) active.push_back(i);
  }
  ExactDelay ed;
  ed.cap = cap;
  ed.t.assign(n, kNaN);
  if (active.empty()) return ed;

  const int m = static_cast<int>(active.size());
  const long long base = cap + 1;
  long long states = 1;
  std::vector<long long> pw(m, 1);
  for (int k = 0; k < m; ++k) {
    pw[k] = states;
    states *= base;
    if (states > 5'000'000) {
      throw std::invalid_argument("joint chain too large; lower the cap or the cell count");
    }
  }
  const auto rates = refined_rates(tbl, x);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(states) * (2 * m + 1));
  std::vector<long long> l(m, 0);
  for (long long f = 0; f < states; ++f) {
    long long rem = f;
    Pattern a = 0;
    for (int k = 0; k < m; ++k) {
      l[k] = rem % base;
      rem /= base;
      if (l[k] > 0) a |= singleton(active[k]);
    }
    double out = 0.0;
    for (int k = 0; k < m; ++k) {
      if (l[k] < cap) {
        const long long to = f + pw[k];
        if (to != states - 1) trips.emplace_back(to, f, lambda[active[k]]);
        out += lambda[active[k]];
      }
      if (l[k] > 0) {
        const double r = rates.at(active[k], a);
        const long long to = f - pw[k];
        if (to != states - 1) trips.emplace_back(to, f, r);
        out += r;
      }
    }
    if (f != states - 1) trips.emplace_back(f, f, -out);
  }
  for (long long c = 0; c < states; ++c) trips.emplace_back(states - 1, c, 1.0);

  Eigen::SparseMatrix<double> M(states, states);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(M);
  if (lu.info() != Eigen::Success) {
    throw SolverError("joint chain factorization failed");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(states);
  rhs(states - 1) = 1.0;
  Eigen::VectorXd pi = lu.solve(rhs);

  double total = 0.0;
  for (long long s = 0; s < states; ++s) {
    if (pi(s) < 0) pi(s) = 0;
    total += pi(s);
  }
  pi /= total;

  std::vector<double> mean_len(m, 0.0), p_at_cap(m, 0.0);
  for (long long s = 0; s < states; ++s) {
    long long rem = s;
    bool truncated = false;
    for (int k = 0; k < m; ++k) {
      const long long lk = rem % base;
      rem /= base;
      mean_len[k] += pi(s) * double(lk);
      if (lk == cap) {
        p_at_cap[k] += pi(s);
        truncated = true;
      }
    }
    if (truncated) ed.truncation_mass += pi(s);
  }
  if (ed.truncation_mass >= 1e-8) {
    throw std::invalid_argument("truncation cap too small: boundary mass " +
                                std::to_string(ed.truncation_mass));
  }

  double wsum = 0.0, lam_eff_sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double lam_eff = lambda[active[k]] * (1.0 - p_at_cap[k]);
    ed.t[active[k]] = mean_len[k] / lam_eff;
    wsum += mean_len[k];
    lam_eff_sum += lam_eff;
  }
  ed.weighted = wsum / lam_eff_sum;
  return ed;
}

CouplingCheck coupled_worstcase_check(const EfficiencyTable& tbl, const Allocation& x,
                                      const std::vector<double>& lambda,
                                      long long horizon, std::uint64_t seed) {
  const int n = tbl.n;
  check_sizes(n, lambda);
  const auto rates = refined_rates(tbl, x);
  const Pattern full = full_mask(n);

  double uni = 0.0;
  for (int i = 0; i < n; ++i) uni += lambda[i] + rates.at(i, singleton(i));
  CouplingCheck cc;
  if (uni <= 0) {
    cc.steps = horizon;
    return cc;
  }

  std::mt19937_64 rng(seed);
  std::vector<long long> l(n, 0), lf(n, 0);
  Pattern busy = 0;
  for (long long step = 0; step < horizon; ++step) {
    double u = canonical(rng) * uni;
    bool handled = false;
    for (int i = 0; i < n && !handled; ++i) {
      if (u < lambda[i]) {
        if (l[i]++ == 0) busy |= singleton(i);
        ++lf[i];
        handled = true;
      } else {
        u -= lambda[i];
      }
    }
    if (!handled) {
      // One service pulse per cell, as wide as its best-case rate; each
      // system accepts the pulse with probability (its rate) / (best rate),
      // off the same draw, so the slower system's departures are a subset.
      for (int i = 0; i < n; ++i) {
        const double width = rates.at(i, singleton(i));
        if (u < width) {
          const double v = u / width;
          if (l[i] > 0 && v * width < rates.at(i, busy)) {
            if (--l[i] == 0) busy &= ~singleton(i);
          }
          if (lf[i] > 0 && v * width < rates.at(i, full)) --lf[i];
          break;
        }
        u -= width;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (l[i] > lf[i]) {
        cc.dominated = false;
        cc.first_violation = step;
        cc.steps = step + 1;
        return cc;
      }
    }
  }
  cc.steps = horizon;
  return cc;
}

}  // namespace specsim
