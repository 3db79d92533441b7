#include "specsim/allocation.hpp"

#include <cmath>
#include <stdexcept>

namespace specsim {

Allocation Allocation::zeros(int n) {
  if (n < 1 || n > kMaxCells) throw std::invalid_argument("allocation: n out of range");
  Allocation a;
  a.n = n;
  a.x.assign(pattern_count(n), 0.0);
  return a;
}

std::vector<Pattern> Allocation::support(double eps) const {
  std::vector<Pattern> out;
  for (Pattern b = 0; b < x.size(); ++b) {
    if (x[b] > eps) out.push_back(b);
  }
  return out;
}

void Allocation::validate() const {
  if (n < 1 || x.size() != pattern_count(n)) {
    throw std::invalid_argument("allocation: size does not match n");
  }
  double sum = 0.0;
  for (double v : x) {
    if (!std::isfinite(v) || v < -1e-12) {
      throw std::invalid_argument("allocation: negative or non-finite entry");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("allocation: fractions do not sum to one");
  }
  if (x[0] > 1e-12) {
    throw std::invalid_argument("allocation: empty pattern carries bandwidth");
  }
}

Allocation full_reuse_allocation(int n) {
  Allocation a = Allocation::zeros(n);
  a.x[full_mask(n)] = 1.0;
  return a;
}

Allocation uniform_orthogonal_allocation(int n) {
  Allocation a = Allocation::zeros(n);
  for (int i = 0; i < n; ++i) a.x[singleton(i)] = 1.0 / n;
  return a;
}

double tv_distance(const Allocation& a, const Allocation& b) {
  if (a.n != b.n) throw std::invalid_argument("tv_distance: mismatched sizes");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.x.size(); ++k) acc += std::abs(a.x[k] - b.x[k]);
  return acc / 2.0;
}

}  // namespace specsim
