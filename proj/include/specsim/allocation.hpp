#pragma once

#include <vector>

#include "specsim/pattern.hpp"

namespace specsim {

// Entries at or below this are treated as unused when reporting support.
inline constexpr double kSupportEps = 1e-6;

// A point on the pattern simplex: x[B] is the fraction of the band assigned
// to reuse pattern B. The empty pattern gets nothing by construction, so
// x[0] stays zero.
struct Allocation {
  int n = 0;
  std::vector<double> x;  // size 2^n

  static Allocation zeros(int n);

  std::vector<Pattern> support(double eps = kSupportEps) const;

  // Throws std::invalid_argument unless x is a simplex point to within 1e-9
  // with x[0] == 0 (tiny negative roundoff is tolerated).
  void validate() const;
};

// The whole band shared by everyone: x_N = 1.
Allocation full_reuse_allocation(int n);

// The band split evenly among the singleton patterns.
Allocation uniform_orthogonal_allocation(int n);

// Half the L1 distance between two allocations over the same pattern set.
double tv_distance(const Allocation& a, const Allocation& b);

}  // namespace specsim
