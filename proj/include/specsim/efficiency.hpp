#pragma once

#include <span>
#include <vector>

#include "specsim/pattern.hpp"
#include "specsim/scenario.hpp"

namespace specsim {

// Path gain at distance d meters for the given exponent. Distances are
// clamped below at one meter (the model's reference distance), so the gain
// never exceeds one.
double pathloss_gain(double dist_m, double exponent);

// Noise plus co-channel interference PSD (uW/Hz) at demand point
// `point_index` of cell i while the BTSs in `a` transmit. Requires i in a;
// the serving BTS never interferes with itself.
double interference_psd(const Scenario& sc, int i, Pattern a, int point_index);

// Convenience overload for cells with exactly one demand point.
double interference_psd(const Scenario& sc, int i, Pattern a);

// Service rate of cell i in packets/second when scheduled under pattern a:
// the mean over the cell's demand points of (W/L) * log2(1 + snr), where
// snr is the received signal PSD over the noise-plus-interference PSD at
// that point. Rates are averaged, interference is not.
double spectral_efficiency(const Scenario& sc, int i, Pattern a);

struct EfficiencyTable {
  int n = 0;
  std::vector<double> s;  // row-major, s[i * 2^n + A]

  double at(int i, Pattern a) const { return s[(std::size_t(i) << n) + a]; }
  std::span<const double> row(int i) const {
    return {s.data() + (std::size_t(i) << n), pattern_count(n)};
  }
};

// Tabulates spectral_efficiency for every (cell, pattern) pair. Capped at
// n <= 16 cells since the table holds n * 2^n entries.
EfficiencyTable build_table(const Scenario& sc);

}  // namespace specsim
