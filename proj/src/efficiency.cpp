#include "specsim/efficiency.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace specsim {

double pathloss_gain(double dist_m, double exponent) {
  return std::pow(std::max(dist_m, 1.0), -exponent);
}

namespace {

double point_distance(const Scenario& sc, int bts, const DemandPoint& d) {
  return std::hypot(sc.bts[bts][0] - d.pos[0], sc.bts[bts][1] - d.pos[1]);
}

double interference_at(const Scenario& sc, int i, Pattern a, const DemandPoint& d) {
  double acc = sc.noise_psd;
  for (int j = 0; j < sc.cell_count(); ++j) {
    if (j == i || !contains(a, j)) continue;
    acc += sc.tx_psd[j] * pathloss_gain(point_distance(sc, j, d), sc.pathloss_exp[j]);
  }
  return acc;
}

}  // namespace

double interference_psd(const Scenario& sc, int i, Pattern a, int point_index) {
  if (i < 0 || i >= sc.cell_count() || !contains(a, i)) {
    throw std::invalid_argument("interference_psd: cell " + std::to_string(i + 1) +
                                " is not part of pattern " + pattern_name(a));
  }
  if (point_index < 0 || point_index >= static_cast<int>(sc.demand.size()) ||
      sc.demand[point_index].cell != i) {
    throw std::invalid_argument("interference_psd: bad demand point index");
  }
  return interference_at(sc, i, a, sc.demand[point_index]);
}

double interference_psd(const Scenario& sc, int i, Pattern a) {
  const auto pts = sc.points_of(i);
  if (pts.size() != 1) {
    throw std::invalid_argument(
        "interference_psd: cell " + std::to_string(i + 1) +
        " has " + std::to_string(pts.size()) +
        " demand points; pass the point index explicitly");
  }
  return interference_psd(sc, i, a, pts[0]);
}

double spectral_efficiency(const Scenario& sc, int i, Pattern a) {
  if (i < 0 || i >= sc.cell_count()) {
    throw std::invalid_argument("spectral_efficiency: bad cell index");
  }
  if (!contains(a, i)) return 0.0;

  const auto pts = sc.points_of(i);
  if (pts.empty()) {
    throw std::invalid_argument("spectral_efficiency: cell " + std::to_string(i + 1) +
                                " has no demand point");
  }
  const double packets_per_bit_hz = sc.bandwidth_hz / sc.packet_bits;
  double acc = 0.0;
  for (int k : pts) {
    const DemandPoint& d = sc.demand[k];
    const double signal =
        sc.tx_psd[i] * pathloss_gain(point_distance(sc, i, d), sc.pathloss_exp[i]);
    const double snr = signal / interference_at(sc, i, a, d);
    acc += packets_per_bit_hz * std::log2(1.0 + snr);
  }
  return acc / static_cast<double>(pts.size());
}

EfficiencyTable build_table(const Scenario& sc) {
  sc.validate();
  const int n = sc.cell_count();
  if (n > kMaxCells) {
    throw std::invalid_argument("build_table: " + std::to_string(n) +
                                " cells exceeds the cap of " + std::to_string(kMaxCells) +
                                " (table size is n * 2^n)");
  }
  EfficiencyTable tbl;
  tbl.n = n;
  tbl.s.assign(std::size_t(n) << n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (sc.points_of(i).empty()) {
      throw std::invalid_argument("build_table: cell " + std::to_string(i + 1) +
                                  " has no demand point");
    }
    for (Pattern a = 0; a < pattern_count(n); ++a) {
      if (!contains(a, i)) continue;
      tbl.s[(std::size_t(i) << n) + a] = spectral_efficiency(sc, i, a);
    }
  }
  return tbl;
}

}  // namespace specsim
