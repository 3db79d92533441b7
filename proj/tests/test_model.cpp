#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "specsim/efficiency.hpp"
#include "specsim/scenario.hpp"

using namespace specsim;

namespace {

// Two BTSs at the same spot, one demand point 10 m away. With exponent 3 the
// path gain to both is exactly 1e-3, which pins the SINR by choice of PSDs.
Scenario colocated_pair(double serving_psd, double interferer_psd) {
  Scenario sc;
  sc.bts = {{0.0, 0.0}, {0.0, 0.0}};
  sc.tx_psd = {serving_psd, interferer_psd};
  sc.pathloss_exp = {3.0, 3.0};
  sc.demand = {{{10.0, 0.0}, 0}, {{10.0, 0.0}, 1}};
  return sc;
}

constexpr double kGain10m = 1e-3;  // max(10,1)^-3

}  // namespace

TEST_CASE("path gain follows the clamped power law") {
  CHECK(pathloss_gain(10.0, 3.0) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(pathloss_gain(100.0, 2.0) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK(pathloss_gain(1.0, 3.0) == 1.0);
  CHECK(pathloss_gain(0.25, 3.0) == 1.0);  // below the reference distance
  CHECK(pathloss_gain(0.0, 2.8) == 1.0);
  CHECK(pathloss_gain(7.0, 3.0) > pathloss_gain(8.0, 3.0));
}

TEST_CASE("interference is noise alone when the cell transmits solo") {
  const auto sc = colocated_pair(1.0, 1.0);
  CHECK(interference_psd(sc, 0, 0b01) == doctest::Approx(0.125e-6).epsilon(1e-14));
}

TEST_CASE("a co-channel transmitter adds its received PSD") {
  const auto sc = colocated_pair(1.0, 1.0);
  const double want = 0.125e-6 + 1.0 * kGain10m;
  CHECK(interference_psd(sc, 0, 0b11) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("efficiency hits the Shannon anchors at pinned SINR") {
  const double g = kGain10m;
  const double noise = 0.125e-6;
  // SINR exactly 1: 20e6/1e6 * log2(2) = 20 packets/s.
  {
    const auto sc = colocated_pair((noise + g) / g, 1.0);
    CHECK(spectral_efficiency(sc, 0, 0b11) == doctest::Approx(20.0).epsilon(1e-12));
  }
  // SINR exactly 3: 20 * log2(4) = 40 packets/s.
  {
    const auto sc = colocated_pair(3.0 * (noise + g) / g, 1.0);
    CHECK(spectral_efficiency(sc, 0, 0b11) == doctest::Approx(40.0).epsilon(1e-12));
  }
}

TEST_CASE("a cell outside the pattern has zero efficiency") {
  const auto sc = colocated_pair(1.0, 1.0);
  CHECK(spectral_efficiency(sc, 0, 0b10) == 0.0);
}

TEST_CASE("more co-channel transmitters never help") {
  Scenario sc;
  sc.bts = {{0, 0}, {30, 0}, {0, 30}};
  sc.tx_psd = {1.0, 1.0, 1.0};
  sc.pathloss_exp = {3.0, 3.0, 3.0};
  sc.demand = {{{5, 0}, 0}, {{35, 0}, 1}, {{0, 35}, 2}};
  const auto tbl = build_table(sc);
  for (int i = 0; i < 3; ++i) {
    for (Pattern a = 1; a < pattern_count(3); ++a) {
      if (!contains(a, i)) continue;
      for (int j = 0; j < 3; ++j) {
        if (contains(a, j)) continue;
        CHECK(tbl.at(i, a) >= tbl.at(i, a | singleton(j)));
      }
    }
  }
}

TEST_CASE("rates are averaged over demand points, interference is not") {
  // Cell 0 has two demand points at different distances; its rate must be
  // the mean of the two per-point rates, not the rate at a pooled SINR.
  Scenario sc;
  sc.bts = {{0, 0}, {40, 0}};
  sc.tx_psd = {1.0, 1.0};
  sc.pathloss_exp = {3.0, 3.0};
  sc.demand = {{{4, 0}, 0}, {{12, 0}, 0}, {{44, 0}, 1}};
  const double w_over_l = sc.bandwidth_hz / sc.packet_bits;
  double mean = 0.0;
  for (int p : {0, 1}) {
    const double d_serve = sc.demand[p].pos[0];
    const double sig = pathloss_gain(d_serve, 3.0);
    const double interf = interference_psd(sc, 0, 0b11, p);
    mean += 0.5 * w_over_l * std::log2(1.0 + sig / interf);
  }
  CHECK(spectral_efficiency(sc, 0, 0b11) == doctest::Approx(mean).epsilon(1e-13));
  // The convenience overload refuses ambiguity.
  CHECK_THROWS_AS((void)interference_psd(sc, 0, 0b11), std::invalid_argument);
}

TEST_CASE("efficiency table is permutation equivariant") {
  Scenario sc;
  sc.bts = {{0, 0}, {25, 5}, {10, 30}};
  sc.tx_psd = {1.0, 2.0, 0.5};
  sc.pathloss_exp = {3.0, 2.8, 3.4};
  sc.demand = {{{3, 2}, 0}, {{28, 5}, 1}, {{10, 24}, 2}};
  const auto tbl = build_table(sc);

  // Swap cells 0 and 2 everywhere.
  Scenario swapped;
  swapped.bts = {sc.bts[2], sc.bts[1], sc.bts[0]};
  swapped.tx_psd = {sc.tx_psd[2], sc.tx_psd[1], sc.tx_psd[0]};
  swapped.pathloss_exp = {sc.pathloss_exp[2], sc.pathloss_exp[1], sc.pathloss_exp[0]};
  swapped.demand = {{{10, 24}, 0}, {{28, 5}, 1}, {{3, 2}, 2}};
  const auto tbl2 = build_table(swapped);

  const auto relabel = [](Pattern a) {
    Pattern b = a & 0b010;
    if (a & 0b001) b |= 0b100;
    if (a & 0b100) b |= 0b001;
    return b;
  };
  for (int i = 0; i < 3; ++i) {
    const int i2 = i == 0 ? 2 : i == 2 ? 0 : 1;
    for (Pattern a = 0; a < 8; ++a) {
      CHECK(tbl.at(i, a) == doctest::Approx(tbl2.at(i2, relabel(a))).epsilon(1e-13));
    }
  }
}

TEST_CASE("hex drop produces a valid covered layout") {
  HexDropParams p;
  p.seed = 42;
  const auto sc = hex_drop(p);
  sc.validate();
  CHECK(sc.cell_count() == 7);
  std::set<std::pair<double, double>> distinct;
  for (const auto& b : sc.bts) {
    CHECK(b[0] >= 0.0);
    CHECK(b[0] <= p.width);
    CHECK(b[1] >= 0.0);
    CHECK(b[1] <= p.height);
    distinct.insert({b[0], b[1]});
  }
  CHECK(distinct.size() == 7);  // distinct vertices
  for (const auto& d : sc.demand) {
    CHECK(d.pos[0] >= 0.0);
    CHECK(d.pos[0] <= p.width);
    CHECK(d.pos[1] >= 0.0);
    CHECK(d.pos[1] <= p.height);
    // Served by the nearest BTS.
    const auto dist = [&](int j) {
      const double dx = d.pos[0] - sc.bts[j][0], dy = d.pos[1] - sc.bts[j][1];
      return dx * dx + dy * dy;
    };
    for (int j = 0; j < 7; ++j) CHECK(dist(d.cell) <= dist(j) + 1e-12);
  }
  for (int i = 0; i < 7; ++i) CHECK(!sc.points_of(i).empty());

  // Deterministic in the seed, different across seeds.
  const auto again = hex_drop(p);
  CHECK(again.bts == sc.bts);
  HexDropParams q = p;
  q.seed = 43;
  CHECK(hex_drop(q).bts != sc.bts);
}

TEST_CASE("hex drop applies the macro class to leading cells") {
  HexDropParams p;
  p.seed = 5;
  p.macro_count = 2;
  p.pico_exp = 3.4;
  const auto sc = hex_drop(p);
  CHECK(sc.tx_psd[0] == 10.0);
  CHECK(sc.tx_psd[1] == 10.0);
  CHECK(sc.tx_psd[2] == 1.0);
  CHECK(sc.pathloss_exp[0] == 2.8);
  CHECK(sc.pathloss_exp[6] == 3.4);
}

TEST_CASE("random scenario respects separation and association") {
  RandomScenarioParams p;
  p.n = 5;
  p.seed = 9;
  const auto sc = random_scenario(p);
  sc.validate();
  CHECK(sc.cell_count() == 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      const double dx = sc.bts[i][0] - sc.bts[j][0], dy = sc.bts[i][1] - sc.bts[j][1];
      CHECK(std::sqrt(dx * dx + dy * dy) >= p.min_separation - 1e-9);
    }
  }
  CHECK(sc.demand.size() == 5);
  for (int i = 0; i < 5; ++i) {
    const auto& d = sc.demand[i];
    const double dx = d.pos[0] - sc.bts[d.cell][0], dy = d.pos[1] - sc.bts[d.cell][1];
    CHECK(std::sqrt(dx * dx + dy * dy) == doctest::Approx(p.ue_offset).epsilon(1e-9));
  }
}

TEST_CASE("table construction enforces the cell cap and demand coverage") {
  Scenario sc;
  for (int i = 0; i < 17; ++i) {
    sc.bts.push_back({double(i * 20), 0.0});
    sc.tx_psd.push_back(1.0);
    sc.pathloss_exp.push_back(3.0);
    sc.demand.push_back({{double(i * 20) + 3.0, 0.0}, i});
  }
  CHECK_THROWS_AS((void)build_table(sc), std::invalid_argument);

  Scenario uncovered;
  uncovered.bts = {{0, 0}, {30, 0}};
  uncovered.tx_psd = {1.0, 1.0};
  uncovered.pathloss_exp = {3.0, 3.0};
  uncovered.demand = {{{3, 0}, 0}};  // cell 1 has no demand point
  CHECK_THROWS_AS((void)build_table(uncovered), std::invalid_argument);
}
