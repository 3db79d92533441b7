#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace specsim {

struct DemandPoint {
  std::array<double, 2> pos{};  // meters
  int cell = 0;                 // serving BTS
};

// Static description of one network drop. PSDs are in uW/Hz, distances in
// meters, bandwidth in Hz, packet size in bits. The demand points carry the
// association; it is fixed by the scenario and never re-optimized.
struct Scenario {
  std::vector<std::array<double, 2>> bts;
  std::vector<double> tx_psd;
  std::vector<double> pathloss_exp;
  std::vector<DemandPoint> demand;
  double noise_psd = 0.125e-6;
  double bandwidth_hz = 20e6;
  double packet_bits = 1e6;

  int cell_count() const { return static_cast<int>(bts.size()); }
  std::vector<int> points_of(int i) const;

  // Throws std::invalid_argument on size mismatches, non-positive radio
  // constants, or demand points referencing unknown cells.
  void validate() const;
};

struct HexDropParams {
  double width = 100.0;
  double height = 100.0;
  double spacing = 20.0;  // distance between adjacent hexagon centers
  int bts_count = 7;
  std::uint64_t seed = 1;
  int macro_count = 0;  // leading BTSs get the macro radio class
  double pico_psd = 1.0;
  double pico_exp = 3.0;
  double macro_psd = 10.0;
  double macro_exp = 2.8;
  double noise_psd = 0.125e-6;
  double bandwidth_hz = 20e6;
  double packet_bits = 1e6;
};

// Tiles the area with hexagons at the given center spacing, drops the BTSs
// on distinct hexagon vertices uniformly at random, and puts one demand
// point at every hexagon center inside the area, served by its nearest BTS.
// Draws are retried (deterministically) until every BTS serves at least one
// point, since a cell with no demand point has no defined efficiency.
Scenario hex_drop(const HexDropParams& p);

struct RandomScenarioParams {
  int n = 4;
  double width = 100.0;
  double height = 100.0;
  double min_separation = 12.0;
  double ue_offset = 8.0;  // demand point distance from its BTS
  std::uint64_t seed = 1;
  double tx_psd = 1.0;
  double pathloss_exp = 3.0;
  double noise_psd = 0.125e-6;
  double bandwidth_hz = 20e6;
  double packet_bits = 1e6;
};

// BTSs uniform in the box subject to a minimum pairwise separation, one
// demand point per cell at a random bearing. The workhorse for randomized
// tests and the "random" layout in config files.
Scenario random_scenario(const RandomScenarioParams& p);

}  // namespace specsim
