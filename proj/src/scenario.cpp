#include "specsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace specsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

// Canonical double in [0,1) from the top 53 bits; keeps runs reproducible
// across standard libraries, unlike uniform_real_distribution.
double canonical(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<int> Scenario::points_of(int i) const {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(demand.size()); ++k) {
    if (demand[k].cell == i) out.push_back(k);
  }
  return out;
}

void Scenario::validate() const {
  const auto n = bts.size();
  if (n == 0) throw std::invalid_argument("scenario: no BTS");
  if (tx_psd.size() != n || pathloss_exp.size() != n) {
    throw std::invalid_argument("scenario: per-BTS arrays disagree with BTS count");
  }
  if (noise_psd <= 0 || bandwidth_hz <= 0 || packet_bits <= 0) {
    throw std::invalid_argument("scenario: radio constants must be positive");
  }
  for (double p : tx_psd) {
    if (p < 0 || !std::isfinite(p)) throw std::invalid_argument("scenario: bad tx_psd");
  }
  for (double e : pathloss_exp) {
    if (e <= 0 || !std::isfinite(e)) throw std::invalid_argument("scenario: bad pathloss_exp");
  }
  for (const auto& d : demand) {
    if (d.cell < 0 || d.cell >= static_cast<int>(n)) {
      throw std::invalid_argument("scenario: demand point references cell " +
                                  std::to_string(d.cell));
    }
  }
}

Scenario hex_drop(const HexDropParams& p) {
  if (p.bts_count < 1 || p.bts_count > 16) {
    throw std::invalid_argument("hex_drop: bts_count out of range");
  }
  if (p.spacing <= 0) throw std::invalid_argument("hex_drop: spacing <= 0");
  if (p.macro_count < 0 || p.macro_count > p.bts_count) {
    throw std::invalid_argument("hex_drop: macro_count out of range");
  }

  // Pointy-top hexagons with adjacent centers p.spacing apart; the
  // circumradius is then spacing / sqrt(3).
  const double R = p.spacing / std::sqrt(3.0);
  const double col_step = p.spacing;
  const double row_step = 1.5 * R;

  std::vector<std::array<double, 2>> centers;
  std::map<std::pair<long long, long long>, std::array<double, 2>> vertex_map;
  const auto key = [](const std::array<double, 2>& v) {
    return std::make_pair(static_cast<long long>(std::llround(v[0] * 1e6)),
                          static_cast<long long>(std::llround(v[1] * 1e6)));
  };

  const int row_hi = static_cast<int>(p.height / row_step) + 2;
  const int col_hi = static_cast<int>(p.width / col_step) + 2;
  for (int row = -2; row <= row_hi; ++row) {
    for (int col = -2; col <= col_hi; ++col) {
      const double cx = col * col_step + ((row & 1) ? col_step / 2 : 0.0);
      const double cy = row * row_step;
      if (cx < 0 || cx > p.width || cy < 0 || cy > p.height) continue;
      centers.push_back({cx, cy});
      for (int k = 0; k < 6; ++k) {
        const double ang = (90.0 + 60.0 * k) * kPi / 180.0;
        std::array<double, 2> v{cx + R * std::cos(ang), cy + R * std::sin(ang)};
        if (v[0] < -1e-9 || v[0] > p.width + 1e-9 || v[1] < -1e-9 ||
            v[1] > p.height + 1e-9) {
          continue;  // boundary hexagons poke outside the area
        }
        v[0] = std::clamp(v[0], 0.0, p.width);
        v[1] = std::clamp(v[1], 0.0, p.height);
        vertex_map.emplace(key(v), v);
      }
    }
  }

  std::vector<std::array<double, 2>> vertices;
  vertices.reserve(vertex_map.size());
  for (const auto& [k, v] : vertex_map) vertices.push_back(v);
  if (static_cast<int>(vertices.size()) < p.bts_count) {
    throw std::invalid_argument("hex_drop: area too small for bts_count");
  }

  std::mt19937_64 rng(p.seed);

  // A drop can leave a BTS with no demand point (every center nearer to some
  // other BTS). Those cells would have no efficiency, so redraw until the
  // assignment covers everyone. Deterministic given the seed.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<int> pick(vertices.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = static_cast<int>(i);
    for (std::size_t i = 0; i + 1 < pick.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(canonical(rng) * (pick.size() - i));
      std::swap(pick[i], pick[j]);
    }

    Scenario sc;
    sc.noise_psd = p.noise_psd;
    sc.bandwidth_hz = p.bandwidth_hz;
    sc.packet_bits = p.packet_bits;
    for (int i = 0; i < p.bts_count; ++i) {
      sc.bts.push_back(vertices[pick[i]]);
      const bool macro = i < p.macro_count;
      sc.tx_psd.push_back(macro ? p.macro_psd : p.pico_psd);
      sc.pathloss_exp.push_back(macro ? p.macro_exp : p.pico_exp);
    }

    std::vector<bool> covered(p.bts_count, false);
    for (const auto& c : centers) {
      int best = 0;
      double best_d = dist(c, sc.bts[0]);
      for (int i = 1; i < p.bts_count; ++i) {
        const double d = dist(c, sc.bts[i]);
        if (d < best_d) { best_d = d; best = i; }
      }
      sc.demand.push_back({c, best});
      covered[best] = true;
    }
    if (std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) {
      sc.validate();
      return sc;
    }
  }
  throw std::invalid_argument("hex_drop: could not cover every BTS with a demand point");
}

Scenario random_scenario(const RandomScenarioParams& p) {
  if (p.n < 1 || p.n > 16) throw std::invalid_argument("random_scenario: n out of range");
  std::mt19937_64 rng(p.seed);

  Scenario sc;
  sc.noise_psd = p.noise_psd;
  sc.bandwidth_hz = p.bandwidth_hz;
  sc.packet_bits = p.packet_bits;
  sc.tx_psd.assign(p.n, p.tx_psd);
  sc.pathloss_exp.assign(p.n, p.pathloss_exp);

  for (int i = 0; i < p.n; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000) {
        throw std::invalid_argument("random_scenario: cannot honor min_separation");
      }
      std::array<double, 2> pos{canonical(rng) * p.width, canonical(rng) * p.height};
      bool ok = true;
      for (const auto& q : sc.bts) {
        if (dist(pos, q) < p.min_separation) { ok = false; break; }
      }
      if (ok) { sc.bts.push_back(pos); break; }
    }
  }
  for (int i = 0; i < p.n; ++i) {
    const double ang = canonical(rng) * 2 * kPi;
    DemandPoint d;
    d.pos = {sc.bts[i][0] + p.ue_offset * std::cos(ang),
             sc.bts[i][1] + p.ue_offset * std::sin(ang)};
    d.cell = i;
    sc.demand.push_back(d);
  }
  sc.validate();
  return sc;
}

}  // namespace specsim
