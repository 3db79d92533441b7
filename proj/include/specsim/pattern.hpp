#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>

namespace specsim {

// A reuse pattern is a set of transmitting BTSs packed into the low n bits:
// bit i set means BTS i is allowed to transmit on that slice of spectrum.
// Pattern values double as array indices, so anything indexed by patterns
// has 2^n entries.
using Pattern = std::uint32_t;

inline constexpr int kMaxCells = 16;

inline int popcount(Pattern a) { return std::popcount(a); }
inline bool contains(Pattern a, int i) { return (a >> i) & 1u; }
inline Pattern singleton(int i) { return Pattern{1} << i; }
inline Pattern full_mask(int n) { return (Pattern{1} << n) - 1u; }
inline std::size_t pattern_count(int n) { return std::size_t{1} << n; }

// Set notation with 1-based cell ids, e.g. "{1,3}"; the empty pattern
// prints as "{}".
inline std::string pattern_name(Pattern a) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; a >> i; ++i) {
    if (!contains(a, i)) continue;
    if (!first) out += ',';
    out += std::to_string(i + 1);
    first = false;
  }
  out += '}';
  return out;
}

}  // namespace specsim
