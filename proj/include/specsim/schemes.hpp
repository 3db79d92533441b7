#pragma once

#include <string>

#include "specsim/conservative.hpp"
#include "specsim/efficiency.hpp"

namespace specsim {

enum class Scheme {
  kFullReuse,
  kOrthogonal,
  kConservative,  // candidate-set solver
  kConservativeDirect,
  kRefined,
};

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws std::invalid_argument

// One entry point for every allocation policy. The fixed schemes (full reuse,
// orthogonal) just evaluate their allocation; the others optimize. Reports
// use the matching delay model: refined for kRefined, worst-case otherwise.
AllocResult solve_scheme(Scheme s, const EfficiencyTable& tbl,
                         const std::vector<double>& lambda, const SolveOptions& opt = {});

}  // namespace specsim
