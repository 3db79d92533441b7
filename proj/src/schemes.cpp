#include "specsim/schemes.hpp"

#include <stdexcept>

#include "specsim/baselines.hpp"
#include "specsim/refined_opt.hpp"

namespace specsim {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kFullReuse: return "full-reuse";
    case Scheme::kOrthogonal: return "orthogonal";
    case Scheme::kConservative: return "conservative";
    case Scheme::kConservativeDirect: return "conservative-direct";
    case Scheme::kRefined: return "refined";
  }
  throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::kFullReuse, Scheme::kOrthogonal, Scheme::kConservative,
                   Scheme::kConservativeDirect, Scheme::kRefined}) {
    if (scheme_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + name +
                              "' (expected full-reuse, orthogonal, conservative, "
                              "conservative-direct, or refined)");
}

AllocResult solve_scheme(Scheme s, const EfficiencyTable& tbl,
                         const std::vector<double>& lambda, const SolveOptions& opt) {
  switch (s) {
    case Scheme::kFullReuse: {
      AllocResult res;
      res.x = full_reuse_allocation(tbl.n);
      res.report = conservative_delay(tbl, res.x, lambda);
      res.trace.converged = true;
      return res;
    }
    case Scheme::kOrthogonal:
      return solve_orthogonal(tbl, lambda, opt);
    case Scheme::kConservative:
      return solve_conservative_candidates(tbl, lambda, opt);
    case Scheme::kConservativeDirect:
      return solve_conservative(tbl, lambda, opt);
    case Scheme::kRefined:
      return solve_refined(tbl, lambda, opt);
  }
  throw std::invalid_argument("unknown scheme");
}

}  // namespace specsim
