#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "specsim/allocation.hpp"
#include "specsim/baselines.hpp"
#include "specsim/conservative.hpp"
#include "specsim/efficiency.hpp"
#include "specsim/pattern.hpp"
#include "specsim/power.hpp"
#include "specsim/refined.hpp"
#include "specsim/refined_opt.hpp"
#include "specsim/scenario.hpp"
#include "specsim/schemes.hpp"

namespace {

using namespace specsim;

EfficiencyTable random_table(int n, std::uint64_t seed) {
  RandomScenarioParams p;
  p.n = n;
  p.seed = seed;
  return build_table(random_scenario(p));
}

std::vector<std::vector<double>> oracle_rows(const EfficiencyTable& tbl) {
  std::vector<std::vector<double>> s(tbl.n);
  for (int i = 0; i < tbl.n; ++i) {
    s[i].resize(pattern_count(tbl.n) - 1);
    for (Pattern b = 1; b < pattern_count(tbl.n); ++b) s[i][b - 1] = tbl.at(i, b);
  }
  return s;
}

std::vector<double> solo_rates(const EfficiencyTable& tbl) {
  std::vector<double> s(tbl.n);
  for (int i = 0; i < tbl.n; ++i) s[i] = tbl.at(i, singleton(i));
  return s;
}

std::vector<double> full_reuse_fraction(const EfficiencyTable& tbl, double frac) {
  std::vector<double> lam(tbl.n);
  for (int i = 0; i < tbl.n; ++i) lam[i] = frac * tbl.at(i, full_mask(tbl.n));
  return lam;
}

}  // namespace

TEST_CASE("orthogonal split matches the waterline optimum") {
  for (int n = 2; n <= 4; ++n) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      CAPTURE(n);
      CAPTURE(seed);
      const auto tbl = random_table(n, seed * 5 + n);
      const auto solo = solo_rates(tbl);
      std::vector<double> lam(n);
      for (int i = 0; i < n; ++i) lam[i] = 0.2 * solo[i];

      const auto res = solve_orthogonal(tbl, lam);
      res.x.validate();
      for (Pattern b : res.x.support()) CHECK(std::popcount(b) == 1);
      CHECK(res.report.weighted ==
            doctest::Approx(oracles::orthogonal_optimum(solo, lam)).epsilon(1e-6));

      // Every active slice sees the same marginal value at the optimum.
      double ref = 0.0;
      bool have_ref = false;
      for (int i = 0; i < n; ++i) {
        const double y = res.x.x[singleton(i)];
        const double d = lam[i] * solo[i] / std::pow(solo[i] * y - lam[i], 2);
        if (!have_ref) {
          ref = d;
          have_ref = true;
        } else {
          CHECK(d == doctest::Approx(ref).epsilon(1e-4));
        }
      }
    }
  }
}

TEST_CASE("orthogonal infeasibility reports the inverse slice demand") {
  const auto tbl = random_table(3, 2);
  const auto solo = solo_rates(tbl);
  std::vector<double> lam(3);
  double need = 0.0;
  for (int i = 0; i < 3; ++i) {
    lam[i] = 0.45 * solo[i];
    need += lam[i] / solo[i];
  }
  REQUIRE(need == doctest::Approx(1.35).epsilon(1e-12));
  try {
    solve_orthogonal(tbl, lam);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.rho_star == doctest::Approx(1.0 / 1.35).epsilon(1e-12));
    CHECK(std::string(e.what()).find("orthogonal split") != std::string::npos);
  }
}

TEST_CASE("throughput margin tracks the reference LP and scales inversely") {
  const auto tbl = random_table(4, 19);
  const auto lam = full_reuse_fraction(tbl, 0.8);
  const double margin = throughput_margin(tbl, lam);
  const double expect = oracles::max_load_scale(oracle_rows(tbl), lam);
  CHECK(margin == doctest::Approx(expect).epsilon(5e-6));

  std::vector<double> doubled(lam);
  for (double& v : doubled) v *= 2.0;
  CHECK(throughput_margin(tbl, doubled) == doctest::Approx(margin / 2).epsilon(5e-6));

  std::vector<double> at_cap(lam);
  for (double& v : at_cap) v *= margin;
  CHECK(throughput_margin(tbl, at_cap) == doctest::Approx(1.0).epsilon(5e-6));

  CHECK_THROWS_AS(throughput_margin(tbl, std::vector<double>(4, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("refined solve never loses to the conservative allocation") {
  for (std::uint64_t seed : {2ull, 6ull}) {
    CAPTURE(seed);
    const auto tbl = random_table(3, seed);
    const auto lam = full_reuse_fraction(tbl, 0.6);
    const auto cons = solve_conservative(tbl, lam);
    const auto fine = solve_refined(tbl, lam);
    fine.x.validate();
    const double at_cons = refined_delay(tbl, cons.x, lam).weighted;
    CHECK(fine.report.weighted <= at_cons * (1 + 1e-9));
    CHECK(fine.report.weighted > 0.0);
    CHECK(fine.trace.restart_agreement > 0.0);
    CHECK(fine.trace.restart_agreement <= 1.0);
  }
}

TEST_CASE("refined solve recovers the single-cell and light-load answers") {
  EfficiencyTable tbl;
  tbl.n = 1;
  tbl.s = {0.0, 20.0};
  const auto solo = solve_refined(tbl, {10.0});
  CHECK(solo.x.x[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(solo.report.weighted == doctest::Approx(0.1).epsilon(1e-9));

  // At light symmetric load, sharing the whole band wins: going orthogonal
  // halves the solo rate while collisions are rare.
  EfficiencyTable pair;
  pair.n = 2;
  pair.s = {0.0, 30.0, 0.0, 18.0, 0.0, 0.0, 30.0, 18.0};
  const std::vector<double> light = {1.5, 1.5};
  const auto res = solve_refined(pair, light);
  const double at_full = refined_objective_value(pair, full_reuse_allocation(2).x, light);
  CHECK(res.report.weighted <= at_full * (1 + 1e-9));
  CHECK(res.x.x[3] > 0.9);

  // When the all-busy rate falls below the load, pure reuse is unstable and
  // the optimum must carve out private spectrum.
  EfficiencyTable harsh;
  harsh.n = 2;
  harsh.s = {0.0, 30.0, 0.0, 10.0, 0.0, 0.0, 30.0, 10.0};
  const std::vector<double> heavy = {12.0, 12.0};
  const auto stressed = solve_refined(harsh, heavy);
  CHECK(std::isfinite(stressed.report.weighted));
  CHECK(stressed.x.x[3] < 0.5);
}

TEST_CASE("refined evaluation flags infeasible points with a finite penalty") {
  EfficiencyTable pair;
  pair.n = 2;
  pair.s = {0.0, 30.0, 0.0, 18.0, 0.0, 0.0, 24.0, 15.0};
  const std::vector<double> lam = {19.0, 5.0};  // beyond the all-busy rate

  const auto bad = refined_objective_and_gradient(pair, full_reuse_allocation(2).x, lam, 1e-6);
  CHECK(bad.infeasible);
  CHECK(std::isfinite(bad.value));
  CHECK(bad.value >= 1e12);
  for (double g : bad.gradient) CHECK(std::isfinite(g));

  const std::vector<double> ok = {10.0, 5.0};
  const auto good = refined_objective_and_gradient(pair, full_reuse_allocation(2).x, ok, 1e-6);
  CHECK(!good.infeasible);
  CHECK(good.value ==
        doctest::Approx(refined_objective_value(pair, full_reuse_allocation(2).x, ok))
            .epsilon(1e-12));
}

TEST_CASE("a warm start is honored and never hurts") {
  const auto tbl = random_table(3, 23);
  const auto lam = full_reuse_fraction(tbl, 0.55);
  const auto base = solve_refined(tbl, lam);

  SolveOptions opt;
  opt.restarts = 1;
  opt.warm_start = base.x.x;
  const auto warm = solve_refined(tbl, lam, opt);
  CHECK(warm.report.weighted <= base.report.weighted * (1 + 1e-6));
}

TEST_CASE("every optimizing scheme agrees on feasibility near the boundary") {
  const auto tbl = random_table(4, 27);
  const auto lam = full_reuse_fraction(tbl, 0.9);
  const double rho = oracles::max_load_scale(oracle_rows(tbl), lam);

  std::vector<double> inside(lam), outside(lam);
  for (int i = 0; i < 4; ++i) {
    inside[i] *= 0.95 * rho;
    outside[i] *= 1.05 * rho;
  }

  CHECK_NOTHROW(solve_conservative(tbl, inside));
  CHECK_NOTHROW(solve_conservative_candidates(tbl, inside));
  CHECK_NOTHROW(solve_refined(tbl, inside));

  CHECK_THROWS_AS(solve_conservative(tbl, outside), InfeasibleError);
  CHECK_THROWS_AS(solve_conservative_candidates(tbl, outside), InfeasibleError);
  CHECK_THROWS_AS(solve_refined(tbl, outside), InfeasibleError);
}

TEST_CASE("scheme names round-trip") {
  for (Scheme s : {Scheme::kFullReuse, Scheme::kOrthogonal, Scheme::kConservative,
                   Scheme::kConservativeDirect, Scheme::kRefined}) {
    CHECK(scheme_from_name(scheme_name(s)) == s);
  }
  CHECK(scheme_name(Scheme::kFullReuse) == "full-reuse");
  CHECK(scheme_name(Scheme::kConservativeDirect) == "conservative-direct");
  CHECK_THROWS_AS(scheme_from_name("alamouti"), std::invalid_argument);
}

TEST_CASE("fixed schemes evaluate their allocation verbatim") {
  const auto tbl = random_table(3, 31);
  const auto lam = full_reuse_fraction(tbl, 0.5);

  const auto full = solve_scheme(Scheme::kFullReuse, tbl, lam);
  CHECK(full.x.x[full_mask(3)] == doctest::Approx(1.0));
  CHECK(full.report.weighted ==
        doctest::Approx(conservative_delay(tbl, full.x, lam).weighted).epsilon(1e-13));

  const auto refined = solve_scheme(Scheme::kRefined, tbl, lam);
  CHECK(refined.report.weighted ==
        doctest::Approx(refined_delay(tbl, refined.x, lam).weighted).epsilon(1e-10));
}

TEST_CASE("power budgets default to the current spend") {
  RandomScenarioParams p;
  p.n = 3;
  p.seed = 2;
  p.tx_psd = 1.5;
  const auto sc = random_scenario(p);
  const auto b = default_power_budgets(sc);
  REQUIRE(b.size() == 3);
  for (double v : b) CHECK(v == doctest::Approx(1.5 * 20e6).epsilon(1e-12));
}

TEST_CASE("power pours into the granted bandwidth") {
  RandomScenarioParams p;
  p.n = 3;
  p.seed = 14;
  const auto sc = random_scenario(p);
  const auto budgets = default_power_budgets(sc);
  const std::vector<double> lam = {1.0, 1.0, 1.0};

  SUBCASE("full reuse is a no-op") {
    const auto out = update_efficiencies(sc, full_reuse_allocation(3), budgets, lam);
    for (int i = 0; i < 3; ++i) CHECK(out.tx_psd[i] == doctest::Approx(sc.tx_psd[i]));
    CHECK(out.bts == sc.bts);
  }

  SUBCASE("an even split concentrates power by the cell count") {
    const auto out = update_efficiencies(sc, uniform_orthogonal_allocation(3), budgets, lam);
    for (int i = 0; i < 3; ++i) {
      CHECK(out.tx_psd[i] == doctest::Approx(3.0 * sc.tx_psd[i]).epsilon(1e-12));
    }
  }

  SUBCASE("a loaded cell granted nothing is an error, an idle one goes dark") {
    Allocation x = Allocation::zeros(3);
    x.x[singleton(0) | singleton(1)] = 1.0;  // cell 2 gets nothing
    CHECK_THROWS_AS(update_efficiencies(sc, x, budgets, lam), std::invalid_argument);
    const auto out = update_efficiencies(sc, x, budgets, {1.0, 1.0, 0.0});
    CHECK(out.tx_psd[2] == 0.0);
    CHECK(out.tx_psd[0] == doctest::Approx(sc.tx_psd[0]).epsilon(1e-12));
  }
}

TEST_CASE("concentrating power helps an orthogonal split") {
  const auto tbl_sc = [&] {
    RandomScenarioParams p;
    p.n = 3;
    p.seed = 44;
    return random_scenario(p);
  }();
  const auto tbl = build_table(tbl_sc);
  const auto solo = solo_rates(tbl);
  std::vector<double> lam(3);
  for (int i = 0; i < 3; ++i) lam[i] = 0.25 * solo[i];

  const auto res = solve_orthogonal(tbl, lam);
  const auto boosted = update_efficiencies(tbl_sc, res.x, default_power_budgets(tbl_sc), lam);
  const auto tbl2 = build_table(boosted);
  const double before = res.report.weighted;
  const double after = conservative_delay(tbl2, res.x, lam).weighted;
  CHECK(after < before);
}

TEST_CASE("alternation settles and keeps a coherent trace") {
  RandomScenarioParams p;
  p.n = 3;
  p.seed = 50;
  const auto sc = random_scenario(p);
  const auto tbl = build_table(sc);
  const auto lam = full_reuse_fraction(tbl, 0.55);

  PowerControlOptions opt;
  opt.scheme = Scheme::kConservative;
  opt.max_iters = 8;
  const auto res = alternate_power_control(sc, lam, opt);

  REQUIRE(!res.steps.empty());
  CHECK(res.steps[0].iteration == 0);
  CHECK(res.steps[0].phase == 'a');
  CHECK(std::isnan(res.steps[0].tv_change));
  CHECK(std::isnan(res.steps[0].simulated_delay));

  for (std::size_t k = 1; k < res.steps.size(); ++k) {
    const auto& st = res.steps[k];
    CHECK(st.phase == (k % 2 == 1 ? 'p' : 'a'));
    CHECK(st.iteration == int((k + 1) / 2));
    if (st.phase == 'p') {
      CHECK(std::isnan(st.tv_change));
    } else {
      CHECK(std::isfinite(st.tv_change));
      CHECK(st.tv_change >= 0.0);
    }
    CHECK(st.analytic_delay > 0.0);
  }

  res.x.validate();
  CHECK((res.converged || res.cycled || res.iterations == opt.max_iters));
  for (int i = 0; i < 3; ++i) CHECK(res.scenario.tx_psd[i] > 0.0);
}

TEST_CASE("alternation can drive the refined scheme with simulation attached") {
  RandomScenarioParams p;
  p.n = 2;
  p.seed = 61;
  const auto sc = random_scenario(p);
  const auto tbl = build_table(sc);
  const auto lam = full_reuse_fraction(tbl, 0.5);

  PowerControlOptions opt;
  opt.scheme = Scheme::kRefined;
  opt.max_iters = 3;
  opt.sim_horizon = 60'000;
  opt.solver.restarts = 2;
  const auto res = alternate_power_control(sc, lam, opt);
  REQUIRE(!res.steps.empty());
  for (const auto& st : res.steps) {
    CHECK(std::isfinite(st.simulated_delay));
    CHECK(st.simulated_delay > 0.0);
  }
  res.x.validate();
}
