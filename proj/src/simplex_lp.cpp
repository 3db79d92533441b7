#include "specsim/simplex_lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace specsim {

namespace {
constexpr double kPivotEps = 1e-11;
}

std::optional<std::vector<double>> lp_feasible_point(
    const std::vector<std::vector<double>>& C, const std::vector<double>& d) {
  const int nrows = static_cast<int>(C.size());
  if (static_cast<int>(d.size()) != nrows) {
    throw std::invalid_argument("lp_feasible_point: C and d disagree");
  }
  const int K = nrows ? static_cast<int>(C[0].size()) : 0;
  if (K == 0) throw std::invalid_argument("lp_feasible_point: no columns");

  // Tableau layout: columns [0, K) are x, [K, K+nrows) are the surplus
  // variables of the inequality rows, then one artificial per row that
  // needs it, then the right-hand side. Row 0 is the simplex equality.
  const int m = nrows + 1;
  const int surplus0 = K;
  const int art0 = K + nrows;
  const int ncols = art0 + m;  // upper bound on artificials
  const int rhs = ncols;

  std::vector<std::vector<double>> T(m, std::vector<double>(ncols + 1, 0.0));
  std::vector<int> basis(m, -1);
  std::vector<bool> is_artificial(ncols, false);
  int n_art = 0;

  // Row 0: sum_j x_j = 1.
  for (int j = 0; j < K; ++j) T[0][j] = 1.0;
  T[0][rhs] = 1.0;
  {
    const int a = art0 + n_art++;
    T[0][a] = 1.0;
    is_artificial[a] = true;
    basis[0] = a;
  }

  // Rows 1..nrows: C x - u = d, sign-flipped when d < 0 so the RHS stays
  // nonnegative. With a flipped row the surplus column carries +1 and can
  // start in the basis; otherwise an artificial does.
  for (int i = 0; i < nrows; ++i) {
    const int r = i + 1;
    const double sign = (d[i] < 0) ? -1.0 : 1.0;
    for (int j = 0; j < K; ++j) T[r][j] = sign * C[i][j];
    T[r][surplus0 + i] = sign * -1.0;
    T[r][rhs] = sign * d[i];
    if (sign < 0) {
      basis[r] = surplus0 + i;
    } else {
      const int a = art0 + n_art++;
      T[r][a] = 1.0;
      is_artificial[a] = true;
      basis[r] = a;
    }
  }

  // Reduced costs for minimizing the sum of artificials: z_j = -sum over
  // rows whose basic variable is artificial.
  std::vector<double> z(ncols + 1, 0.0);
  for (int r = 0; r < m; ++r) {
    if (!is_artificial[basis[r]]) continue;
    for (int j = 0; j <= ncols; ++j) z[j] -= T[r][j];
  }
  for (int r = 0; r < m; ++r) {
    if (is_artificial[basis[r]]) z[basis[r]] += 1.0;  // basic columns read zero
  }

  const long max_pivots = 200L * (ncols + m);
  for (long pivot = 0; pivot < max_pivots; ++pivot) {
    // Bland: entering = lowest-index column with a negative reduced cost.
    int enter = -1;
    for (int j = 0; j < ncols; ++j) {
      if (!is_artificial[j] && z[j] < -kPivotEps) { enter = j; break; }
    }
    if (enter < 0) break;

    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      if (T[r][enter] > kPivotEps) {
        const double ratio = T[r][rhs] / T[r][enter];
        if (ratio < best - kPivotEps ||
            (ratio < best + kPivotEps && (leave < 0 || basis[r] < basis[leave]))) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot happen in phase 1

    const double piv = T[leave][enter];
    for (int j = 0; j <= ncols; ++j) T[leave][j] /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == leave || std::abs(T[r][enter]) < 1e-14) continue;
      const double f = T[r][enter];
      for (int j = 0; j <= ncols; ++j) T[r][j] -= f * T[leave][j];
    }
    {
      const double f = z[enter];
      if (std::abs(f) > 0) {
        for (int j = 0; j <= ncols; ++j) z[j] -= f * T[leave][j];
      }
    }
    basis[leave] = enter;
  }

  // Objective value = current infeasibility. -z[rhs] is the phase-1 cost.
  double infeas = 0.0;
  for (int r = 0; r < m; ++r) {
    if (is_artificial[basis[r]]) infeas += T[r][rhs];
  }
  if (infeas > 1e-9) return std::nullopt;

  std::vector<double> x(K, 0.0);
  for (int r = 0; r < m; ++r) {
    if (basis[r] < K) x[basis[r]] = std::max(T[r][rhs], 0.0);
  }
  return x;
}

std::optional<MaxSlackPoint> lp_max_min_slack(
    const std::vector<std::vector<double>>& C, const std::vector<double>& d) {
  const int nrows = static_cast<int>(C.size());
  if (static_cast<int>(d.size()) != nrows) {
    throw std::invalid_argument("lp_max_min_slack: C and d disagree");
  }
  const int K = nrows ? static_cast<int>(C[0].size()) : 0;
  if (K == 0) throw std::invalid_argument("lp_max_min_slack: no columns");

  // Same tableau as lp_feasible_point with one extra structural column: the
  // slack level t sits at index K and enters every inequality as C x - t >= d.
  const int m = nrows + 1;
  const int tcol = K;
  const int surplus0 = K + 1;
  const int art0 = surplus0 + nrows;
  const int ncols = art0 + m;
  const int rhs = ncols;

  std::vector<std::vector<double>> T(m, std::vector<double>(ncols + 1, 0.0));
  std::vector<int> basis(m, -1);
  std::vector<bool> is_artificial(ncols, false);
  int n_art = 0;

  for (int j = 0; j < K; ++j) T[0][j] = 1.0;
  T[0][rhs] = 1.0;
  {
    const int a = art0 + n_art++;
    T[0][a] = 1.0;
    is_artificial[a] = true;
    basis[0] = a;
  }

  for (int i = 0; i < nrows; ++i) {
    const int r = i + 1;
    const double sign = (d[i] < 0) ? -1.0 : 1.0;
    for (int j = 0; j < K; ++j) T[r][j] = sign * C[i][j];
    T[r][tcol] = sign * -1.0;
    T[r][surplus0 + i] = sign * -1.0;
    T[r][rhs] = sign * d[i];
    if (sign < 0) {
      basis[r] = surplus0 + i;
    } else {
      const int a = art0 + n_art++;
      T[r][a] = 1.0;
      is_artificial[a] = true;
      basis[r] = a;
    }
  }

  // Pivots on the given column (Bland ratio test), returning the leaving row
  // or -1 when no row blocks the direction.
  const auto pivot_once = [&](int enter) {
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      if (T[r][enter] > kPivotEps) {
        const double ratio = T[r][rhs] / T[r][enter];
        if (ratio < best - kPivotEps ||
            (ratio < best + kPivotEps && (leave < 0 || basis[r] < basis[leave]))) {
          best = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) return -1;
    const double piv = T[leave][enter];
    for (int j = 0; j <= ncols; ++j) T[leave][j] /= piv;
    for (int r = 0; r < m; ++r) {
      if (r == leave || std::abs(T[r][enter]) < 1e-14) continue;
      const double f = T[r][enter];
      for (int j = 0; j <= ncols; ++j) T[r][j] -= f * T[leave][j];
    }
    basis[leave] = enter;
    return leave;
  };

  const auto run_phase = [&](std::vector<double>& z) {
    const long max_pivots = 200L * (ncols + m);
    for (long pivot = 0; pivot < max_pivots; ++pivot) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j) {
        if (!is_artificial[j] && z[j] < -kPivotEps) { enter = j; break; }
      }
      if (enter < 0) return;
      const double ze = z[enter];
      const int leave = pivot_once(enter);
      if (leave < 0) return;
      for (int j = 0; j <= ncols; ++j) z[j] -= ze * T[leave][j];
    }
  };

  // Phase 1: minimize the artificial mass.
  {
    std::vector<double> z(ncols + 1, 0.0);
    for (int r = 0; r < m; ++r) {
      if (!is_artificial[basis[r]]) continue;
      for (int j = 0; j <= ncols; ++j) z[j] -= T[r][j];
    }
    for (int r = 0; r < m; ++r) {
      if (is_artificial[basis[r]]) z[basis[r]] += 1.0;
    }
    run_phase(z);
    double infeas = 0.0;
    for (int r = 0; r < m; ++r) {
      if (is_artificial[basis[r]]) infeas += T[r][rhs];
    }
    if (infeas > 1e-9) return std::nullopt;
  }

  // Phase 2: minimize -t from the feasible basis.
  {
    std::vector<double> z(ncols + 1, 0.0);
    z[tcol] = -1.0;
    for (int r = 0; r < m; ++r) {
      if (basis[r] == tcol) {
        for (int j = 0; j <= ncols; ++j) z[j] += T[r][j];
      }
    }
    run_phase(z);
  }

  MaxSlackPoint out;
  out.x.assign(K, 0.0);
  for (int r = 0; r < m; ++r) {
    if (basis[r] < K) out.x[basis[r]] = std::max(T[r][rhs], 0.0);
    if (basis[r] == tcol) out.slack = std::max(T[r][rhs], 0.0);
  }
  return out;
}

}  // namespace specsim
