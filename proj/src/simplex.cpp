#include "stoptime/simplex.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include "stoptime/errors.hpp"

namespace stoptime {

namespace {

struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;  // including rhs
  std::vector<double> data;

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

}  // namespace

LpResult solve_lp(const LpProblem& problem, int max_iters, double eps) {
  const std::size_t m = problem.row_coeffs.size();
  const std::size_t n = static_cast<std::size_t>(problem.num_vars);
  if (problem.objective.size() != n) {
    throw PreconditionError("solve_lp: objective size mismatch");
  }

  // columns: n structural, then one slack/surplus per inequality row, then
  // one artificial per GE/EQ row, then rhs
  std::size_t num_slack = 0, num_art = 0;
  for (RowType t : problem.row_types) {
    if (t != RowType::EQ) ++num_slack;
    if (t != RowType::LE) ++num_art;
  }
  // rows with negative rhs are flipped first, which can turn LE into GE
  std::vector<std::vector<double>> coeffs = problem.row_coeffs;
  std::vector<RowType> types = problem.row_types;
  std::vector<double> rhs = problem.row_rhs;
  for (std::size_t i = 0; i < m; ++i) {
    if (rhs[i] < 0) {
      for (double& c : coeffs[i]) c = -c;
      rhs[i] = -rhs[i];
      if (types[i] == RowType::LE) types[i] = RowType::GE;
      else if (types[i] == RowType::GE) types[i] = RowType::LE;
    }
  }
  num_slack = 0;
  num_art = 0;
  for (RowType t : types) {
    if (t != RowType::EQ) ++num_slack;
    if (t != RowType::LE) ++num_art;
  }

  const std::size_t total = n + num_slack + num_art;
  Tableau tab;
  tab.rows = m;
  tab.cols = total + 1;
  tab.data.assign(tab.rows * tab.cols, 0.0);

  std::vector<std::size_t> basis(m);
  std::vector<bool> artificial(total, false);

  std::size_t slack_at = n;
  std::size_t art_at = n + num_slack;
  for (std::size_t i = 0; i < m; ++i) {
    if (coeffs[i].size() != n) throw PreconditionError("solve_lp: row size mismatch");
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = coeffs[i][j];
    tab.at(i, total) = rhs[i];
    switch (types[i]) {
      case RowType::LE:
        tab.at(i, slack_at) = 1.0;
        basis[i] = slack_at++;
        break;
      case RowType::GE:
        tab.at(i, slack_at) = -1.0;
        ++slack_at;
        tab.at(i, art_at) = 1.0;
        artificial[art_at] = true;
        basis[i] = art_at++;
        break;
      case RowType::EQ:
        tab.at(i, art_at) = 1.0;
        artificial[art_at] = true;
        basis[i] = art_at++;
        break;
    }
  }

  LpResult result;

  // cost row: reduced costs, last entry = -objective
  std::vector<double> cost(total + 1, 0.0);
  auto rebuild_cost = [&](const std::vector<double>& c) {
    for (std::size_t j = 0; j <= total; ++j) cost[j] = j < c.size() ? c[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double cb = basis[i] < c.size() ? c[basis[i]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= total; ++j) cost[j] -= cb * tab.at(i, j);
    }
  };

  auto pivot = [&](std::size_t pr, std::size_t pc) {
    double pv = tab.at(pr, pc);
    for (std::size_t j = 0; j <= total; ++j) tab.at(pr, j) /= pv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == pr) continue;
      double f = tab.at(i, pc);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= total; ++j) tab.at(i, j) -= f * tab.at(pr, j);
    }
    double f = cost[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= total; ++j) cost[j] -= f * tab.at(pr, j);
    }
    basis[pr] = pc;
  };

  // Bland: entering = least-index column with negative reduced cost; leaving
  // = least-index basic variable among the minimum ratios.
  auto iterate = [&](bool allow_artificial) -> LpStatus {
    while (true) {
      if (result.iterations >= max_iters) return LpStatus::IterLimit;
      std::size_t enter = total;
      for (std::size_t j = 0; j < total; ++j) {
        if (!allow_artificial && artificial[j]) continue;
        if (cost[j] < -eps) {
          enter = j;
          break;
        }
      }
      if (enter == total) return LpStatus::Optimal;
      std::size_t leave = m;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        double a = tab.at(i, enter);
        if (a > eps) {
          double ratio = tab.at(i, total) / a;
          if (ratio < best_ratio - eps ||
              (ratio < best_ratio + eps && (leave == m || basis[i] < basis[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++result.iterations;
    }
  };

  // phase 1
  if (num_art > 0) {
    std::vector<double> c1(total, 0.0);
    for (std::size_t j = 0; j < total; ++j) {
      if (artificial[j]) c1[j] = 1.0;
    }
    rebuild_cost(c1);
    LpStatus st = iterate(true);
    if (st == LpStatus::IterLimit) {
      result.status = st;
      return result;
    }
    double phase1 = -cost[total];
    if (phase1 > 1e-7) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // drive basic artificials out where the row has structural support
    for (std::size_t i = 0; i < m; ++i) {
      if (!artificial[basis[i]]) continue;
      for (std::size_t j = 0; j < n + num_slack; ++j) {
        if (std::abs(tab.at(i, j)) > eps) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  // phase 2
  std::vector<double> c2(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    c2[j] = problem.maximize ? -problem.objective[j] : problem.objective[j];
  }
  rebuild_cost(c2);
  LpStatus st = iterate(false);
  result.status = st;
  if (st == LpStatus::Unbounded || st == LpStatus::IterLimit) return result;

  result.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) result.x[basis[i]] = tab.at(i, total);
  }
  double obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) obj += problem.objective[j] * result.x[j];
  result.objective = obj;
  result.status = LpStatus::Optimal;
  return result;
}

}  // namespace stoptime
